#include "crystalwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace crystalwalk {

namespace {

// Transition matrix acting on functions: (Lf)(x) = sum_{E_x} p(e) f(t(e)),
// i.e. M[x][y] = sum over edges x->y of p(e).
Eigen::MatrixXd transition_matrix(const QuotientGraph& g, bool transpose) {
  const int n = g.vertex_count();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v)
    for (int ei : g.out_edges[v]) {
      const auto& e = g.edges[ei];
      const double p = transpose ? g.edges[e.inverse].p : e.p;
      M(v, e.to) += p;
    }
  return M;
}

int default_depth(const QuotientGraph& g) {
  return std::max(32, 4 * g.vertex_count());
}

std::int64_t max_step_translation(const QuotientGraph& g) {
  std::int64_t m = 0;
  for (const auto& e : g.edges)
    if (e.p > 0)
      for (auto c : e.translation) m = std::max(m, std::abs(c));
  return std::max<std::int64_t>(m, 1);
}

// Dense encoding of a lifted state (vertex, tau) inside the box
// ||tau||_inf <= B; returns -1 when tau leaves the box.
struct StateCodec {
  int nv;
  int dim;
  std::int64_t B;
  std::int64_t side;  // 2B+1

  std::int64_t encode(int v, const LatticeVector& tau) const {
    std::int64_t idx = v;
    std::int64_t stride = nv;
    for (int k = 0; k < dim; ++k) {
      if (std::abs(tau[k]) > B) return -1;
      idx += (tau[k] + B) * stride;
      stride *= side;
    }
    return idx;
  }
};

// Row-style Hermite normal form of the lattice generated by the given row
// vectors: upper-triangular, positive diagonal, entries above the diagonal
// reduced into [0, diagonal).  Returns an empty matrix when the rows do not
// span full rank d.
std::vector<std::vector<std::int64_t>> hermite_normal_form(
    std::vector<std::vector<std::int64_t>> rows, int d) {
  int pivot_row = 0;
  for (int col = 0; col < d && pivot_row < static_cast<int>(rows.size());
       ++col) {
    // Eliminate column `col` below the pivot with integer row operations.
    while (true) {
      int best = -1;
      for (int r = pivot_row; r < static_cast<int>(rows.size()); ++r)
        if (rows[r][col] != 0 &&
            (best < 0 ||
             std::abs(rows[r][col]) < std::abs(rows[best][col])))
          best = r;
      if (best < 0) break;
      std::swap(rows[pivot_row], rows[best]);
      bool clean = true;
      for (int r = pivot_row + 1; r < static_cast<int>(rows.size()); ++r) {
        if (rows[r][col] == 0) continue;
        const std::int64_t q = rows[r][col] / rows[pivot_row][col];
        for (int k = 0; k < d; ++k) rows[r][k] -= q * rows[pivot_row][k];
        if (rows[r][col] != 0) clean = false;
      }
      if (clean) break;
    }
    if (rows[pivot_row][col] != 0) {
      if (rows[pivot_row][col] < 0)
        for (int k = 0; k < d; ++k) rows[pivot_row][k] = -rows[pivot_row][k];
      ++pivot_row;
    }
  }
  if (pivot_row < d) return {};  // rank deficient
  rows.resize(d);
  // Verify upper-triangular shape (pivot in column i for row i).
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j)
      if (rows[i][j] != 0) return {};
  // Reduce above-diagonal entries into [0, h_jj).
  for (int j = d - 1; j >= 0; --j)
    for (int i = 0; i < j; ++i) {
      std::int64_t q = rows[i][j] / rows[j][j];
      if (rows[i][j] - q * rows[j][j] < 0) --q;
      for (int k = 0; k < d; ++k) rows[i][k] -= q * rows[j][k];
    }
  return rows;
}

std::string cell_name(const LatticeVector& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c[i]);
  }
  return s + "]";
}

}  // namespace

InvariantMeasure invariant_measure(const QuotientGraph& g) {
  const int n = g.vertex_count();
  const Eigen::MatrixXd T = transition_matrix(g, /*transpose=*/true);
  // (T - I) m = 0 with the last equation replaced by sum(m) = 1.
  Eigen::MatrixXd A = T - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::VectorXd m = A.colPivHouseholderQr().solve(b);
  InvariantMeasure out;
  out.values = m;
  out.residual = (T * m - m).lpNorm<Eigen::Infinity>();
  if (!m.allFinite() || m.minCoeff() <= 0 || out.residual > 1e-10)
    throw Error("singular system: invariant measure not unique/positive "
                "(is the quotient walk irreducible?)");
  return out;
}

Eigen::VectorXd apply_transition(const QuotientGraph& g,
                                 const Eigen::VectorXd& f, bool transpose) {
  const int n = g.vertex_count();
  if (f.size() != n) throw Error("apply_transition: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < n; ++v)
    for (int ei : g.out_edges[v]) {
      const auto& e = g.edges[ei];
      const double p = transpose ? g.edges[e.inverse].p : e.p;
      out(v) += p * f(e.to);
    }
  return out;
}

double ergodic_average(const QuotientGraph& g, const Eigen::VectorXd& f, int x,
                       int N) {
  if (N < 1) throw Error("ergodic_average: N must be >= 1");
  Eigen::VectorXd cur = f;
  double acc = 0;
  for (int j = 0; j < N; ++j) {
    acc += cur(x);
    if (j + 1 < N) cur = apply_transition(g, cur);
  }
  return acc / N;
}

int quotient_period(const QuotientGraph& g) {
  const int n = g.vertex_count();
  // BFS levels over the support digraph; the period is the gcd of
  // level(o(e)) + 1 - level(t(e)) over all support edges.
  std::vector<std::int64_t> level(n, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int ei : g.out_edges[v])
      if (g.edges[ei].p > 0 && level[g.edges[ei].to] < 0) {
        level[g.edges[ei].to] = level[v] + 1;
        q.push(g.edges[ei].to);
      }
  }
  std::int64_t k = 0;
  for (const auto& e : g.edges)
    if (e.p > 0 && level[e.from] >= 0 && level[e.to] >= 0)
      k = std::gcd(k, std::abs(level[e.from] + 1 - level[e.to]));
  if (k == 0) throw Error("quotient_period: no closed walk found");
  return static_cast<int>(k);
}

int lifted_period(const QuotientGraph& g, int search_depth) {
  const int D = search_depth > 0 ? search_depth : default_depth(g);
  const StateCodec codec{g.vertex_count(), g.dim,
                         D * max_step_translation(g), 0};
  StateCodec c = codec;
  c.side = 2 * c.B + 1;

  const std::int64_t start = c.encode(0, LatticeVector(g.dim, 0));
  std::unordered_set<std::int64_t> cur{start};
  std::int64_t k = 0;
  for (int n = 1; n <= 2 * D && k != 1; ++n) {
    std::unordered_set<std::int64_t> next;
    next.reserve(cur.size() * 2);
    for (std::int64_t s : cur) {
      // Decode (vertex, tau).
      std::int64_t rest = s;
      const int v = static_cast<int>(rest % c.nv);
      rest /= c.nv;
      LatticeVector tau(g.dim);
      for (int i = 0; i < g.dim; ++i) {
        tau[i] = rest % c.side - c.B;
        rest /= c.side;
      }
      for (int ei : g.out_edges[v]) {
        const auto& e = g.edges[ei];
        if (e.p <= 0) continue;
        LatticeVector t2 = tau;
        for (int i = 0; i < g.dim; ++i) t2[i] += e.translation[i];
        const std::int64_t enc = c.encode(e.to, t2);
        if (enc >= 0) next.insert(enc);
      }
    }
    cur.swap(next);
    if (cur.count(start)) k = std::gcd(k, static_cast<std::int64_t>(n));
  }
  if (k == 0)
    throw Error("no return found within lifted-period horizon " +
                std::to_string(2 * D));
  return static_cast<int>(k);
}

namespace {

// Quotient K-partition labels via BFS with label(t(e)) = label(o(e)) + 1
// mod K.  Throws on conflict (K is then not the true period).
std::vector<int> quotient_labels(const QuotientGraph& g, int K) {
  std::vector<int> label(g.vertex_count(), -1);
  std::queue<int> q;
  label[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int ei : g.out_edges[v]) {
      const auto& e = g.edges[ei];
      if (e.p <= 0) continue;
      const int l = (label[v] + 1) % K;
      if (label[e.to] < 0) {
        label[e.to] = l;
        q.push(e.to);
      } else if (label[e.to] != l) {
        throw Error("label conflict: period " + std::to_string(K) +
                    " inconsistent with quotient cycles");
      }
    }
  }
  return label;
}

}  // namespace

RefinedQuotient refine_quotient(const QuotientGraph& g, int search_depth) {
  RefinedQuotient out;
  out.period_K = lifted_period(g, search_depth);
  out.quotient_period_K0 = quotient_period(g);
  const int d = g.dim;
  const int K = out.period_K;

  if (K == out.quotient_period_K0) {
    out.sublattice_basis.assign(d, std::vector<std::int64_t>(d, 0));
    for (int i = 0; i < d; ++i) out.sublattice_basis[i][i] = 1;
    out.index = 1;
    out.coset_reps = {LatticeVector(d, 0)};
    out.refined_graph = g;
    out.partition_label = quotient_labels(g, K);
    return out;
  }

  // BFS labels over lifted states: label(v, tau) = walk length mod K.
  const int D = search_depth > 0 ? search_depth : default_depth(g);
  StateCodec c{g.vertex_count(), d, std::min<std::int64_t>(D, 16) *
                                        max_step_translation(g),
               0};
  c.side = 2 * c.B + 1;
  std::unordered_map<std::int64_t, int> label;
  std::queue<std::pair<int, LatticeVector>> q;
  const LatticeVector zero(d, 0);
  label[c.encode(0, zero)] = 0;
  q.push({0, zero});
  std::vector<std::vector<std::int64_t>> lambda;  // {tau : label(base,tau)=0}
  while (!q.empty()) {
    auto [v, tau] = q.front();
    q.pop();
    const int l = label.at(c.encode(v, tau));
    if (v == 0 && l == 0) lambda.emplace_back(tau.begin(), tau.end());
    for (int ei : g.out_edges[v]) {
      const auto& e = g.edges[ei];
      if (e.p <= 0) continue;
      LatticeVector t2 = tau;
      for (int i = 0; i < d; ++i) t2[i] += e.translation[i];
      const std::int64_t enc = c.encode(e.to, t2);
      if (enc < 0) continue;  // outside the search box
      const int l2 = (l + 1) % K;
      auto it = label.find(enc);
      if (it == label.end()) {
        label.emplace(enc, l2);
        q.push({e.to, t2});
      } else if (it->second != l2) {
        throw Error("label conflict: lifted period overestimated; increase "
                    "search depth");
      }
    }
  }

  out.sublattice_basis = hermite_normal_form(lambda, d);
  if (out.sublattice_basis.empty())
    throw Error("rank deficient: return translations do not span a "
                "finite-index sublattice within the search box");
  out.index = 1;
  for (int i = 0; i < d; ++i) out.index *= out.sublattice_basis[i][i];

  // Reduction of a translation vector modulo Gamma_1: tau = rep + coeff*H.
  const auto& H = out.sublattice_basis;
  auto reduce = [&](LatticeVector tau) {
    LatticeVector coeff(d, 0);
    for (int i = 0; i < d; ++i) {
      std::int64_t qi = tau[i] / H[i][i];
      if (tau[i] - qi * H[i][i] < 0) --qi;
      coeff[i] = qi;
      for (int k = 0; k < d; ++k) tau[k] -= qi * H[i][k];
    }
    return std::make_pair(tau, coeff);
  };

  // Coset representatives: lattice points of the HNF fundamental
  // parallelepiped, 0 <= c_i < H[i][i], in lexicographic order.
  std::vector<LatticeVector> reps;
  LatticeVector cur(d, 0);
  std::function<void(int)> gen = [&](int i) {
    if (i == d) {
      reps.push_back(cur);
      return;
    }
    for (cur[i] = 0; cur[i] < H[i][i]; ++cur[i]) gen(i + 1);
    cur[i] = 0;
  };
  gen(0);
  out.coset_reps = reps;

  std::map<LatticeVector, int> rep_index;
  for (int i = 0; i < static_cast<int>(reps.size()); ++i)
    rep_index[reps[i]] = i;

  // Refined quotient graph on V0 x (Z^d / Gamma_1); translations of
  // refined edges are the Gamma_1-basis coefficients of the reduction.
  QuotientGraph r;
  r.dim = d;
  const int nrep = static_cast<int>(reps.size());
  for (int ci = 0; ci < nrep; ++ci)
    for (const auto& vname : g.vertices)
      r.vertices.push_back(vname + "@" + cell_name(reps[ci]));
  auto rv = [&](int v, int ci) { return ci * g.vertex_count() + v; };

  // New edge index of (original edge ei, source coset ci).
  auto re = [&](int ei, int ci) { return ci * g.edge_count() + ei; };
  r.edges.resize(static_cast<std::size_t>(g.edge_count()) * nrep);
  for (int ci = 0; ci < nrep; ++ci)
    for (int ei = 0; ei < g.edge_count(); ++ei) {
      const auto& e = g.edges[ei];
      LatticeVector raw = reps[ci];
      for (int i = 0; i < d; ++i) raw[i] += e.translation[i];
      auto [rep, coeff] = reduce(raw);
      QuotientEdge ne;
      ne.id = e.id + "@" + cell_name(reps[ci]);
      ne.from = rv(e.from, ci);
      ne.to = rv(e.to, rep_index.at(rep));
      ne.translation = coeff;
      ne.p = e.p;
      ne.inverse = re(e.inverse, rep_index.at(rep));
      r.edges[re(ei, ci)] = std::move(ne);
    }
  r.rebuild_out_edges();
  out.refined_graph = r;

  out.partition_label.assign(r.vertex_count(), -1);
  for (int ci = 0; ci < nrep; ++ci)
    for (int v = 0; v < g.vertex_count(); ++v) {
      const std::int64_t enc = c.encode(v, reps[ci]);
      auto it = label.find(enc);
      if (it == label.end())
        throw Error("rank deficient: coset representative outside the "
                    "labeled search box");
      out.partition_label[rv(v, ci)] = it->second;
    }

  if (quotient_period(out.refined_graph) != K)
    throw Error("refinement postcondition failed: refined quotient period "
                "!= lifted period");
  return out;
}

IrreducibilityReport check_irreducibility(const QuotientGraph& g, int radius) {
  IrreducibilityReport rep;
  rep.radius = radius;

  // Exact verdict on the quotient: strong connectivity of the support.
  {
    const int n = g.vertex_count();
    auto reachable = [&](bool backward) {
      std::vector<char> seen(n, 0);
      std::queue<int> q;
      seen[0] = 1;
      q.push(0);
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (const auto& e : g.edges) {
          if (e.p <= 0) continue;
          int a = backward ? e.to : e.from, b = backward ? e.from : e.to;
          if (a == v && !seen[b]) {
            seen[b] = 1;
            q.push(b);
          }
        }
      }
      return std::all_of(seen.begin(), seen.end(),
                         [](char x) { return x != 0; });
    };
    rep.quotient_irreducible = reachable(false) && reachable(true);
  }

  // Heuristic lifted verdict: union of DP supports over 4*radius steps must
  // cover every state in the inner box ||tau||_inf <= radius/2.
  StateCodec c{g.vertex_count(), g.dim, radius, 2 * static_cast<std::int64_t>(radius) + 1};
  std::unordered_set<std::int64_t> cur{c.encode(0, LatticeVector(g.dim, 0))};
  std::unordered_set<std::int64_t> seen = cur;
  for (int n = 1; n <= 4 * radius; ++n) {
    std::unordered_set<std::int64_t> next;
    for (std::int64_t s : cur) {
      std::int64_t rest = s;
      const int v = static_cast<int>(rest % c.nv);
      rest /= c.nv;
      LatticeVector tau(g.dim);
      for (int i = 0; i < g.dim; ++i) {
        tau[i] = rest % c.side - c.B;
        rest /= c.side;
      }
      for (int ei : g.out_edges[v]) {
        const auto& e = g.edges[ei];
        if (e.p <= 0) continue;
        LatticeVector t2 = tau;
        for (int i = 0; i < g.dim; ++i) t2[i] += e.translation[i];
        const std::int64_t enc = c.encode(e.to, t2);
        if (enc >= 0 && !next.count(enc)) next.insert(enc);
      }
    }
    for (std::int64_t s : next) seen.insert(s);
    cur.swap(next);
  }
  // Enumerate the inner box and test coverage.
  bool all = true;
  const std::int64_t inner = radius / 2;
  std::vector<std::int64_t> counts;
  LatticeVector tau(g.dim, -inner);
  while (true) {
    for (int v = 0; v < g.vertex_count() && all; ++v)
      if (!seen.count(c.encode(v, tau))) all = false;
    int i = 0;
    for (; i < g.dim; ++i) {
      if (++tau[i] <= inner) break;
      tau[i] = -inner;
    }
    if (i == g.dim || !all) break;
  }
  rep.lifted_heuristic_pass = all;
  rep.detail = "heuristic: DP reachability over box radius " +
               std::to_string(radius) + ", " + std::to_string(4 * radius) +
               " steps; inner box radius " + std::to_string(inner);
  return rep;
}

Eigen::MatrixXcd twisted_operator(const QuotientGraph& g,
                                  const Eigen::MatrixXd& dphi,
                                  const Eigen::VectorXd& omega) {
  const int n = g.vertex_count();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  const std::complex<double> tpi(0.0, 2.0 * M_PI);
  for (int ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edges[ei];
    const double phase = omega.dot(dphi.row(ei));
    M(e.from, e.to) += e.p * std::exp(tpi * phase);
  }
  return M;
}

PerronEigendata perron_eigendata(const QuotientGraph& g,
                                 const Eigen::MatrixXd& dphi,
                                 const Eigen::VectorXd& omega) {
  const int n = g.vertex_count();
  std::complex<double> mu = 1.0;
  Eigen::MatrixXcd M;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es;
  int pick = -1;
  // Continuation from omega = 0 along a straight segment in 8 steps to
  // avoid hopping onto a different branch (e.g. the -1 branch of bipartite
  // walks).
  for (int s = 1; s <= 8; ++s) {
    M = twisted_operator(g, dphi, (double(s) / 8.0) * omega);
    es.compute(M, /*computeEigenvectors=*/true);
    double d1 = 1e300, d2 = 1e300;
    pick = -1;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(es.eigenvalues()(i) - mu);
      if (d < d1) {
        d2 = d1;
        d1 = d;
        pick = i;
      } else if (d < d2) {
        d2 = d;
      }
    }
    if (n > 1 && d2 < 1e-8)
      throw Error("branch ambiguity: two eigenvalues within 1e-8 of the "
                  "tracked Perron branch");
    mu = es.eigenvalues()(pick);
  }

  PerronEigendata out;
  out.mu = mu;
  Eigen::VectorXcd phi = es.eigenvectors().col(pick);
  // Gauge: unit norm, largest-modulus entry real positive.
  phi /= phi.norm();
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(phi(i)) > std::abs(phi(imax))) imax = i;
  phi *= std::abs(phi(imax)) / phi(imax);

  // Left eigendata: eigenvector of the adjoint for conj(mu).
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> esa(M.adjoint());
  int pa = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(esa.eigenvalues()(i) - std::conj(mu)) <
        std::abs(esa.eigenvalues()(pa) - std::conj(mu)))
      pa = i;
  Eigen::VectorXcd psi = esa.eigenvectors().col(pa);
  // Normalize <phi, psi> = sum phi conj(psi) = 1.
  const std::complex<double> ip = (psi.adjoint() * phi)(0);
  if (std::abs(ip) < 1e-12)
    throw Error("degenerate left/right eigenvector pairing");
  psi /= std::conj(ip);
  out.right = phi;
  out.left = psi;
  return out;
}

}  // namespace crystalwalk
