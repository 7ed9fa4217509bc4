#include "crystalwalk/heat_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace crystalwalk {

namespace {

// Dense DP over the box ||tau||_inf <= R.  The accumulation order is the
// fixed edge-list order within a cell sweep, so results are bit-stable.
class HeatKernelDP {
 public:
  HeatKernelDP(const LatticeAnalysis& A, int start, int max_n,
               std::size_t cell_cap)
      : A_(A), d_(A.graph.dim), nv_(A.graph.vertex_count()), start_(start) {
    step_tau_ = 1;
    for (const auto& e : A.graph.edges)
      if (e.p > 0)
        for (auto c : e.translation)
          step_tau_ = std::max(step_tau_, std::abs(c));
    R_ = static_cast<std::int64_t>(max_n) * step_tau_;
    side_ = 2 * R_ + 1;
    std::size_t cells = nv_;
    for (int k = 0; k < d_; ++k) {
      if (cells > cell_cap / static_cast<std::size_t>(side_))
        throw Error("memory budget exceeded: DP support needs more than " +
                    std::to_string(cell_cap) + " cells");
      cells *= static_cast<std::size_t>(side_);
    }
    cur_.assign(cells, 0.0);
    next_.assign(cells, 0.0);
    cur_[index(start, LatticeVector(d_, 0))] = 1.0;
  }

  int n() const { return n_; }

  void step() {
    const std::int64_t r = std::min<std::int64_t>((n_ + 1) * step_tau_, R_);
    // Sweep only the box that the support can have reached.
    LatticeVector tau(d_, -std::min<std::int64_t>(n_ * step_tau_, R_));
    const std::int64_t r0 = -tau[0];
    while (true) {
      for (int v = 0; v < nv_; ++v) {
        const double mass = cur_[index(v, tau)];
        if (mass == 0.0) continue;
        for (int ei : A_.graph.out_edges[v]) {
          const auto& e = A_.graph.edges[ei];
          if (e.p <= 0) continue;
          LatticeVector t2 = tau;
          bool in = true;
          for (int k = 0; k < d_; ++k) {
            t2[k] += e.translation[k];
            if (std::abs(t2[k]) > r) in = false;
          }
          if (in) next_[index(e.to, t2)] += e.p * mass;
        }
      }
      int k = 0;
      for (; k < d_; ++k) {
        if (++tau[k] <= r0) break;
        tau[k] = -r0;
      }
      if (k == d_) break;
    }
    cur_.swap(next_);
    std::fill(next_.begin(), next_.end(), 0.0);
    // Flush denormal-range noise.
    for (double& x : cur_)
      if (x != 0.0 && std::abs(x) < 1e-300) x = 0.0;
    ++n_;
  }

  void run_to(int n) {
    while (n_ < n) step();
  }

  double mass_at(int v, const LatticeVector& tau) const {
    for (auto c : tau)
      if (std::abs(c) > R_) return 0.0;
    return cur_[index(v, tau)];
  }

  // Visits every nonzero state.
  template <typename F>
  void for_each(F&& f) const {
    const std::int64_t r = std::min<std::int64_t>(n_ * step_tau_, R_);
    LatticeVector tau(d_, -r);
    while (true) {
      for (int v = 0; v < nv_; ++v) {
        const double mass = cur_[index(v, tau)];
        if (mass != 0.0) f(v, tau, mass);
      }
      int k = 0;
      for (; k < d_; ++k) {
        if (++tau[k] <= r) break;
        tau[k] = -r;
      }
      if (k == d_) break;
    }
  }

 private:
  std::size_t index(int v, const LatticeVector& tau) const {
    std::size_t idx = static_cast<std::size_t>(v);
    std::size_t stride = static_cast<std::size_t>(nv_);
    for (int k = 0; k < d_; ++k) {
      idx += static_cast<std::size_t>(tau[k] + R_) * stride;
      stride *= static_cast<std::size_t>(side_);
    }
    return idx;
  }

  const LatticeAnalysis& A_;
  int d_, nv_, start_, n_ = 0;
  std::int64_t step_tau_, R_, side_;
  std::vector<double> cur_, next_;
};

int partition_label(const LatticeAnalysis& A, int vertex) {
  return A.refinement.partition_label.at(vertex);
}

bool admissible(const LatticeAnalysis& A, int n, int x, int y) {
  const int K = A.period_K;
  return ((partition_label(A, y) - partition_label(A, x)) % K + K) % K ==
         n % K;
}

}  // namespace

double HeatKernelTable::total() const {
  double s = 0;
  for (const auto& [k, v] : mass) s += v;
  return s;
}

HeatKernelTable exact_transition(const LatticeAnalysis& A, int start, int n,
                                 std::size_t cell_cap) {
  if (n < 0) throw Error("exact_transition: n must be >= 0");
  HeatKernelDP dp(A, start, std::max(n, 1), cell_cap);
  dp.run_to(n);
  HeatKernelTable out;
  out.n = n;
  out.start = start;
  dp.for_each([&](int v, const LatticeVector& tau, double mass) {
    out.mass[{v, tau}] = mass;
  });
  return out;
}

double gaussian_leading(const LatticeAnalysis& A, int n, const LatticeState& x,
                        const LatticeState& y) {
  if (n < 1) throw Error("gaussian_leading: n must be >= 1");
  if (!admissible(A, n, x.vertex, y.vertex)) return 0.0;
  const int d = A.graph.dim;
  Eigen::VectorXd z(d);
  for (int k = 0; k < d; ++k)
    z(k) = A.realization.positions(y.vertex, k) + double(y.cell[k]) -
           A.realization.positions(x.vertex, k) - double(x.cell[k]) -
           double(n) * A.homology.asymptotic_direction(k);
  const double nz = metric_norm(A.albanese, z);
  return A.period_K * A.albanese.volume * A.measure.values(y.vertex) *
         std::pow(2.0 * M_PI * n, -0.5 * d) * std::exp(-nz * nz / (2.0 * n));
}

double lclt_ratio(const LatticeAnalysis& A, int n, const LatticeState& x,
                  const LatticeState& y) {
  const double lead = gaussian_leading(A, n, x, y);
  if (lead <= 0)
    throw Error("lclt_ratio: zero Gaussian leading term (forbidden residue "
                "class)");
  HeatKernelDP dp(A, x.vertex, n, 100000000);
  dp.run_to(n);
  LatticeVector rel = y.cell;
  for (int k = 0; k < A.graph.dim; ++k) rel[k] -= x.cell[k];
  return dp.mass_at(y.vertex, rel) / lead;
}

double lclt_sup_error(const LatticeAnalysis& A, int n, const LatticeState& x,
                      const LatticeVector& lo, const LatticeVector& hi) {
  const int d = A.graph.dim;
  HeatKernelDP dp(A, x.vertex, n, 100000000);
  dp.run_to(n);
  const double pref = std::pow(2.0 * M_PI * n, 0.5 * d);
  double sup = 0;
  LatticeVector tau = lo;
  while (true) {
    for (int v = 0; v < A.graph.vertex_count(); ++v) {
      if (admissible(A, n, x.vertex, v)) {
        LatticeVector abs_cell = tau;
        for (int k = 0; k < d; ++k) abs_cell[k] += x.cell[k];
        const LatticeState y{v, abs_cell};
        const double lead = gaussian_leading(A, n, x, y);
        const double val =
            pref * dp.mass_at(v, tau) / A.measure.values(v) -
            pref * lead / A.measure.values(v);
        sup = std::max(sup, std::abs(val));
      }
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++tau[k] <= hi[k]) break;
      tau[k] = lo[k];
    }
    if (k == d) break;
  }
  return sup;
}

A1NumericResult a1_numeric(
    const LatticeAnalysis& A, const LatticeState& x,
    const std::vector<std::pair<int, LatticeState>>& targets) {
  if (targets.size() < 2)
    throw Error("a1_numeric: need at least two step counts");
  std::vector<std::pair<int, LatticeState>> ts = targets;
  std::sort(ts.begin(), ts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const int n_max = ts.back().first;

  HeatKernelDP dp(A, x.vertex, n_max, 100000000);
  std::vector<double> f;  // f(n) = n (U_n - 1)
  std::vector<int> ns;
  for (const auto& [n, y] : ts) {
    dp.run_to(n);
    const double lead = gaussian_leading(A, n, x, y);
    if (lead <= 0)
      throw Error("a1_numeric: target in forbidden residue class at n = " +
                  std::to_string(n));
    LatticeVector rel = y.cell;
    for (int k = 0; k < A.graph.dim; ++k) rel[k] -= x.cell[k];
    const double u = dp.mass_at(y.vertex, rel) / lead;
    ns.push_back(n);
    f.push_back(n * (u - 1.0));
  }

  A1NumericResult out;
  // Model f(n) = a1 + c n^{-1/2}.
  auto quarter = std::find(ns.begin(), ns.end(), n_max / 4);
  double a1, ccoef;
  if (n_max % 4 == 0 && quarter != ns.end()) {
    const double f_max = f.back();
    const double f_q = f[quarter - ns.begin()];
    a1 = 2.0 * f_max - f_q;  // Richardson: eliminates the n^{-1/2} term
    ccoef = (f_q - f_max) / (2.0 / std::sqrt(double(n_max)) -
                             1.0 / std::sqrt(double(n_max)));
  } else {
    // Least squares on (1, n^{-1/2}).
    Eigen::MatrixXd M(ns.size(), 2);
    Eigen::VectorXd b(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
      M(i, 0) = 1.0;
      M(i, 1) = 1.0 / std::sqrt(double(ns[i]));
      b(i) = f[i];
    }
    const Eigen::Vector2d sol = M.colPivHouseholderQr().solve(b);
    a1 = sol(0);
    ccoef = sol(1);
  }
  out.a1 = a1;
  double res = 0;
  for (std::size_t i = 0; i < ns.size(); ++i)
    res = std::max(res,
                   std::abs(a1 + ccoef / std::sqrt(double(ns[i])) - f[i]));
  out.fit_residual = res;
  out.ill_conditioned = res > 0.1 * std::abs(a1);
  return out;
}

A1NumericResult a1_numeric(const LatticeAnalysis& A, const LatticeState& x,
                           const LatticeState& y,
                           const std::vector<int>& n_list) {
  std::vector<std::pair<int, LatticeState>> ts;
  for (int n : n_list) ts.emplace_back(n, y);
  return a1_numeric(A, x, ts);
}

}  // namespace crystalwalk
