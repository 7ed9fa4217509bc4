#include "crystalwalk/albanese.hpp"

#include <cmath>
#include <map>

namespace crystalwalk {

HomologicalData homological_data(const QuotientGraph& g,
                                 const InvariantMeasure& m) {
  HomologicalData out;
  const int ne = g.edge_count();
  out.edge_weight.resize(ne);
  for (int ei = 0; ei < ne; ++ei)
    out.edge_weight(ei) = g.edges[ei].p * m.values(g.edges[ei].from);
  for (int ei = 0; ei < ne; ++ei)
    if (ei < g.edges[ei].inverse)
      out.cycle_coefficients.emplace_back(
          ei, out.edge_weight(ei) - out.edge_weight(g.edges[ei].inverse));
  out.asymptotic_direction = Eigen::VectorXd::Zero(g.dim);
  for (int ei = 0; ei < ne; ++ei)
    for (int k = 0; k < g.dim; ++k)
      out.asymptotic_direction(k) +=
          out.edge_weight(ei) * double(g.edges[ei].translation[k]);
  return out;
}

HarmonicRealization modified_harmonic_realization(const QuotientGraph& g,
                                                  const InvariantMeasure& m,
                                                  int base) {
  const int n = g.vertex_count();
  const int d = g.dim;
  const auto hom = homological_data(g, m);
  const Eigen::VectorXd& rho = hom.asymptotic_direction;

  // Per coordinate k: (L - I) Phi_k = rho_k - sum_{E_x} p(e) tau(e)_k,
  // with the base-vertex row replaced by the pin Phi_k(base) = 0.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    for (int ei : g.out_edges[v]) A(v, g.edges[ei].to) += g.edges[ei].p;
    A(v, v) -= 1.0;
  }
  A.row(base).setZero();
  A(base, base) = 1.0;

  HarmonicRealization out;
  out.base_vertex = base;
  out.positions.resize(n, d);
  const auto lu = A.partialPivLu();
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd b(n);
    for (int v = 0; v < n; ++v) {
      double s = 0;
      for (int ei : g.out_edges[v])
        s += g.edges[ei].p * double(g.edges[ei].translation[k]);
      b(v) = rho(k) - s;
    }
    b(base) = 0.0;
    out.positions.col(k) = lu.solve(b);
  }
  if (!out.positions.allFinite())
    throw Error("singular system: modified harmonic realization "
                "(is the quotient walk irreducible?)");

  // Residual of the modified-harmonicity equation over all vertices.
  double res = 0;
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) {
      double s = 0;
      for (int ei : g.out_edges[v]) {
        const auto& e = g.edges[ei];
        s += e.p * (out.positions(e.to, k) + double(e.translation[k]) -
                    out.positions(v, k));
      }
      res = std::max(res, std::abs(s - rho(k)));
    }
  out.residual = res;
  return out;
}

Eigen::MatrixXd edge_forms(const QuotientGraph& g,
                           const HarmonicRealization& phi) {
  Eigen::MatrixXd dphi(g.edge_count(), g.dim);
  for (int ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edges[ei];
    for (int k = 0; k < g.dim; ++k)
      dphi(ei, k) = phi.positions(e.to, k) + double(e.translation[k]) -
                    phi.positions(e.from, k);
  }
  return dphi;
}

AlbaneseStructure albanese_structure(const QuotientGraph& g,
                                     const InvariantMeasure& m,
                                     const HarmonicRealization& phi) {
  const int d = g.dim;
  const auto hom = homological_data(g, m);
  const Eigen::MatrixXd dphi = edge_forms(g, phi);

  AlbaneseStructure out;
  out.gram = -hom.asymptotic_direction * hom.asymptotic_direction.transpose();
  for (int ei = 0; ei < g.edge_count(); ++ei)
    out.gram +=
        hom.edge_weight(ei) * dphi.row(ei).transpose() * dphi.row(ei);

  Eigen::LLT<Eigen::MatrixXd> llt(out.gram);
  if (llt.info() != Eigen::Success)
    throw Error("Albanese Gram matrix is not positive definite "
                "(degenerate walk: support does not span)");
  const Eigen::MatrixXd R = llt.matrixL();
  out.embedding =
      R.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  out.metric = out.gram.inverse();
  double det = 1.0;
  for (int i = 0; i < d; ++i) det *= R(i, i);
  out.volume = 1.0 / det;
  return out;
}

double metric_norm(const AlbaneseStructure& S, const Eigen::VectorXd& x) {
  return (S.embedding * x).norm();
}

EpsilonFamily epsilon_family(const QuotientGraph& g,
                             const InvariantMeasure& m) {
  EpsilonFamily F;
  F.base = g;
  const int ne = g.edge_count();
  F.p0.resize(ne);
  F.q.resize(ne);
  for (int ei = 0; ei < ne; ++ei) {
    const auto& e = g.edges[ei];
    const double rev =
        g.edges[e.inverse].p * m.values(e.to) / m.values(e.from);
    F.p0(ei) = 0.5 * (e.p + rev);
    F.q(ei) = 0.5 * (e.p - rev);
  }
  return F;
}

QuotientGraph family_member(const EpsilonFamily& F, double eps) {
  QuotientGraph g = F.base;
  for (int ei = 0; ei < g.edge_count(); ++ei) {
    const double p = F.p0(ei) + eps * F.q(ei);
    if (p < -1e-14)
      throw Error("negative probability in epsilon-family member at edge '" +
                  g.edges[ei].id + "'");
    g.edges[ei].p = std::max(p, 0.0);
  }
  return g;
}

LatticeAnalysis analyze(const QuotientGraph& g, int search_depth) {
  require_valid(g);
  LatticeAnalysis A;
  try {
    A.refinement = refine_quotient(g, search_depth);
  } catch (const Error& e) {
    throw Error(std::string("analyze[refine]: ") + e.what());
  }
  A.period_K = A.refinement.period_K;
  A.graph = A.refinement.refined_graph;
  try {
    A.measure = invariant_measure(A.graph);
    A.homology = homological_data(A.graph, A.measure);
    A.realization = modified_harmonic_realization(A.graph, A.measure);
    A.dphi = edge_forms(A.graph, A.realization);
    A.albanese = albanese_structure(A.graph, A.measure, A.realization);
  } catch (const Error& e) {
    throw Error(std::string("analyze[spectral/albanese]: ") + e.what());
  }
  return A;
}

RealizationExport export_realization(const LatticeAnalysis& A,
                                     const LatticeVector& lo,
                                     const LatticeVector& hi) {
  const int d = A.graph.dim;
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw Error("export window dimension mismatch");
  RealizationExport out;
  std::map<std::pair<int, LatticeVector>, int> row_of;

  // Enumerate cells of the window in lexicographic order.
  std::vector<LatticeVector> cells;
  LatticeVector cur = lo;
  bool nonempty = true;
  for (int k = 0; k < d; ++k)
    if (lo[k] > hi[k]) nonempty = false;
  while (nonempty) {
    cells.push_back(cur);
    int k = 0;
    for (; k < d; ++k) {
      if (++cur[k] <= hi[k]) break;
      cur[k] = lo[k];
    }
    if (k == d) break;
  }

  for (const auto& cell : cells)
    for (int v = 0; v < A.graph.vertex_count(); ++v) {
      Eigen::VectorXd x = A.realization.positions.row(v);
      for (int k = 0; k < d; ++k) x(k) += double(cell[k]);
      row_of[{v, cell}] = static_cast<int>(out.points.size());
      out.points.push_back({v, cell, A.albanese.embedding * x});
    }

  for (const auto& cell : cells)
    for (int ei = 0; ei < A.graph.edge_count(); ++ei) {
      const auto& e = A.graph.edges[ei];
      if (ei > e.inverse) continue;  // one row per geometric edge
      LatticeVector target = cell;
      for (int k = 0; k < d; ++k) target[k] += e.translation[k];
      auto it = row_of.find({e.to, target});
      if (it != row_of.end())
        out.edges.emplace_back(row_of.at({e.from, cell}), it->second);
    }
  return out;
}

}  // namespace crystalwalk
