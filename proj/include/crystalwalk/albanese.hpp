// Albanese geometry of the walk: homological/asymptotic direction, modified
// harmonic realization, Albanese inner product / metric / volume, the
// standard-realization embedding, the epsilon-interpolation family, and the
// bundled analysis pipeline.
#pragma once

#include <Eigen/Dense>

#include "crystalwalk/lattice.hpp"
#include "crystalwalk/spectral.hpp"

namespace crystalwalk {

struct HomologicalData {
  Eigen::VectorXd edge_weight;  // m-tilde(e) = p(e) m(o(e)), per edge
  // Coefficient m-tilde(e) - m-tilde(ebar) of gamma_p on each chosen
  // orientation representative (edge index with index < inverse index).
  std::vector<std::pair<int, double>> cycle_coefficients;
  Eigen::VectorXd asymptotic_direction;  // rho_R(gamma_p) in Gamma-coords
};

// Requires m = invariant_measure(g).
HomologicalData homological_data(const QuotientGraph& g,
                                 const InvariantMeasure& m);

struct HarmonicRealization {
  Eigen::MatrixXd positions;  // |V0| x d, Phi_0 in Gamma-coordinates
  int base_vertex = 0;        // positions.row(base_vertex) == 0
  double residual = 0.0;      // max modified-harmonicity violation
};

// Solves, per coordinate, sum_{e in E_x} p(e)(Phi(t(e)) + tau(e) - Phi(x))
// = rho_R(gamma_p) with Phi(base) = 0 (the modified harmonic realization,
// unique up to translation).
HarmonicRealization modified_harmonic_realization(const QuotientGraph& g,
                                                  const InvariantMeasure& m,
                                                  int base = 0);

// One row per edge: dPhi(e) = Phi(t(e)) + tau(e) - Phi(o(e)), Gamma-coords.
Eigen::MatrixXd edge_forms(const QuotientGraph& g,
                           const HarmonicRealization& phi);

struct AlbaneseStructure {
  Eigen::MatrixXd gram;       // G_ij = <<omega_i, omega_j>>, SPD
  Eigen::MatrixXd metric;     // g0 = G^{-1}
  double volume = 0.0;        // vol(Alb^Gamma) = det(G)^{-1/2}
  Eigen::MatrixXd embedding;  // lower-triangular A with A G A^T = I
};

// G_ij = sum over all directed edges of dPhi(e)_i dPhi(e)_j m-tilde(e)
//        - rho_i rho_j,  A = R^{-1} with G = R R^T (lower Cholesky); this
// reproduces the paper's Gram-Schmidt ordering (v1 proportional to omega_1).
AlbaneseStructure albanese_structure(const QuotientGraph& g,
                                     const InvariantMeasure& m,
                                     const HarmonicRealization& phi);

// sqrt(x^T g0 x) = |A x| for a Gamma-coordinate vector x.
double metric_norm(const AlbaneseStructure& S, const Eigen::VectorXd& x);

struct EpsilonFamily {
  QuotientGraph base;
  Eigen::VectorXd p0;  // m-symmetric part, per edge
  Eigen::VectorXd q;   // m-antisymmetric part, per edge
};

// p0(e) = (p(e) + p(ebar) m(t(e))/m(o(e)))/2, q(e) = p(e) - p0(e).
EpsilonFamily epsilon_family(const QuotientGraph& g, const InvariantMeasure& m);

// Graph with probabilities p_eps(e) = p0(e) + eps q(e); gamma_{p_eps} =
// eps gamma_p and the invariant measure stays m.
QuotientGraph family_member(const EpsilonFamily& F, double eps);

struct LatticeAnalysis {
  QuotientGraph graph;        // refined graph if refinement was needed
  RefinedQuotient refinement; // index 1 when no refinement was needed
  InvariantMeasure measure;
  HomologicalData homology;
  HarmonicRealization realization;
  Eigen::MatrixXd dphi;       // edge_forms of `graph`
  AlbaneseStructure albanese;
  int period_K = 1;
};

// Full pipeline: validate -> lifted period -> refinement (replacing the
// graph when the index exceeds 1) -> invariant measure -> homological data
// -> harmonic realization -> Albanese structure.
LatticeAnalysis analyze(const QuotientGraph& g, int search_depth = 0);

struct RealizationExport {
  // One row per emitted lattice point: vertex index (into analysis.graph),
  // lattice cell, and embedded coordinates A (Phi(v) + tau_cell).
  struct Point {
    int vertex;
    LatticeVector cell;
    Eigen::VectorXd coords;
  };
  std::vector<Point> points;
  std::vector<std::pair<int, int>> edges;  // row indices into points
};

// Emits all lattice translates with lo_k <= cell_k <= hi_k plus every edge
// connecting two emitted points.
RealizationExport export_realization(const LatticeAnalysis& A,
                                     const LatticeVector& lo,
                                     const LatticeVector& hi);

}  // namespace crystalwalk
