// Spectral side of the quotient walk: Perron-Frobenius invariant measure,
// transition-operator application, ergodic averages, period computation on
// the quotient and on the lifted lattice, period-preserving quotient
// refinement, and the twisted transition operators H_omega.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "crystalwalk/lattice.hpp"

namespace crystalwalk {

struct InvariantMeasure {
  Eigen::VectorXd values;  // m, indexed by vertex; positive, sums to 1
  double residual = 0.0;   // ||tL m - m||_inf
};

// Unique positive normalized solution of tL m = m, where
// tL f(x) = sum_{e in E_x} p(ebar) f(t(e)).  Solved by direct elimination
// with one row replaced by the normalization sum(m) = 1.
InvariantMeasure invariant_measure(const QuotientGraph& g);

// Lf(x) = sum_{e in E_x} p(e) f(t(e)); with transpose set, tL as above.
Eigen::VectorXd apply_transition(const QuotientGraph& g,
                                 const Eigen::VectorXd& f,
                                 bool transpose = false);

// (1/N) sum_{j=0}^{N-1} (L^j f)(x).
double ergodic_average(const QuotientGraph& g, const Eigen::VectorXd& f, int x,
                       int N);

// gcd of lengths of positive-probability closed walks in the finite
// quotient (the period K0), computed exactly by label propagation.
int quotient_period(const QuotientGraph& g);

// Period K of the lifted walk on X: gcd of return times n <= 2*search_depth
// of the state (base vertex, zero translation), found by support DP over
// lifted states confined to the box ||tau||_inf <= search_depth * max|tau(e)|.
// search_depth <= 0 selects the default max(32, 4*|V0|).
// Throws Error("no return found ...") if no closed lifted walk shows up.
int lifted_period(const QuotientGraph& g, int search_depth = 0);

struct RefinedQuotient {
  int period_K = 1;           // period of the lifted walk
  int quotient_period_K0 = 1; // period of the original quotient walk
  // Basis of the sublattice Gamma_1 as rows of a row-style upper-triangular
  // Hermite normal form with positive diagonal.  Identity when no
  // refinement is needed.
  std::vector<std::vector<std::int64_t>> sublattice_basis;
  std::int64_t index = 1;     // [Gamma : Gamma_1] = prod of HNF diagonal
  std::vector<LatticeVector> coset_reps;
  QuotientGraph refined_graph;           // equals input graph when index == 1
  std::vector<int> partition_label;      // vertex of refined_graph -> {0..K-1}
};

// Finds the finite-index sublattice Gamma_1 whose quotient walk has the
// same period K as the lifted walk, together with the refined quotient
// graph on V0 x (Z^d / Gamma_1) and its K-partition labels.  Translations
// of the refined graph are expressed in the Gamma_1 basis.
RefinedQuotient refine_quotient(const QuotientGraph& g, int search_depth = 0);

struct IrreducibilityReport {
  bool quotient_irreducible = false;
  bool lifted_heuristic_pass = false;  // heuristic only, see radius
  int radius = 0;
  std::string detail;
};

// Exact irreducibility verdict on the finite quotient plus a heuristic
// reachability check of the lifted walk over the box ||tau||_inf <= radius.
IrreducibilityReport check_irreducibility(const QuotientGraph& g, int radius);

// Twisted transition operator H_omega as a |V0| x |V0| complex matrix:
// M[x][y] = sum over edges x->y of p(e) exp(2 pi i <omega, dphi(e)>).
// dphi holds one row per edge (the 1-form dPhi(e) in Gamma-coordinates,
// from the albanese module); omega is a covector in the Gamma-dual basis.
Eigen::MatrixXcd twisted_operator(const QuotientGraph& g,
                                  const Eigen::MatrixXd& dphi,
                                  const Eigen::VectorXd& omega);

struct PerronEigendata {
  std::complex<double> mu;  // eigenvalue branch through mu0(0) = 1
  Eigen::VectorXcd right;   // phi, <phi,phi> = 1, largest entry real positive
  Eigen::VectorXcd left;    // psi, <phi,psi> = 1
};

// Eigenvalue of H_omega continuously connected to 1 at omega = 0, tracked
// by continuation along a straight segment in 8 steps.  Throws Error on
// branch ambiguity (two eigenvalues within 1e-8 of the tracked branch).
PerronEigendata perron_eigendata(const QuotientGraph& g,
                                 const Eigen::MatrixXd& dphi,
                                 const Eigen::VectorXd& omega);

}  // namespace crystalwalk
