// Exact n-step transition probabilities on the infinite lattice by dense
// dynamic programming over (vertex, translation) states, the Gaussian
// leading term of the local CLT, LCLT ratios, and numeric estimation of the
// first correction coefficient a1.
#pragma once

#include <map>

#include "crystalwalk/albanese.hpp"

namespace crystalwalk {

// A point of the lattice X: vertex of the (possibly refined) quotient plus
// a translation cell in Gamma-coordinates of analysis.graph.
struct LatticeState {
  int vertex = 0;
  LatticeVector cell;
};

struct HeatKernelTable {
  int n = 0;
  int start = 0;
  // (vertex, cell) -> probability; only nonzero entries are stored.
  std::map<std::pair<int, LatticeVector>, double> mass;

  double total() const;
};

// Exact distribution of the walk after n steps started at (start, 0),
// obtained by n sparse convolution sweeps.  Throws Error when the DP box
// would exceed cell_cap states.
HeatKernelTable exact_transition(const LatticeAnalysis& A, int start, int n,
                                 std::size_t cell_cap = 100000000);

// Leading LCLT factor
//   K vol(Alb) m(y) (2 pi n)^{-d/2} exp(-|Phi(y)+tau_y-Phi(x)-tau_x-n rho|^2_{g0} / 2n)
// when n is in the admissible residue class mod K, else 0.
double gaussian_leading(const LatticeAnalysis& A, int n, const LatticeState& x,
                        const LatticeState& y);

// U_n = p(n,x,y) / gaussian_leading.  Throws Error in forbidden classes.
double lclt_ratio(const LatticeAnalysis& A, int n, const LatticeState& x,
                  const LatticeState& y);

// sup over y with lo <= tau_y <= hi (all vertices) of
// |(2 pi n)^{d/2} p(n,x,y) m(y)^{-1} - K vol exp(-|z|^2/2n)|, where
// y in a residue class forbidden at step n contributes 0.
double lclt_sup_error(const LatticeAnalysis& A, int n, const LatticeState& x,
                      const LatticeVector& lo, const LatticeVector& hi);

struct A1NumericResult {
  double a1 = 0.0;
  double fit_residual = 0.0;
  bool ill_conditioned = false;
};

// Extrapolates f(n) = n (U_n - 1) under the model a1 + c n^{-1/2}:
// Richardson value 2 f(n_max) - f(n_max/4) when n_max/4 is supplied, else a
// least-squares fit on (1, n^{-1/2}).  Each target pairs a step count with
// the endpoint used for U_n (so callers can follow the drift when
// rho != 0).  All step counts must share one admissible residue class.
A1NumericResult a1_numeric(
    const LatticeAnalysis& A, const LatticeState& x,
    const std::vector<std::pair<int, LatticeState>>& targets);

// Convenience overload with a fixed endpoint (symmetric walks).
A1NumericResult a1_numeric(const LatticeAnalysis& A, const LatticeState& x,
                           const LatticeState& y,
                           const std::vector<int>& n_list);

}  // namespace crystalwalk
