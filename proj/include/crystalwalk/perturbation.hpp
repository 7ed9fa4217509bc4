// Eigenvalue/eigenfunction derivatives of the twisted transition operator
// at omega = 0, the symmetric q-tensors built from them, and the analytic
// first correction coefficient a1 of the local CLT, plus finite-difference
// cross-checks against the numeric Perron root.
//
// All computations here use the Albanese-orthonormal 1-forms
// omega_i(e) := (A dPhi(e))_i, so that the quadratic form lambda'' equals
// 4 pi^2 |u|^2 and the z-components of a1 are Euclidean coordinates.
#pragma once

#include "crystalwalk/heat_kernel.hpp"

namespace crystalwalk {

// Dense symmetric rank-3 / rank-4 coefficient tables, d <= 8.
struct SymTensor3 {
  int d = 0;
  std::vector<double> c;  // d^3 entries, fully symmetric
  double& at(int i, int j, int k) { return c[(i * d + j) * d + k]; }
  double at(int i, int j, int k) const { return c[(i * d + j) * d + k]; }
  double eval(const Eigen::VectorXd& u) const;
  void symmetrize();
};

struct SymTensor4 {
  int d = 0;
  std::vector<double> c;  // d^4 entries, fully symmetric
  double& at(int i, int j, int k, int l) {
    return c[((i * d + j) * d + k) * d + l];
  }
  double at(int i, int j, int k, int l) const {
    return c[((i * d + j) * d + k) * d + l];
  }
  double eval(const Eigen::VectorXd& u) const;
  void symmetrize();
};

struct PerturbationData {
  // psi0' = 2 pi i |V0|^{1/2} sum_i r_i(x) u_i; psi1(x, i) stores r_i(x).
  Eigen::MatrixXd psi1;
  // phi0''(x)(u) = sum_{ij} phi2[x](i,j) u_i u_j (real); likewise psi2.
  std::vector<Eigen::MatrixXd> phi2;
  std::vector<Eigen::MatrixXd> psi2;
  // lambda''(u) = u^T lam2 u (= 4 pi^2 I in the orthonormal frame).
  Eigen::MatrixXd lam2;
  // lambda^(3)(u) = i * lam3(u) with lam3 real; both assembly routes.
  SymTensor3 lam3;            // psi-route (the one consumed downstream)
  SymTensor3 lam3_phi_route;  // phi-route, kept for the agreement check
  // lambda^(4)(u) = lam4(u), real (psi-route).
  SymTensor4 lam4;
  double solve_residual = 0.0;  // worst linear-system residual
};

// Solves the singular-consistent systems of the eigenfunction derivatives
// (with their side-condition pins) and assembles the lambda-derivative
// coefficient tables.
PerturbationData eigen_derivatives(const LatticeAnalysis& A);

struct QTensors {
  Eigen::VectorXd q1;   // depends on pi(y)
  Eigen::MatrixXd q2;   // depends on pi(x), pi(y)
  SymTensor3 q3;
  SymTensor4 q4;
};

// Extracts the symmetric q-tensors for source class pi(x) = x0 and target
// class pi(y) = y0.
QTensors q_tensors(const LatticeAnalysis& A, const PerturbationData& P,
                   int x0, int y0);

// Analytic a1(pi(x), pi(y), gamma_p; z) with
// z = A_embed (Phi(y)+tau_y - Phi(x)-tau_x - n rho) in orthonormal coords.
double a1_analytic(const LatticeAnalysis& A, const PerturbationData& P,
                   const LatticeState& x, const LatticeState& y, int n);

struct FdCrosscheckReport {
  // Absolute errors |FD - analytic| per derivative order 1..4, at step h
  // and at h/2.
  double err_h[4] = {0, 0, 0, 0};
  double err_h2[4] = {0, 0, 0, 0};
};

// Central finite differences of lambda(t) = -log mu0(t * A^T u) at t = 0
// (u an orthonormal-frame unit direction) against the polynomial
// evaluations lambda', ..., lambda^(4).
FdCrosscheckReport fd_crosscheck(const LatticeAnalysis& A,
                                 const PerturbationData& P,
                                 const Eigen::VectorXd& direction, double h);

}  // namespace crystalwalk
