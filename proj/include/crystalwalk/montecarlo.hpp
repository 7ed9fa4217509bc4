// Seeded path sampling on the crystal lattice and statistical checks of the
// CLT of the first kind (scaled, drift-centered walk -> Brownian motion of
// the Albanese metric) and of the second kind (the epsilon-family walk with
// eps = n^{-1/2} -> Brownian motion with drift rho).
#pragma once

#include <cstdint>
#include <map>

#include "crystalwalk/albanese.hpp"

namespace crystalwalk {

enum class CltMode { first_kind, second_kind };

struct PathStatistics {
  int n = 0;
  std::vector<double> t_values;
  int n_paths = 0;
  std::uint64_t seed = 0;
  CltMode mode = CltMode::first_kind;
  // Per time value: n_paths x d matrix of scaled sample points in the
  // orthonormal frame (first kind: centered X; second kind: Y in the
  // eps = 0 frame).  Row p of every matrix belongs to the same path.
  std::vector<Eigen::MatrixXd> scaled_points;
  // Endpoint states (vertex, translation) at the largest t, for exact-DP
  // comparisons.
  std::map<std::pair<int, LatticeVector>, std::int64_t> endpoint_counts;
};

// Simulates n_paths trajectories of [n * max(t)] steps.  Per-path RNG
// streams are derived deterministically from (seed, path index), so results
// are independent of scheduling.
PathStatistics sample_paths(const LatticeAnalysis& A, int n,
                            const std::vector<double>& t_values, int n_paths,
                            std::uint64_t seed, CltMode mode);

struct MCReport {
  std::vector<Eigen::VectorXd> empirical_mean;   // per t
  std::vector<Eigen::MatrixXd> empirical_cov;    // per t
  std::vector<Eigen::VectorXd> expected_mean;    // per t
  std::vector<Eigen::MatrixXd> expected_cov;     // per t
  std::vector<Eigen::VectorXd> mean_margin;      // 5 sigma, per entry
  std::vector<Eigen::MatrixXd> cov_margin;
  bool pass = false;
};

// Compares empirical moments against the limit law: mean 0 (first kind) or
// t * embedded rho (second kind), covariance t * I; margins are five
// standard errors per entry.
MCReport clt_report(const PathStatistics& S, const LatticeAnalysis& A);

}  // namespace crystalwalk
