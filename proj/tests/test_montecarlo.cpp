#include <doctest.h>

#include <cmath>

#include "crystalwalk/montecarlo.hpp"

using namespace crystalwalk;

namespace {

QuotientGraph hexagonal_nonsym() {
  return build_builtin(
      "hexagonal", {{"alpha", 0.4}, {"beta", 0.3}, {"gamma", 0.3},
                    {"alpha_p", 0.2}, {"beta_p", 0.4}, {"gamma_p", 0.4}});
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("seed determinism") {
  const LatticeAnalysis A = analyze(build_builtin("square"));
  const auto S1 = sample_paths(A, 32, {0.5, 1.0}, 500, 42,
                               CltMode::first_kind);
  const auto S2 = sample_paths(A, 32, {0.5, 1.0}, 500, 42,
                               CltMode::first_kind);
  for (std::size_t i = 0; i < S1.scaled_points.size(); ++i)
    CHECK(S1.scaled_points[i] == S2.scaled_points[i]);  // bit identical
  CHECK(S1.endpoint_counts == S2.endpoint_counts);
  const auto S3 = sample_paths(A, 32, {0.5, 1.0}, 500, 43,
                               CltMode::first_kind);
  CHECK(S1.endpoint_counts != S3.endpoint_counts);
}

TEST_CASE("edge cases") {
  const LatticeAnalysis A = analyze(build_builtin("square"));
  SUBCASE("no paths") {
    const auto S = sample_paths(A, 16, {1.0}, 0, 1, CltMode::first_kind);
    CHECK(S.scaled_points[0].rows() == 0);
  }
  SUBCASE("time zero is the origin") {
    const auto S = sample_paths(A, 16, {0.0}, 50, 1, CltMode::first_kind);
    CHECK(S.scaled_points[0].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("first-kind moments match the Wiener limit") {
  const LatticeAnalysis A = analyze(build_builtin("square"));
  const auto S =
      sample_paths(A, 64, {0.5, 1.0}, 20000, 2024, CltMode::first_kind);
  const auto R = clt_report(S, A);
  CHECK(R.pass);
  CHECK(R.expected_mean[0].lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((R.expected_cov[1] - Eigen::Matrix2d::Identity())
            .lpNorm<Eigen::Infinity>() < 1e-15);

  // Independent increments: Cov(X_1 - X_0.5) is about 0.5 I.
  const Eigen::MatrixXd D = S.scaled_points[1] - S.scaled_points[0];
  const Eigen::RowVectorXd mu = D.colwise().mean();
  const Eigen::MatrixXd C0 = D.rowwise() - mu;
  const Eigen::MatrixXd cov = C0.transpose() * C0 / double(D.rows() - 1);
  CHECK((cov - 0.5 * Eigen::Matrix2d::Identity()).lpNorm<Eigen::Infinity>() <
        0.03);

  // Fourth-moment tightness echo: E |X_t - X_s|^4 <= C (t - s)^2.
  double m4 = 0;
  for (int p = 0; p < D.rows(); ++p) m4 += std::pow(D.row(p).squaredNorm(), 2);
  m4 /= D.rows();
  CHECK(m4 / 0.25 < 15.0);  // 2-d Gaussian limit value is 8
}

TEST_CASE("second-kind moments carry the drift") {
  const LatticeAnalysis A = analyze(hexagonal_nonsym());
  const auto S = sample_paths(A, 64, {1.0}, 20000, 7, CltMode::second_kind);
  const auto R = clt_report(S, A);
  CHECK(R.pass);
  const Eigen::VectorXd drift =
      A.albanese.embedding * A.homology.asymptotic_direction;
  CHECK((R.expected_mean[0] - drift).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK((R.empirical_mean[0] - drift).lpNorm<Eigen::Infinity>() < 0.05);
}

TEST_CASE("first-kind empirical mean vanishes for non-symmetric walks") {
  const LatticeAnalysis A = analyze(hexagonal_nonsym());
  const auto S = sample_paths(A, 64, {1.0}, 20000, 11, CltMode::first_kind);
  const auto R = clt_report(S, A);
  CHECK(R.pass);
  CHECK(R.expected_mean[0].lpNorm<Eigen::Infinity>() == 0.0);
}

}  // TEST_SUITE
