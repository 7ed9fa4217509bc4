#include "crystalwalk/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace crystalwalk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-vertex cumulative distribution over outgoing edges.
struct Sampler {
  std::vector<std::vector<double>> cum;
  std::vector<std::vector<int>> edge;

  explicit Sampler(const QuotientGraph& g) {
    cum.resize(g.vertex_count());
    edge.resize(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) {
      double acc = 0;
      for (int ei : g.out_edges[v]) {
        if (g.edges[ei].p <= 0) continue;
        acc += g.edges[ei].p;
        cum[v].push_back(acc);
        edge[v].push_back(ei);
      }
      if (!cum[v].empty()) cum[v].back() = 1.0 + 1e-15;
    }
  }

  int draw(int v, double u) const {
    const auto& c = cum[v];
    const auto it = std::lower_bound(c.begin(), c.end(), u);
    return edge[v][std::min<std::size_t>(it - c.begin(), c.size() - 1)];
  }
};

}  // namespace

PathStatistics sample_paths(const LatticeAnalysis& A, int n,
                            const std::vector<double>& t_values, int n_paths,
                            std::uint64_t seed, CltMode mode) {
  if (n < 4) throw Error("sample_paths: n must be >= 4");
  const int d = A.graph.dim;

  // Walk graph and position map depend on the mode.
  QuotientGraph walk_graph = A.graph;
  Eigen::MatrixXd positions = A.realization.positions;
  Eigen::MatrixXd embed = A.albanese.embedding;
  Eigen::VectorXd drift = A.homology.asymptotic_direction;  // Gamma-coords
  const double eps = 1.0 / std::sqrt(double(n));
  if (mode == CltMode::second_kind) {
    const EpsilonFamily F = epsilon_family(A.graph, A.measure);
    walk_graph = family_member(F, eps);
    positions =
        modified_harmonic_realization(walk_graph, A.measure).positions;
    const QuotientGraph g0 = family_member(F, 0.0);
    const auto phi0 = modified_harmonic_realization(g0, A.measure);
    embed = albanese_structure(g0, A.measure, phi0).embedding;
  }
  const Sampler sampler(walk_graph);

  PathStatistics S;
  S.n = n;
  S.t_values = t_values;
  S.n_paths = n_paths;
  S.seed = seed;
  S.mode = mode;
  std::vector<int> steps;
  int max_steps = 0;
  for (double t : t_values) {
    steps.push_back(static_cast<int>(n * t));
    max_steps = std::max(max_steps, steps.back());
  }
  S.scaled_points.assign(t_values.size(), Eigen::MatrixXd::Zero(n_paths, d));

  const double scale = 1.0 / std::sqrt(double(n));
  const int base = A.realization.base_vertex;
  for (int p = 0; p < n_paths; ++p) {
    std::mt19937_64 rng(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL *
                                           (std::uint64_t(p) + 1))));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int v = base;
    LatticeVector tau(d, 0);
    int next_record = 0;
    for (int k = 0; k <= max_steps; ++k) {
      while (next_record < static_cast<int>(steps.size()) &&
             steps[next_record] == k) {
        Eigen::VectorXd xi(d);
        for (int c = 0; c < d; ++c) xi(c) = positions(v, c) + double(tau[c]);
        if (mode == CltMode::first_kind) xi -= double(k) * drift;
        S.scaled_points[next_record].row(p) = (scale * (embed * xi)).transpose();
        ++next_record;
      }
      if (k == max_steps) break;
      const int ei = sampler.draw(v, unif(rng));
      const auto& e = walk_graph.edges[ei];
      for (int c = 0; c < d; ++c) tau[c] += e.translation[c];
      v = e.to;
    }
    ++S.endpoint_counts[{v, tau}];
  }
  return S;
}

MCReport clt_report(const PathStatistics& S, const LatticeAnalysis& A) {
  const int d = A.graph.dim;
  MCReport R;
  R.pass = true;
  const Eigen::VectorXd drift_embedded =
      A.albanese.embedding * A.homology.asymptotic_direction;
  for (std::size_t ti = 0; ti < S.t_values.size(); ++ti) {
    const double t = S.t_values[ti];
    const Eigen::MatrixXd& X = S.scaled_points[ti];
    const int np = S.n_paths;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    if (np > 0) {
      mean = X.colwise().mean().transpose();
      const Eigen::MatrixXd C = X.rowwise() - mean.transpose();
      cov = C.transpose() * C / double(std::max(np - 1, 1));
    }
    R.empirical_mean.push_back(mean);
    R.empirical_cov.push_back(cov);
    // Limit law: the second-kind drift is t * rho in the eps = 0 frame;
    // at eps = 0 that frame coincides with the original Albanese frame up
    // to O(eps^2), so the original embedding is used for the target.
    Eigen::VectorXd em = (S.mode == CltMode::second_kind)
                             ? Eigen::VectorXd(t * drift_embedded)
                             : Eigen::VectorXd(Eigen::VectorXd::Zero(d));
    Eigen::MatrixXd ec = t * Eigen::MatrixXd::Identity(d, d);
    R.expected_mean.push_back(em);
    R.expected_cov.push_back(ec);

    Eigen::VectorXd mm(d);
    Eigen::MatrixXd cm(d, d);
    for (int i = 0; i < d; ++i) {
      mm(i) = 5.0 * std::sqrt(std::max(cov(i, i), 1e-300) / std::max(np, 1));
      for (int j = 0; j < d; ++j)
        cm(i, j) = 5.0 * std::sqrt((cov(i, i) * cov(j, j) +
                                    cov(i, j) * cov(i, j)) /
                                   std::max(np, 1));
    }
    R.mean_margin.push_back(mm);
    R.cov_margin.push_back(cm);
    if (np > 0) {
      for (int i = 0; i < d; ++i) {
        if (std::abs(mean(i) - em(i)) > mm(i)) R.pass = false;
        for (int j = 0; j < d; ++j)
          if (std::abs(cov(i, j) - ec(i, j)) > cm(i, j)) R.pass = false;
      }
    }
  }
  return R;
}

}  // namespace crystalwalk
