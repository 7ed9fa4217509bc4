// End-to-end acceptance checks.  Each criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails.
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crystalwalk/montecarlo.hpp"
#include "crystalwalk/perturbation.hpp"

using namespace crystalwalk;

namespace {

const double kPi = 3.14159265358979323846;

QuotientGraph hexagonal_nonsym() {
  return build_builtin(
      "hexagonal", {{"alpha", 0.4}, {"beta", 0.3}, {"gamma", 0.3},
                    {"alpha_p", 0.2}, {"beta_p", 0.4}, {"gamma_p", 0.4}});
}

QuotientGraph square_nonsym() {
  return build_builtin("square", {{"alpha", 0.3}, {"alpha_p", 0.2},
                                  {"beta", 0.35}, {"beta_p", 0.15}});
}

// Zero-drift non-symmetric triangular walk: alpha-check = beta-check =
// gamma-check = kappa, beta-hat = gamma-hat = (1 - alpha-hat)/2.
QuotientGraph triangular_ak(double ah, double kappa) {
  const double bh = (1.0 - ah) / 2;
  return build_builtin(
      "triangular",
      {{"alpha", (ah + kappa) / 2}, {"alpha_p", (ah - kappa) / 2},
       {"beta", (bh + kappa) / 2}, {"beta_p", (bh - kappa) / 2},
       {"gamma", (bh + kappa) / 2}, {"gamma_p", (bh - kappa) / 2}});
}

// Reference closed form; z1, z2 are Gamma-coordinates of Phi0(y) - Phi0(x).
// The kappa-linear coefficient is half the commonly printed one; the halved
// value is what exact transition probabilities reproduce.
double triangular_a1_closed(double ah, double kappa, double z1, double z2) {
  const double bh = (1.0 - ah) / 2, gh = bh;
  const double vol2 = 1.0 / (ah * bh + bh * gh + gh * ah);
  const double vol4 = vol2 * vol2;
  const double sym = (vol4 / 8) * (ah * (bh + gh) * (bh + gh) +
                                   bh * (gh + ah) * (gh + ah) +
                                   gh * (ah + bh) * (ah + bh));
  const double lin = vol4 / 2 * ((ah * bh - 2 * bh * gh + gh * ah) * z1 +
                                 (-ah * bh - bh * gh + 2 * gh * ah) * z2);
  const double quad = (3.0 / 8) * vol4 * (-1.0 + 5 * ah * bh * gh * vol2);
  return -1.0 + sym + lin * kappa + quad * kappa * kappa;
}

LatticeAnalysis raw_analysis(const QuotientGraph& g) {
  LatticeAnalysis A;
  A.graph = g;
  A.refinement.period_K = 1;
  A.refinement.quotient_period_K0 = 1;
  A.refinement.index = 1;
  A.refinement.refined_graph = g;
  A.refinement.partition_label.assign(g.vertex_count(), 0);
  A.measure = invariant_measure(g);
  A.homology = homological_data(g, A.measure);
  A.realization = modified_harmonic_realization(g, A.measure);
  A.dphi = edge_forms(g, A.realization);
  A.albanese = albanese_structure(g, A.measure, A.realization);
  A.period_K = 1;
  return A;
}

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
  void expect_near(double got, double want, double tol,
                   const std::string& what) {
    std::ostringstream os;
    os << what << " (got " << got << ", want " << want << " +/- " << tol
       << ")";
    expect(std::abs(got - want) <= tol, os.str());
  }
};

// ---------------------------------------------------------------- criterion 1
Check golden_geometry() {
  Check c;
  const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);

  auto geom = [](const QuotientGraph& g) {
    const auto m = invariant_measure(g);
    const auto phi = modified_harmonic_realization(g, m);
    return std::make_tuple(m, phi, albanese_structure(g, m, phi));
  };

  {
    const auto [m, phi, alb] = geom(build_builtin("square"));
    c.expect_near(alb.volume, 2.0, 1e-10, "square volume");
    const Eigen::Vector2d a = alb.embedding * Eigen::Vector2d(1, 0);
    const Eigen::Vector2d b = alb.embedding * Eigen::Vector2d(0, 1);
    c.expect((a - Eigen::Vector2d(s2, 0)).lpNorm<Eigen::Infinity>() < 1e-10 &&
                 (b - Eigen::Vector2d(0, s2)).lpNorm<Eigen::Infinity>() <
                     1e-10,
             "square embedded generators");
  }
  {
    const auto [m, phi, alb] = geom(build_builtin("triangular"));
    c.expect_near(alb.volume, std::sqrt(3.0), 1e-10, "triangular volume");
    const Eigen::Vector2d a = alb.embedding * Eigen::Vector2d(1, 0);
    const Eigen::Vector2d b = alb.embedding * Eigen::Vector2d(0, 1);
    c.expect(
        (a - Eigen::Vector2d(s6 / 2, s2 / 2)).lpNorm<Eigen::Infinity>() <
                1e-10 &&
            (b - Eigen::Vector2d(0, s2)).lpNorm<Eigen::Infinity>() < 1e-10,
        "triangular embedded generators");
  }
  {
    const auto [m, phi, alb] = geom(build_builtin("hexagonal"));
    c.expect_near(alb.volume, 3.0 * std::sqrt(3.0), 1e-10,
                  "hexagonal volume");
    const Eigen::Vector2d a = alb.embedding * Eigen::Vector2d(1, 0);
    const Eigen::Vector2d b = alb.embedding * Eigen::Vector2d(0, 1);
    const Eigen::Vector2d x2 =
        alb.embedding * phi.positions.row(1).transpose();
    c.expect((a - Eigen::Vector2d(3 * s2 / 2, s6 / 2))
                     .lpNorm<Eigen::Infinity>() < 1e-10 &&
                 (b - Eigen::Vector2d(0, s6)).lpNorm<Eigen::Infinity>() <
                     1e-10,
             "hexagonal embedded generators");
    c.expect((x2 - Eigen::Vector2d(-s2 / 2, -s6 / 2))
                 .lpNorm<Eigen::Infinity>() < 1e-10,
             "hexagonal second vertex");
    c.expect(std::abs(m.values(0) - 0.5) < 1e-10 &&
                 std::abs(m.values(1) - 0.5) < 1e-10,
             "hexagonal invariant measure");
  }

  // Parametric Gram sweeps.
  for (int k = 0; k < 5 && c.ok; ++k) {
    const double a = 0.1 + 0.04 * k, ap = 0.15 + 0.02 * k;
    const double b = 0.3 - 0.02 * k;
    const double bp = 1.0 - a - ap - b;
    const auto [m, phi, alb] = geom(build_builtin(
        "square",
        {{"alpha", a}, {"alpha_p", ap}, {"beta", b}, {"beta_p", bp}}));
    const double ah = a + ap, ac = a - ap, bh = b + bp, bc = b - bp;
    c.expect(std::abs(alb.gram(0, 0) - (ah - ac * ac)) < 1e-10 &&
                 std::abs(alb.gram(0, 1) + ac * bc) < 1e-10 &&
                 std::abs(alb.gram(1, 1) - (bh - bc * bc)) < 1e-10,
             "square Gram closed form");
  }
  for (int k = 0; k < 5 && c.ok; ++k) {
    const double a = 0.08 + 0.02 * k, b = 0.2 - 0.015 * k;
    const double g2 = 0.5 - a - b;
    const auto [m, phi, alb] = geom(build_builtin(
        "triangular", {{"alpha", a}, {"alpha_p", a}, {"beta", b},
                       {"beta_p", b}, {"gamma", g2}, {"gamma_p", g2}}));
    const double ah = 2 * a, bh = 2 * b, gh = 2 * g2;
    c.expect(std::abs(alb.gram(0, 0) - (ah + gh)) < 1e-10 &&
                 std::abs(alb.gram(0, 1) + gh) < 1e-10 &&
                 std::abs(alb.gram(1, 1) - (bh + gh)) < 1e-10,
             "triangular Gram closed form");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 2
Check periods_and_refinement() {
  Check c;
  {
    const RefinedQuotient R = refine_quotient(build_builtin("square"));
    c.expect(R.period_K == 2 && R.quotient_period_K0 == 1 && R.index == 2,
             "square K/K0/index");
    c.expect(R.sublattice_basis ==
                 std::vector<std::vector<std::int64_t>>{{1, 1}, {0, 2}},
             "square HNF");
  }
  {
    const QuotientGraph rotor = build_builtin(
        "triangular",
        {{"alpha", 1.0 / 3}, {"beta", 1.0 / 3}, {"gamma", 1.0 / 3},
         {"alpha_p", 0.0}, {"beta_p", 0.0}, {"gamma_p", 0.0}});
    const RefinedQuotient R = refine_quotient(rotor);
    c.expect(R.period_K == 3 && R.index == 3, "triangular rotor K/index");
  }
  {
    const RefinedQuotient R = refine_quotient(build_builtin("hexagonal"));
    c.expect(R.period_K == 2 && R.quotient_period_K0 == 2 && R.index == 1,
             "hexagonal K/K0/index");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 3
Check lclt_convergence() {
  Check c;
  const LatticeAnalysis sq = analyze(build_builtin("square"));
  const int origin = sq.realization.base_vertex;
  const LatticeState o{origin, {0, 0}};

  auto value = [&](int n) {
    const auto t = exact_transition(sq, origin, n);
    const auto it = t.mass.find({origin, {0, 0}});
    return 2.0 * kPi * n * (it == t.mass.end() ? 0.0 : it->second);
  };
  double prev = 1e9;
  for (int n : {16, 64, 200}) {
    const double dev = std::abs(value(n) - 4.0);
    c.expect(dev < prev, "square (2 pi n) p(n,0,0) approaches 4");
    prev = dev;
  }
  c.expect_near(value(200), 4.0 * (1.0 - 1.0 / 400.0), 0.002,
                "square value(200) vs Stirling");

  for (const char* name : {"square", "triangular", "hexagonal"}) {
    const LatticeAnalysis A = analyze(build_builtin(name));
    const LatticeState x{A.realization.base_vertex,
                         LatticeVector(A.graph.dim, 0)};
    const LatticeVector lo(A.graph.dim, -6), hi(A.graph.dim, 6);
    double p2 = 1e9;
    for (int n : {16, 64, 200}) {
      const int nk = n - (n % A.period_K);
      const double e = lclt_sup_error(A, nk, x, lo, hi);
      c.expect(e < p2, std::string(name) + " sup error decreasing");
      p2 = e;
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 4
Check a1_end_to_end() {
  Check c;
  {
    const LatticeAnalysis A = analyze(build_builtin("square"));
    const PerturbationData P = eigen_derivatives(A);
    const LatticeState o{A.realization.base_vertex, {0, 0}};
    const double ana = a1_analytic(A, P, o, o, 0);
    c.expect_near(ana, -0.5, 1e-8, "refined square analytic a1");
    const auto num = a1_numeric(A, o, o, {64, 256});
    c.expect_near(num.a1, ana, 0.02, "refined square numeric a1");
  }
  for (double ah : {0.3, 0.5, 0.7}) {
    for (double kappa : {0.0, 0.05, 0.1}) {
      const LatticeAnalysis A = analyze(triangular_ak(ah, kappa));
      const PerturbationData P = eigen_derivatives(A);
      for (const LatticeVector& cell :
           std::vector<LatticeVector>{{0, 0}, {1, 0}, {1, 1}}) {
        const LatticeState x{0, {0, 0}}, y{0, cell};
        c.expect_near(a1_analytic(A, P, x, y, 0),
                      triangular_a1_closed(ah, kappa, double(cell[0]),
                                           double(cell[1])),
                      1e-8, "triangular closed form");
      }
    }
  }
  {
    const LatticeAnalysis A = analyze(build_builtin("hexagonal"));
    const PerturbationData P = eigen_derivatives(A);
    const LatticeState o{A.realization.base_vertex, {0, 0}};
    const double ana = a1_analytic(A, P, o, o, 0);
    const auto num = a1_numeric(A, o, o, {40, 160});
    c.expect_near(num.a1, ana, 0.02, "hexagonal simple analytic vs numeric");
  }
  {
    const LatticeAnalysis A = analyze(hexagonal_nonsym());
    const PerturbationData P = eigen_derivatives(A);
    const LatticeState o{A.realization.base_vertex, {0, 0}};
    // rho = (0.1, -0.05); follow the drift with exact lattice endpoints.
    const std::vector<std::pair<int, LatticeState>> targets = {
        {40, {o.vertex, {4, -2}}}, {160, {o.vertex, {16, -8}}}};
    const double ana = a1_analytic(A, P, o, o, 0);
    const auto num = a1_numeric(A, o, targets);
    c.expect_near(num.a1, ana, 0.02,
                  "hexagonal non-symmetric analytic vs numeric");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 5
Check eigen_derivative_crosschecks() {
  Check c;
  for (const LatticeAnalysis& A :
       {analyze(square_nonsym()), analyze(triangular_ak(0.5, 0.2)),
        analyze(hexagonal_nonsym())}) {
    const PerturbationData P = eigen_derivatives(A);
    c.expect(
        (P.lam2 - 4 * kPi * kPi *
                      Eigen::MatrixXd::Identity(A.graph.dim, A.graph.dim))
                .lpNorm<Eigen::Infinity>() < 1e-10,
        "lambda'' = 4 pi^2 I");
    for (std::size_t i = 0; i < P.lam3.c.size(); ++i)
      c.expect(std::abs(P.lam3.c[i] - P.lam3_phi_route.c[i]) < 1e-9,
               "lambda^(3) route agreement");
  }
  const LatticeAnalysis A = analyze(hexagonal_nonsym());
  const PerturbationData P = eigen_derivatives(A);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd dir(2);
    dir << gauss(rng), gauss(rng);
    dir.normalize();
    const auto rep = fd_crosscheck(A, P, dir, 1e-2);
    const double caps[4] = {1e-2, 5e-2, 1.0, 20.0};
    for (int order = 0; order < 4; ++order) {
      c.expect(rep.err_h[order] < caps[order],
               "FD error magnitude, order " + std::to_string(order + 1));
      if (rep.err_h[order] > 1e-9)
        c.expect(rep.err_h2[order] < rep.err_h[order] / 2.0,
                 "FD O(h^2) scaling, order " + std::to_string(order + 1));
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 6
Check kernel_structure() {
  Check c;
  {
    const LatticeAnalysis A = analyze(hexagonal_nonsym());
    for (int n : {1, 8, 64})
      c.expect(std::abs(exact_transition(A, 0, n).total() - 1.0) <=
                   1e-12 * n,
               "mass conservation");
  }
  {
    const LatticeAnalysis A = analyze(build_builtin("square"));
    const int start = A.realization.base_vertex;
    const int l0 = A.refinement.partition_label[start];
    for (int n : {1, 3, 7}) {
      const auto t = exact_transition(A, start, n);
      for (const auto& [key, p] : t.mass)
        c.expect(A.refinement.partition_label[key.first] != l0 && p > 0,
                 "K-partition exact zeros");
    }
  }
  for (const QuotientGraph& g :
       {build_builtin("square"), build_builtin("triangular"),
        hexagonal_nonsym()}) {
    const LatticeAnalysis A = raw_analysis(g);
    const auto t1 = exact_transition(A, 0, 2);
    const auto t12 = exact_transition(A, 0, 4);
    std::vector<HeatKernelTable> from(g.vertex_count());
    for (int w = 0; w < g.vertex_count(); ++w)
      from[w] = exact_transition(A, w, 2);
    std::map<std::pair<int, LatticeVector>, double> conv;
    for (const auto& [k1, p1] : t1.mass)
      for (const auto& [k2, p2] : from[k1.first].mass) {
        LatticeVector cell = k1.second;
        for (int d = 0; d < g.dim; ++d) cell[d] += k2.second[d];
        conv[{k2.first, cell}] += p1 * p2;
      }
    for (const auto& [key, p] : t12.mass)
      c.expect(std::abs(conv[key] - p) < 1e-12, "Chapman-Kolmogorov");
  }
  {
    const LatticeAnalysis A = raw_analysis(hexagonal_nonsym());
    const int n = 8;
    const auto t = exact_transition(A, 0, n);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& [key, p] : t.mass)
      for (int k = 0; k < 2; ++k)
        mean(k) += p * (A.realization.positions(key.first, k) +
                        double(key.second[k]));
    const Eigen::Vector2d target =
        A.realization.positions.row(0).transpose() +
        double(n) * A.homology.asymptotic_direction;
    c.expect((mean - target).lpNorm<Eigen::Infinity>() < 1e-10,
             "exact drift identity");
  }
  {
    const LatticeAnalysis A = analyze(hexagonal_nonsym());
    const int start = A.realization.base_vertex;
    for (int n : {16, 64, 256}) {
      const auto t = exact_transition(A, start, n);
      double trace = 0;
      for (const auto& [key, p] : t.mass) {
        Eigen::Vector2d x;
        for (int k = 0; k < 2; ++k)
          x(k) = A.realization.positions(key.first, k) +
                 double(key.second[k]) -
                 double(n) * A.homology.asymptotic_direction(k);
        trace += p * (A.albanese.embedding * x).squaredNorm();
      }
      c.expect(std::abs(trace - 2.0 * n) < 2.0, "covariance trace near n d");
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 7
Check epsilon_family_checks() {
  Check c;
  const QuotientGraph g = hexagonal_nonsym();
  const auto m = invariant_measure(g);
  const EpsilonFamily F = epsilon_family(g, m);
  const auto h1 = homological_data(g, m);

  for (double eps : {0.0, 0.25, 0.5, 1.0}) {
    const QuotientGraph ge = family_member(F, eps);
    const auto he = homological_data(ge, invariant_measure(ge));
    c.expect((he.asymptotic_direction - eps * h1.asymptotic_direction)
                     .lpNorm<Eigen::Infinity>() < 1e-12,
             "gamma_{p_eps} = eps gamma_p");
  }
  for (int i = 0; i < g.edge_count(); ++i) {
    const auto& e = g.edges[i];
    c.expect(std::abs(F.p0(i) * m.values(e.from) -
                      F.p0(e.inverse) * m.values(e.to)) < 1e-12 &&
                 std::abs(F.q(i) * m.values(e.from) +
                          F.q(e.inverse) * m.values(e.to)) < 1e-12,
             "p0/q symmetry identities");
  }
  const auto metric_at = [&](double eps) {
    const QuotientGraph ge = family_member(F, eps);
    const auto me = invariant_measure(ge);
    const auto pe = modified_harmonic_realization(ge, me);
    return albanese_structure(ge, me, pe).metric;
  };
  const Eigen::Matrix2d g0 = metric_at(0.0);
  const Eigen::Matrix2d e1 = metric_at(1.0 / 128);
  const Eigen::Matrix2d e2 = metric_at(1.0 / 256);
  c.expect(((4.0 * e2 - e1) / 3.0 - g0).lpNorm<Eigen::Infinity>() < 1e-3,
           "metric continuity, extrapolated error");

  for (const char* name : {"square", "triangular", "hexagonal"}) {
    const QuotientGraph gb = std::string(name) == "hexagonal"
                                 ? hexagonal_nonsym()
                                 : build_builtin(name);
    const auto mb = invariant_measure(gb);
    const EpsilonFamily Fb = epsilon_family(gb, mb);
    const QuotientGraph gb0 = family_member(Fb, 0.0);
    const auto phi0 = modified_harmonic_realization(gb0, mb);
    const Eigen::MatrixXd d0 = edge_forms(gb0, phi0);
    double min_mt = 1e9;
    for (int i = 0; i < gb0.edge_count(); ++i)
      if (Fb.p0(i) > 0)
        min_mt = std::min(min_mt, Fb.p0(i) * mb.values(gb0.edges[i].from));
    const double bound =
        2.0 / std::sqrt(min_mt) * d0.cwiseAbs().maxCoeff();
    for (double eps : {0.0625, 0.125, 0.25}) {
      const auto pe = modified_harmonic_realization(family_member(Fb, eps),
                                                    mb);
      const Eigen::MatrixXd de = edge_forms(family_member(Fb, eps), pe);
      c.expect(de.cwiseAbs().maxCoeff() <= bound + 1e-12,
               std::string("realization bound on ") + name);
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 8
Check monte_carlo_clt() {
  Check c;
  const int n = 256, paths = 100000;
  {
    const LatticeAnalysis A = analyze(build_builtin("square"));
    const auto S =
        sample_paths(A, n, {0.5, 1.0}, paths, 20240817, CltMode::first_kind);
    c.expect(clt_report(S, A).pass, "first-kind 5 sigma moments");
  }
  {
    const LatticeAnalysis A = analyze(hexagonal_nonsym());
    const auto S =
        sample_paths(A, n, {1.0}, paths, 20240818, CltMode::second_kind);
    c.expect(clt_report(S, A).pass, "second-kind 5 sigma moments");
  }
  {
    // Fourth-moment increment bound with a stable constant as n doubles.
    const LatticeAnalysis A = analyze(build_builtin("square"));
    auto fitted_c = [&](int nn) {
      const std::vector<double> ts = {0.25, 0.5, 0.75, 1.0};
      const auto S =
          sample_paths(A, nn, ts, 20000, 515, CltMode::first_kind);
      double cmax = 0;
      for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
          const Eigen::MatrixXd D =
              S.scaled_points[j] - S.scaled_points[i];
          double m4 = 0;
          for (int p = 0; p < D.rows(); ++p)
            m4 += std::pow(D.row(p).squaredNorm(), 2);
          m4 /= D.rows();
          const double dt = ts[j] - ts[i];
          cmax = std::max(cmax, m4 / (dt * dt));
        }
      return cmax;
    };
    const double c128 = fitted_c(128), c256 = fitted_c(256);
    c.expect(c128 < 20.0 && c256 < 20.0 && c256 < 2.0 * c128 &&
                 c128 < 2.0 * c256,
             "fourth-moment constant stable");
  }
  {
    // Endpoint chi^2 against the exact kernel at n = 16, 1% level.
    const LatticeAnalysis A = analyze(build_builtin("square"));
    const int n16 = 16, np = 50000;
    const auto S =
        sample_paths(A, n16, {1.0}, np, 999, CltMode::first_kind);
    const auto exact = exact_transition(A, A.realization.base_vertex, n16);
    double chi2 = 0, pooled_exp = 0;
    std::int64_t pooled_obs = 0;
    int dof = 0;
    for (const auto& [key, p] : exact.mass) {
      const double expd = p * np;
      const auto it = S.endpoint_counts.find(key);
      const double obs = it == S.endpoint_counts.end()
                             ? 0.0
                             : double(it->second);
      if (expd < 5.0) {
        pooled_exp += expd;
        pooled_obs += static_cast<std::int64_t>(obs);
      } else {
        chi2 += (obs - expd) * (obs - expd) / expd;
        ++dof;
      }
    }
    if (pooled_exp > 0) {
      chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) /
              pooled_exp;
      ++dof;
    }
    dof -= 1;  // totals agree by construction
    const boost::math::chi_squared dist(dof);
    const double cutoff = boost::math::quantile(dist, 0.99);
    std::ostringstream os;
    os << "endpoint chi^2 = " << chi2 << " vs 99% cutoff " << cutoff
       << " (dof " << dof << ")";
    c.expect(chi2 < cutoff, os.str());
  }
  return c;
}

// ---------------------------------------------------------------- criterion 9
Check ergodic_rate() {
  Check c;
  for (const QuotientGraph& g :
       {hexagonal_nonsym(), refine_quotient(build_builtin("square"))
                                .refined_graph}) {
    const auto m = invariant_measure(g);
    Eigen::VectorXd f(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) f(v) = 1.0 + 2.0 * v;
    const double target = f.dot(m.values);
    for (int N = 16; N <= 1024; N *= 2) {
      const double scaled =
          N * std::abs(ergodic_average(g, f, 0, N) - target);
      c.expect(scaled < 10.0, "N-scaled ergodic error bounded at N = " +
                                  std::to_string(N));
    }
  }
  return c;
}

}  // namespace

int main() {
  struct Item {
    const char* label;
    std::function<Check()> fn;
  };
  const std::vector<Item> items = {
      {"criterion 1 (golden geometry)", golden_geometry},
      {"criterion 2 (period & refinement)", periods_and_refinement},
      {"criterion 3 (local CLT convergence)", lclt_convergence},
      {"criterion 4 (a1 end-to-end)", a1_end_to_end},
      {"criterion 5 (eigen-derivative cross-checks)",
       eigen_derivative_crosschecks},
      {"criterion 6 (exact-kernel structure)", kernel_structure},
      {"criterion 7 (epsilon family)", epsilon_family_checks},
      {"criterion 8 (Monte Carlo CLTs)", monte_carlo_clt},
      {"criterion 9 (ergodic rate)", ergodic_rate},
  };
  int failures = 0;
  for (const auto& item : items) {
    Check c;
    try {
      c = item.fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (c.ok) {
      std::printf("%s: PASS\n", item.label);
    } else {
      std::printf("%s: FAIL — %s\n", item.label, c.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
