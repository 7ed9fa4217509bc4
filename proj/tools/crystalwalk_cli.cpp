// Command-line front end: analyze, realize, heat, lclt, a1, clt, validate.
// Reports are machine-readable (schema "crystalwalk/1") and embed the
// configuration, library version and wall time.
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "crystalwalk/heat_kernel.hpp"
#include "crystalwalk/montecarlo.hpp"
#include "crystalwalk/perturbation.hpp"

namespace cw = crystalwalk;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kSchema = "crystalwalk/1";

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitComputation = 2;
// CLI11 reports usage errors itself; we map them to 64 below.

struct CommonOpts {
  std::string lattice;
  std::string params_csv;
  std::string input;
  std::string output;
  int depth = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  auto* lat = cmd->add_option("--lattice", o.lattice,
                              "builtin lattice: square|triangular|hexagonal");
  auto* in = cmd->add_option("--input", o.input, "quotient-graph JSON file");
  lat->excludes(in);
  cmd->add_option("--params", o.params_csv,
                  "builtin parameters, e.g. alpha=0.25,alpha_p=0.25,...");
  cmd->add_option("--output", o.output, "report file (default: stdout)");
  cmd->add_option("--depth", o.depth, "lifted-period search depth (0 = auto)");
}

std::map<std::string, double> parse_params(const std::string& csv) {
  std::map<std::string, double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw cw::Error("bad --params entry '" + item + "' (want key=value)");
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return out;
}

cw::QuotientGraph load_input(const CommonOpts& o) {
  if (!o.input.empty()) return cw::load_graph_file(o.input);
  if (!o.lattice.empty())
    return cw::build_builtin(o.lattice, parse_params(o.params_csv));
  throw cw::Error("one of --lattice or --input is required");
}

json config_json(const CommonOpts& o, const std::string& command) {
  json c;
  c["command"] = command;
  if (!o.lattice.empty()) c["lattice"] = o.lattice;
  if (!o.params_csv.empty()) c["params"] = o.params_csv;
  if (!o.input.empty()) c["input"] = o.input;
  if (o.depth) c["depth"] = o.depth;
  return c;
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream f(o.output);
    if (!f) throw cw::Error("cannot write '" + o.output + "'");
    f << text << '\n';
  }
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json r = json::array();
  for (int i = 0; i < v.size(); ++i) r.push_back(v(i));
  return r;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

json report_header(const CommonOpts& o, const std::string& command,
                   const Stopwatch& sw) {
  json r;
  r["schema"] = kSchema;
  r["version"] = kVersion;
  r["config"] = config_json(o, command);
  r["walltime_s"] = sw.seconds();
  return r;
}

json analysis_json(const cw::LatticeAnalysis& A) {
  json j;
  j["period_K"] = A.period_K;
  j["quotient_period_K0"] = A.refinement.quotient_period_K0;
  j["refinement_index"] = A.refinement.index;
  j["hnf"] = A.refinement.sublattice_basis;
  j["invariant_measure"] = vector_json(A.measure.values);
  j["asymptotic_direction"] = vector_json(A.homology.asymptotic_direction);
  j["positions"] = matrix_json(A.realization.positions);
  j["gram"] = matrix_json(A.albanese.gram);
  j["metric"] = matrix_json(A.albanese.metric);
  j["embedding"] = matrix_json(A.albanese.embedding);
  j["volume"] = A.albanese.volume;
  j["vertices"] = A.graph.vertices;
  j["graph"] = json::parse(cw::save_graph(A.graph));
  return j;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::string cell_string(const cw::LatticeVector& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += " ";
    s += std::to_string(c[i]);
  }
  return s + "]";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crystalwalk: discrete geometric analysis of random walks on "
               "crystal lattices"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* c_analyze = app.add_subcommand("analyze", "full geometry pipeline");
  add_common(c_analyze, o);

  auto* c_validate = app.add_subcommand("validate", "check graph invariants");
  add_common(c_validate, o);

  auto* c_realize =
      app.add_subcommand("realize", "export the embedded realization as CSV");
  add_common(c_realize, o);
  int window_r = 1;
  c_realize->add_option("--window", window_r,
                        "cell window radius: cells in [-r, r]^d");

  auto* c_heat = app.add_subcommand("heat", "exact n-step distribution (CSV)");
  add_common(c_heat, o);
  int heat_n = 8;
  std::string start_vertex;
  c_heat->add_option("--n", heat_n, "number of steps");
  c_heat->add_option("--start", start_vertex, "start vertex id");

  auto* c_lclt = app.add_subcommand("lclt", "LCLT ratio/sup-error series");
  add_common(c_lclt, o);
  std::string lclt_ns = "16,64,200";
  int lclt_window = 8;
  c_lclt->add_option("--n-list", lclt_ns, "step counts (comma separated)");
  c_lclt->add_option("--window", lclt_window, "sup-error window radius");

  auto* c_a1 = app.add_subcommand("a1", "LCLT correction coefficient");
  add_common(c_a1, o);
  std::string a1_mode = "both", a1_ns = "32,128,512", a1_cell;
  c_a1->add_option("--mode", a1_mode, "analytic|numeric|both");
  c_a1->add_option("--n-list", a1_ns, "step counts for the numeric estimate");
  c_a1->add_option("--cell", a1_cell,
                   "target displacement cell, e.g. 1,0 (default: origin)");

  auto* c_clt = app.add_subcommand("clt", "Monte Carlo CLT verification");
  add_common(c_clt, o);
  std::string clt_mode = "first", clt_ts = "1";
  int clt_n = 256, clt_paths = 10000;
  std::uint64_t clt_seed = 12345;
  std::string samples_csv;
  c_clt->add_option("--mode", clt_mode, "first|second");
  c_clt->add_option("--n", clt_n, "scaling parameter");
  c_clt->add_option("--t", clt_ts, "time values (comma separated)");
  c_clt->add_option("--paths", clt_paths, "sample count");
  c_clt->add_option("--seed", clt_seed, "RNG seed");
  c_clt->add_option("--samples-csv", samples_csv,
                    "optional per-sample CSV dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  Stopwatch sw;
  try {
    if (*c_validate) {
      const cw::QuotientGraph g = load_input(o);
      const auto issues = cw::validate(g);
      json rep = report_header(o, "validate", sw);
      rep["issues"] = issues;
      rep["valid"] = issues.empty();
      emit(o, rep.dump(2));
      return issues.empty() ? kExitOk : kExitValidation;
    }

    if (*c_analyze) {
      const cw::LatticeAnalysis A = cw::analyze(load_input(o), o.depth);
      json rep = report_header(o, "analyze", sw);
      rep["analysis"] = analysis_json(A);
      rep["walltime_s"] = sw.seconds();
      emit(o, rep.dump(2));
      return kExitOk;
    }

    if (*c_realize) {
      const cw::LatticeAnalysis A = cw::analyze(load_input(o), o.depth);
      const cw::LatticeVector lo(A.graph.dim, -window_r),
          hi(A.graph.dim, window_r);
      const auto ex = cw::export_realization(A, lo, hi);
      std::ostringstream pts;
      pts << "vertex,cell";
      const char axis[] = {'x', 'y', 'z'};
      for (int k = 0; k < A.graph.dim; ++k) {
        pts << ',';
        if (k < 3)
          pts << axis[k];
        else
          pts << 'c' << k;
      }
      pts << '\n';
      pts.precision(17);
      for (const auto& p : ex.points) {
        pts << A.graph.vertices[p.vertex] << ',' << cell_string(p.cell);
        for (int k = 0; k < p.coords.size(); ++k) pts << ',' << p.coords(k);
        pts << '\n';
      }
      std::ostringstream edges;
      edges << "from_row,to_row\n";
      for (const auto& [a, b] : ex.edges) edges << a << ',' << b << '\n';
      if (o.output.empty()) {
        std::cout << pts.str() << edges.str();
      } else {
        std::ofstream f(o.output);
        f << pts.str();
        std::ofstream g(o.output + ".edges.csv");
        g << edges.str();
      }
      return kExitOk;
    }

    if (*c_heat) {
      const cw::LatticeAnalysis A = cw::analyze(load_input(o), o.depth);
      const int start =
          start_vertex.empty() ? 0 : A.graph.vertex_index(start_vertex);
      const auto table = cw::exact_transition(A, start, heat_n);
      std::ostringstream csv;
      csv.precision(17);
      csv << "vertex,cell,p\n";
      for (const auto& [key, p] : table.mass)
        csv << A.graph.vertices[key.first] << ',' << cell_string(key.second)
            << ',' << p << '\n';
      emit(o, csv.str());
      return kExitOk;
    }

    if (*c_lclt) {
      const cw::LatticeAnalysis A = cw::analyze(load_input(o), o.depth);
      const cw::LatticeState origin{0, cw::LatticeVector(A.graph.dim, 0)};
      std::ostringstream csv;
      csv.precision(17);
      csv << "n,U_n,sup_error\n";
      const cw::LatticeVector lo(A.graph.dim, -lclt_window),
          hi(A.graph.dim, lclt_window);
      for (int n : parse_int_list(lclt_ns)) {
        const int nk = n - (n % A.period_K);  // snap to the admissible class
        const double u = cw::lclt_ratio(A, nk, origin, origin);
        const double s = cw::lclt_sup_error(A, nk, origin, lo, hi);
        csv << nk << ',' << u << ',' << s << '\n';
      }
      emit(o, csv.str());
      return kExitOk;
    }

    if (*c_a1) {
      const cw::LatticeAnalysis A = cw::analyze(load_input(o), o.depth);
      cw::LatticeState x{0, cw::LatticeVector(A.graph.dim, 0)};
      cw::LatticeState y = x;
      if (!a1_cell.empty()) {
        const auto cells = parse_int_list(a1_cell);
        if (static_cast<int>(cells.size()) != A.graph.dim)
          throw cw::Error("--cell length must equal dim");
        for (int k = 0; k < A.graph.dim; ++k) y.cell[k] = cells[k];
      }
      json rep = report_header(o, "a1", sw);
      auto ns = parse_int_list(a1_ns);
      const int K = A.period_K;
      for (int& n : ns) n -= n % K;  // snap to the admissible class
      const int n_ref = ns.empty() ? K : ns.back();
      if (a1_mode == "analytic" || a1_mode == "both") {
        const auto P = cw::eigen_derivatives(A);
        rep["a1_analytic"] = cw::a1_analytic(A, P, x, y, n_ref);
        rep["solve_residual"] = P.solve_residual;
      }
      if (a1_mode == "numeric" || a1_mode == "both") {
        const auto r = cw::a1_numeric(A, x, y, ns);
        rep["a1_numeric"] = r.a1;
        rep["fit_residual"] = r.fit_residual;
        rep["ill_conditioned"] = r.ill_conditioned;
      }
      json coords;
      coords["x"] = {{"vertex", A.graph.vertices[x.vertex]},
                     {"cell", x.cell}};
      coords["y"] = {{"vertex", A.graph.vertices[y.vertex]},
                     {"cell", y.cell}};
      rep["coordinates"] = coords;
      rep["walltime_s"] = sw.seconds();
      emit(o, rep.dump(2));
      return kExitOk;
    }

    if (*c_clt) {
      const cw::LatticeAnalysis A = cw::analyze(load_input(o), o.depth);
      std::vector<double> ts;
      {
        std::stringstream ss(clt_ts);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) ts.push_back(std::stod(item));
      }
      const cw::CltMode mode = clt_mode == "second"
                                   ? cw::CltMode::second_kind
                                   : cw::CltMode::first_kind;
      const auto S = cw::sample_paths(A, clt_n, ts, clt_paths, clt_seed, mode);
      const auto R = cw::clt_report(S, A);
      json rep = report_header(o, "clt", sw);
      rep["mode"] = clt_mode;
      rep["n"] = clt_n;
      rep["paths"] = clt_paths;
      rep["seed"] = clt_seed;
      json per_t = json::array();
      for (std::size_t i = 0; i < ts.size(); ++i) {
        json jt;
        jt["t"] = ts[i];
        jt["empirical_mean"] = vector_json(R.empirical_mean[i]);
        jt["empirical_cov"] = matrix_json(R.empirical_cov[i]);
        jt["expected_mean"] = vector_json(R.expected_mean[i]);
        jt["expected_cov"] = matrix_json(R.expected_cov[i]);
        jt["mean_margin_5sigma"] = vector_json(R.mean_margin[i]);
        jt["cov_margin_5sigma"] = matrix_json(R.cov_margin[i]);
        per_t.push_back(std::move(jt));
      }
      rep["per_t"] = per_t;
      rep["margin_note"] =
          "5 sigma per entry; no multiple-testing correction beyond the "
          "Bonferroni-style slack built into the margin";
      rep["pass"] = R.pass;
      if (!samples_csv.empty()) {
        std::ofstream f(samples_csv);
        f.precision(17);
        f << "t,path";
        for (int k = 0; k < A.graph.dim; ++k) f << ",c" << k;
        f << '\n';
        for (std::size_t i = 0; i < ts.size(); ++i)
          for (int p = 0; p < S.n_paths; ++p) {
            f << ts[i] << ',' << p;
            for (int k = 0; k < A.graph.dim; ++k)
              f << ',' << S.scaled_points[i](p, k);
            f << '\n';
          }
      }
      rep["walltime_s"] = sw.seconds();
      emit(o, rep.dump(2));
      return R.pass ? kExitOk : kExitValidation;
    }
  } catch (const cw::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    // Structural/validation problems exit 1; numeric failures exit 2.
    const std::string msg = e.what();
    if (msg.find("invalid quotient graph") != std::string::npos ||
        msg.find("normalization violated") != std::string::npos)
      return kExitValidation;
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitOk;
}
