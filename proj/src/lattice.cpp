#include "crystalwalk/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace crystalwalk {

namespace {

constexpr double kRowSumTol = 1e-12;

// Formats a double with 17 significant digits (lossless for binary64).
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_probability(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      double num = 0, den = 0;
      try {
        num = std::stod(s.substr(0, slash));
        den = std::stod(s.substr(slash + 1));
      } catch (const std::exception&) {
        throw Error("bad rational probability '" + s + "' at " + where);
      }
      if (den == 0) throw Error("zero denominator in probability at " + where);
      return num / den;
    }
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw Error("bad probability '" + s + "' at " + where);
    }
  }
  throw Error("probability must be a number or \"a/b\" string at " + where);
}

}  // namespace

int QuotientGraph::vertex_index(const std::string& id) const {
  for (int i = 0; i < vertex_count(); ++i)
    if (vertices[i] == id) return i;
  throw Error("unknown vertex id '" + id + "'");
}

void QuotientGraph::rebuild_out_edges() {
  out_edges.assign(vertices.size(), {});
  for (int ei = 0; ei < edge_count(); ++ei) {
    const auto& e = edges[ei];
    if (e.from < 0 || e.from >= vertex_count())
      throw Error("edge '" + e.id + "' has out-of-range origin");
    out_edges[e.from].push_back(ei);
  }
}

namespace {

struct EdgeSpec {
  const char* id;
  const char* from;
  const char* to;
  std::vector<std::int64_t> tau;
  const char* param;      // probability key of the edge
  const char* param_rev;  // probability key of its inverse
};

QuotientGraph assemble(int dim, std::vector<std::string> vertices,
                       const std::vector<EdgeSpec>& half_edges,
                       const std::map<std::string, double>& params) {
  QuotientGraph g;
  g.dim = dim;
  g.vertices = std::move(vertices);
  // Each spec contributes the edge and its inverse ("<id>'").
  for (const auto& s : half_edges) {
    QuotientEdge e;
    e.id = s.id;
    e.from = g.vertex_index(s.from);
    e.to = g.vertex_index(s.to);
    e.translation = s.tau;
    e.p = params.at(s.param);
    QuotientEdge r;
    r.id = std::string(s.id) + "'";
    r.from = e.to;
    r.to = e.from;
    for (auto c : s.tau) r.translation.push_back(-c);
    r.p = params.at(s.param_rev);
    e.inverse = g.edge_count() + 1;
    r.inverse = g.edge_count();
    g.edges.push_back(std::move(e));
    g.edges.push_back(std::move(r));
  }
  g.rebuild_out_edges();
  return g;
}

std::map<std::string, double> fill_params(
    const std::map<std::string, double>& given,
    const std::map<std::string, double>& defaults) {
  std::map<std::string, double> out = defaults;
  for (const auto& [k, v] : given) {
    if (!out.count(k)) throw Error("unknown parameter '" + k + "'");
    if (v < 0) throw Error("negative parameter '" + k + "'");
    out[k] = v;
  }
  return out;
}

void check_normalization(const std::vector<std::pair<std::string, double>>& sums) {
  for (const auto& [label, s] : sums)
    if (std::abs(s - 1.0) > kRowSumTol)
      throw Error("normalization violated: " + label + " = " +
                  format_double(s) + ", expected 1");
}

}  // namespace

QuotientGraph build_builtin(const std::string& name,
                            const std::map<std::string, double>& params) {
  if (name == "square") {
    auto p = fill_params(params, {{"alpha", 0.25},
                                  {"alpha_p", 0.25},
                                  {"beta", 0.25},
                                  {"beta_p", 0.25}});
    check_normalization({{"alpha+alpha'+beta+beta'",
                          p["alpha"] + p["alpha_p"] + p["beta"] + p["beta_p"]}});
    return assemble(2, {"x1"},
                    {{"e1", "x1", "x1", {1, 0}, "alpha", "alpha_p"},
                     {"e2", "x1", "x1", {0, 1}, "beta", "beta_p"}},
                    p);
  }
  if (name == "triangular") {
    auto p = fill_params(params, {{"alpha", 1.0 / 6},
                                  {"alpha_p", 1.0 / 6},
                                  {"beta", 1.0 / 6},
                                  {"beta_p", 1.0 / 6},
                                  {"gamma", 1.0 / 6},
                                  {"gamma_p", 1.0 / 6}});
    check_normalization(
        {{"alpha^+beta^+gamma^", p["alpha"] + p["alpha_p"] + p["beta"] +
                                     p["beta_p"] + p["gamma"] + p["gamma_p"]}});
    // Paper convention: e2 carries beta' and its inverse carries beta.
    return assemble(2, {"x1"},
                    {{"e1", "x1", "x1", {1, 0}, "alpha", "alpha_p"},
                     {"e2", "x1", "x1", {0, 1}, "beta_p", "beta"},
                     {"e3", "x1", "x1", {-1, 1}, "gamma", "gamma_p"}},
                    p);
  }
  if (name == "hexagonal") {
    auto p = fill_params(params, {{"alpha", 1.0 / 3},
                                  {"alpha_p", 1.0 / 3},
                                  {"beta", 1.0 / 3},
                                  {"beta_p", 1.0 / 3},
                                  {"gamma", 1.0 / 3},
                                  {"gamma_p", 1.0 / 3}});
    check_normalization(
        {{"alpha+beta+gamma", p["alpha"] + p["beta"] + p["gamma"]},
         {"alpha'+beta'+gamma'", p["alpha_p"] + p["beta_p"] + p["gamma_p"]}});
    return assemble(2, {"x1", "x2"},
                    {{"e1", "x1", "x2", {1, 0}, "alpha", "alpha_p"},
                     {"e2", "x1", "x2", {0, 0}, "beta", "beta_p"},
                     {"e3", "x1", "x2", {0, 1}, "gamma", "gamma_p"}},
                    p);
  }
  throw Error("unknown builtin lattice '" + name + "'");
}

namespace {

// Strongly-connected check of the positive-probability support digraph,
// via forward+backward reachability from vertex 0.
bool support_strongly_connected(const QuotientGraph& g) {
  const int n = g.vertex_count();
  auto reach = [&](bool backward) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& e : g.edges) {
        if (e.p <= 0) continue;
        int a = backward ? e.to : e.from, b = backward ? e.from : e.to;
        if (a == v && !seen[b]) {
          seen[b] = 1;
          q.push(b);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
  };
  return reach(false) && reach(true);
}

bool undirected_connected(const QuotientGraph& g) {
  const int n = g.vertex_count();
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (const auto& e : g.edges) {
      if (e.from == v && !seen[e.to]) {
        seen[e.to] = 1;
        q.push(e.to);
      }
      if (e.to == v && !seen[e.from]) {
        seen[e.from] = 1;
        q.push(e.from);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
}

}  // namespace

std::vector<std::string> validate(const QuotientGraph& g) {
  std::vector<std::string> issues;
  auto add = [&](std::string m) { issues.push_back(std::move(m)); };

  if (g.dim < 1) add("dim must be >= 1");
  if (g.vertices.empty()) add("graph has no vertices");
  if (!issues.empty()) return issues;

  for (int ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edges[ei];
    if (static_cast<int>(e.translation.size()) != g.dim)
      add("edge '" + e.id + "': translation length != dim");
    if (e.from < 0 || e.from >= g.vertex_count() || e.to < 0 ||
        e.to >= g.vertex_count())
      add("edge '" + e.id + "': endpoint out of range");
    if (e.p < 0 || e.p > 1)
      add("edge '" + e.id + "': probability outside [0,1]");
    if (e.inverse < 0 || e.inverse >= g.edge_count()) {
      add("edge '" + e.id + "': dangling inverse reference");
      continue;
    }
    if (e.inverse == ei) {
      add("edge '" + e.id + "': self-inverse edges are unsupported");
      continue;
    }
    const auto& r = g.edges[e.inverse];
    if (r.inverse != ei)
      add("edge '" + e.id + "': inverse pairing is not an involution");
    if (r.from != e.to || r.to != e.from)
      add("edge '" + e.id + "': inverse endpoints not mirrored");
    if (static_cast<int>(r.translation.size()) == g.dim &&
        static_cast<int>(e.translation.size()) == g.dim)
      for (int k = 0; k < g.dim; ++k)
        if (r.translation[k] != -e.translation[k]) {
          add("edge '" + e.id + "': translation(inverse) != -translation");
          break;
        }
    if (ei < e.inverse && e.p + r.p <= 0)
      add("p(e)+p(e-bar)>0 violated at " + e.id);
  }
  if (!issues.empty()) return issues;

  for (int v = 0; v < g.vertex_count(); ++v) {
    double s = 0;
    if (v < static_cast<int>(g.out_edges.size()))
      for (int ei : g.out_edges[v]) s += g.edges[ei].p;
    if (std::abs(s - 1.0) > kRowSumTol)
      add("row sum at vertex '" + g.vertices[v] + "' is " + format_double(s));
  }
  if (!undirected_connected(g)) add("undirected support graph is disconnected");
  if (!support_strongly_connected(g)) add("quotient walk is not irreducible");
  return issues;
}

void require_valid(const QuotientGraph& g) {
  auto issues = validate(g);
  if (issues.empty()) return;
  std::string msg = "invalid quotient graph:";
  for (const auto& s : issues) msg += "\n  - " + s;
  throw Error(msg);
}

QuotientGraph load_graph(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("JSON parse error: ") + e.what());
  }
  QuotientGraph g;
  try {
    g.dim = doc.at("dim").get<int>();
    g.vertices = doc.at("vertices").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad document header: ") + e.what());
  }
  if (g.dim < 1) throw Error("dim must be a positive integer");
  if (g.vertices.empty()) throw Error("vertex list must be nonempty");
  std::map<std::string, int> edge_index;
  const auto& edges = doc.at("edges");
  for (const auto& je : edges) {
    QuotientEdge e;
    try {
      e.id = je.at("id").get<std::string>();
      e.from = g.vertex_index(je.at("from").get<std::string>());
      e.to = g.vertex_index(je.at("to").get<std::string>());
      e.translation = je.at("translation").get<LatticeVector>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(std::string("bad edge record: ") + ex.what());
    }
    if (static_cast<int>(e.translation.size()) != g.dim)
      throw Error("edge '" + e.id + "': translation has length " +
                  std::to_string(e.translation.size()) + ", dim is " +
                  std::to_string(g.dim));
    e.p = parse_probability(je.at("p"), "edge '" + e.id + "'");
    if (edge_index.count(e.id)) throw Error("duplicate edge id '" + e.id + "'");
    edge_index[e.id] = g.edge_count();
    g.edges.push_back(std::move(e));
  }
  // Second pass: resolve inverse ids now that all edges are indexed.
  int i = 0;
  for (const auto& je : edges) {
    const std::string inv = je.at("inverse").get<std::string>();
    auto it = edge_index.find(inv);
    if (it == edge_index.end())
      throw Error("edge '" + g.edges[i].id + "': dangling inverse reference '" +
                  inv + "'");
    g.edges[i].inverse = it->second;
    ++i;
  }
  g.rebuild_out_edges();
  return g;
}

std::string save_graph(const QuotientGraph& g) {
  nlohmann::json doc;
  doc["dim"] = g.dim;
  doc["vertices"] = g.vertices;
  auto& edges = doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    nlohmann::json je;
    je["id"] = e.id;
    je["from"] = g.vertices[e.from];
    je["to"] = g.vertices[e.to];
    je["translation"] = e.translation;
    // Stored as a raw 17-digit decimal so the round trip is exact.
    je["p"] = e.p;
    je["inverse"] = g.edges[e.inverse].id;
    edges.push_back(std::move(je));
  }
  return doc.dump(2);
}

QuotientGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_graph(ss.str());
}

void save_graph_file(const QuotientGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << save_graph(g) << '\n';
}

}  // namespace crystalwalk
