// Quotient-graph data model for random walks on crystal lattices.
//
// A crystal lattice X is an abelian covering graph of a finite quotient
// X0 = Gamma\X with covering group Gamma ~ Z^d.  We represent X implicitly:
// the finite quotient graph stores, per directed edge, an integer translation
// label tau(e) in Z^d and a transition probability p(e).  Every directed edge
// is listed explicitly together with its inverse (tau(ebar) = -tau(e)); the
// walk may be non-symmetric, i.e. p(e) != p(ebar) in general.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace crystalwalk {

// Coordinates of a group element in a fixed basis sigma_1..sigma_d of
// Gamma ~ Z^d.
using LatticeVector = std::vector<std::int64_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuotientEdge {
  std::string id;
  int from = -1;  // index into QuotientGraph::vertices (o(e))
  int to = -1;    // index into QuotientGraph::vertices (t(e))
  LatticeVector translation;
  double p = 0.0;
  int inverse = -1;  // index into QuotientGraph::edges (ebar)
};

struct QuotientGraph {
  int dim = 0;
  std::vector<std::string> vertices;
  std::vector<QuotientEdge> edges;
  std::vector<std::vector<int>> out_edges;  // per vertex, outgoing edge indices

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  // Index of a vertex id; throws Error if absent.
  int vertex_index(const std::string& id) const;

  // Recomputes out_edges from the edge list.
  void rebuild_out_edges();
};

// Builds one of the paper's worked examples.  Parameter keys:
//   square:     alpha, alpha_p, beta, beta_p          (sum = 1)
//   triangular: alpha..gamma_p (six values, sum = 1)
//   hexagonal:  alpha..gamma_p (alpha+beta+gamma = 1 and
//               alpha_p+beta_p+gamma_p = 1 separately)
// Missing keys default to the simple (uniform) walk; unknown keys are
// rejected.  Throws Error on negative parameters or broken normalization.
QuotientGraph build_builtin(const std::string& name,
                            const std::map<std::string, double>& params = {});

// Checks every structural invariant (inverse pairing, translation
// antisymmetry, row sums, p(e)+p(ebar) > 0, connectivity, quotient
// irreducibility).  Returns one message per violation; empty means valid.
std::vector<std::string> validate(const QuotientGraph& g);

// Throws Error listing all violations unless validate(g) is empty.
void require_valid(const QuotientGraph& g);

// JSON document I/O.  Format:
//   {"dim": d, "vertices": ["a", ...],
//    "edges": [{"id", "from", "to", "translation": [..],
//               "p": number or "a/b", "inverse"}, ...]}
// save_graph emits probabilities as decimals with 17 significant digits, so
// load(save(g)) round-trips exactly.
QuotientGraph load_graph(const std::string& json_text);
std::string save_graph(const QuotientGraph& g);
QuotientGraph load_graph_file(const std::string& path);
void save_graph_file(const QuotientGraph& g, const std::string& path);

}  // namespace crystalwalk
