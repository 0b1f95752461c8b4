#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "knotint/errors.hpp"
#include "knotint/rational.hpp"

namespace knotint {

enum class Variant { closed, knot };
enum class BasisFilter { none, connected, prime };

// An edge between 1-based vertices, stored with a < b ("oriented from the
// lower to the higher end-point").
struct Edge {
  int a = 0, b = 0;
};
inline bool operator==(const Edge& l, const Edge& r) { return l.a == r.a && l.b == r.b; }
inline bool operator<(const Edge& l, const Edge& r) {
  return l.a != r.a ? l.a < r.a : l.b < r.b;
}

// Closed diagram: numbered vertices 1..n_vertices, parallel edges allowed,
// self-loops forbidden in stored graphs.
struct LabeledGraph {
  int n_vertices = 0;
  std::vector<Edge> edges;
};

// Knot diagram: external vertices 1..n_ext in cyclic order along the
// distinguished loop, internal vertices n_ext+1..n_ext+n_int.  The loop arcs
// between cyclically consecutive external vertices are implicit; internal_edges
// lists the rest.
struct KnotGraph {
  int n_ext = 0;
  int n_int = 0;
  std::vector<Edge> internal_edges;
};

inline int total_vertices(const KnotGraph& g) { return g.n_ext + g.n_int; }

struct ValidationReport {
  bool vertex_range_ok = true;
  bool has_self_loop = false;
  bool trivalent = false;
  bool connected = false;
  std::vector<int> valence;  // index 0 unused
  std::string note;
  bool ok() const { return vertex_range_ok && !has_self_loop && trivalent && connected; }
};

struct SignedGraph {
  int sign = 1;
  bool is_zero = false;  // contraction produced a self-loop
  Variant variant = Variant::closed;
  LabeledGraph closed;
  KnotGraph knot;
};

// Result of reducing a knot graph modulo the cyclic-rotation relabeling (with
// signs) and the doubled-internal-edge relation.
struct NormalForm {
  KnotGraph rep;
  int sign = 1;
  bool is_zero = false;
};

// Formal rational combination of graphs, keyed by canonical_key.  All terms
// share one variant and one total vertex count.
struct GraphSum {
  struct Term {
    Variant variant = Variant::closed;
    LabeledGraph closed;
    KnotGraph knot;
    Rational coeff;
  };

  std::optional<Variant> variant;
  std::map<std::string, Term> terms;

  bool empty() const { return terms.empty(); }
  // Inserts with coefficient accumulation; drops zero terms.  Knot graphs are
  // reduced to rotation normal form first.  Throws MixedVariant when variant or
  // vertex count disagrees with existing terms.
  void add(const LabeledGraph& g, const Rational& c);
  void add(const KnotGraph& g, const Rational& c);
  GraphSum scaled(const Rational& c) const;
};

std::string canonical_key(const LabeledGraph& g);
std::string canonical_key(const KnotGraph& g);

ValidationReport validate_graph(const LabeledGraph& g);
ValidationReport validate_graph(const KnotGraph& g);

bool is_trivalent(const LabeledGraph& g);
bool is_trivalent(const KnotGraph& g);
bool is_connected(const LabeledGraph& g);
// Connectivity of the knot graph including its loop arcs.
bool is_connected(const KnotGraph& g);
// True iff the graph stays connected after deleting any two loop arcs.
bool is_prime(const KnotGraph& g);

Rational ord(const LabeledGraph& g);  // n/2; NotTrivalent otherwise
Rational ord(const KnotGraph& g);     // (n_ext+n_int)/2

// Number of contractible-edge slots preceding internal_edges in the knot
// variant's edge indexing: indices 0..arc_count-1 are the loop arcs
// (1,2),...,(n_ext,1); internal edges follow.  n_ext == 1 exposes the single
// degenerate self-arc (never contractible), n_ext == 0 has no arcs.
int arc_count(const KnotGraph& g);

// Contract one edge: identify endpoints i<j into i, shift labels above j down,
// sign (-1)^j times (-1) for every remaining edge whose stored orientation
// flips under the relabeling.  is_zero when a parallel edge becomes a
// self-loop.  Knot variant: edge_index addresses arcs then internal edges;
// chords (internal edges with two external end-points) and the degenerate
// n_ext==1 self-arc throw InvalidEdge.
SignedGraph contract_edge(const LabeledGraph& g, int edge_index);
SignedGraph contract_edge(const KnotGraph& g, int edge_index);

// Cyclic-rotation normal form with accumulated signs; is_zero when the class
// is ambivalent (G = -G under some rotation) or an internal edge is doubled.
NormalForm rotation_normal_form(const KnotGraph& g);

// Linear extension of signed single-edge contractions.  Knot variant skips
// chords and reduces outputs to normal form.
GraphSum delta(const GraphSum& v);
GraphSum delta_term(const LabeledGraph& g, const Rational& c);
GraphSum delta_term(const KnotGraph& g, const Rational& c);

struct GraphList {
  Variant variant = Variant::closed;
  std::vector<LabeledGraph> closed;
  std::vector<KnotGraph> knot;
  size_t size() const { return variant == Variant::closed ? closed.size() : knot.size(); }
};

// All distinct trivalent graphs with the given counts, deterministic order
// (knot variant: splits by descending n_ext unless n_int pins one split).
// Throws SizeLimit above kEnumerationVertexLimit vertices.
constexpr int kEnumerationVertexLimit = 8;
GraphList enumerate_trivalent(int n, Variant variant, std::optional<int> n_int = std::nullopt);

// Exact basis of ker(delta) on the span of the enumerated graphs at total
// vertex count n, restricted by the filter (prime applies to the knot variant;
// for closed it falls back to connected).  Knot graphs enter via their
// rotation normal forms.  Basis vectors are normalized so the first nonzero
// coefficient (in enumeration order) equals 1.
std::vector<GraphSum> cocycle_basis(int n, Variant variant, BasisFilter filter);

}  // namespace knotint
