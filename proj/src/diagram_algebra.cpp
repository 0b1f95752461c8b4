#include "knotint/diagram_algebra.hpp"

#include <algorithm>
#include <functional>

namespace knotint {

namespace {

std::string edge_multiset_key(std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end());
  std::string out;
  size_t i = 0;
  while (i < edges.size()) {
    size_t j = i;
    while (j < edges.size() && edges[j] == edges[i]) ++j;
    out += "(" + std::to_string(edges[i].a) + "," + std::to_string(edges[i].b) + ")";
    if (j - i > 1) out += "x" + std::to_string(j - i);
    i = j;
  }
  return out;
}

std::vector<int> valence_table(int n, const std::vector<Edge>& edges, bool& range_ok,
                               bool& self_loop) {
  std::vector<int> val(n + 1, 0);
  range_ok = true;
  self_loop = false;
  for (const Edge& e : edges) {
    if (e.a < 1 || e.b < 1 || e.a > n || e.b > n) {
      range_ok = false;
      continue;
    }
    if (e.a == e.b) self_loop = true;
    val[e.a]++;
    val[e.b]++;
  }
  return val;
}

bool connected_from(int n, const std::vector<std::vector<int>>& adj) {
  if (n <= 1) return true;
  std::vector<char> seen(n + 1, 0);
  std::vector<int> stack{1};
  seen[1] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
        ++count;
      }
  }
  return count == n;
}

std::vector<Edge> knot_loop_arcs(const KnotGraph& g) {
  std::vector<Edge> arcs;
  if (g.n_ext >= 2) {
    for (int k = 1; k < g.n_ext; ++k) arcs.push_back({k, k + 1});
    arcs.push_back({g.n_ext, 1});  // wrap arc, oriented n_ext -> 1
  } else if (g.n_ext == 1) {
    arcs.push_back({1, 1});  // degenerate self-arc, never contractible
  }
  return arcs;
}

bool knot_connected_without_arcs(const KnotGraph& g, int skip_a, int skip_b) {
  int n = total_vertices(g);
  if (n == 0) return true;
  if (g.n_ext == 0 && g.n_int > 0) return false;  // loop disjoint from the rest
  std::vector<std::vector<int>> adj(n + 1);
  std::vector<Edge> arcs = knot_loop_arcs(g);
  for (int i = 0; i < static_cast<int>(arcs.size()); ++i) {
    if (i == skip_a || i == skip_b) continue;
    if (arcs[i].a == arcs[i].b) continue;
    adj[arcs[i].a].push_back(arcs[i].b);
    adj[arcs[i].b].push_back(arcs[i].a);
  }
  for (const Edge& e : g.internal_edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  return connected_from(n, adj);
}

// Shared contraction core: merge j into i (i < j), shift labels above j down,
// track (-1)^j and one -1 per surviving edge whose stored order flips.
// Returns false when a self-loop appears.
bool contract_core(const std::vector<Edge>& edges, int skip_index, int i, int j, int& sign,
                   std::vector<Edge>& out) {
  auto relabel = [i, j](int v) { return v == j ? i : (v > j ? v - 1 : v); };
  out.clear();
  for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
    if (k == skip_index) continue;
    int a = relabel(edges[k].a);
    int b = relabel(edges[k].b);
    if (a == b) return false;
    if (a > b) {
      std::swap(a, b);
      sign = -sign;
    }
    out.push_back({a, b});
  }
  std::sort(out.begin(), out.end());
  return true;
}

}  // namespace

std::string canonical_key(const LabeledGraph& g) {
  return "C|" + std::to_string(g.n_vertices) + "|" + edge_multiset_key(g.edges);
}

std::string canonical_key(const KnotGraph& g) {
  return "K|" + std::to_string(g.n_ext) + "," + std::to_string(g.n_int) + "|" +
         edge_multiset_key(g.internal_edges);
}

ValidationReport validate_graph(const LabeledGraph& g) {
  ValidationReport r;
  r.valence = valence_table(g.n_vertices, g.edges, r.vertex_range_ok, r.has_self_loop);
  r.trivalent = r.vertex_range_ok;
  for (int v = 1; v <= g.n_vertices; ++v)
    if (r.valence[v] != 3) r.trivalent = false;
  if (r.vertex_range_ok) {
    std::vector<std::vector<int>> adj(g.n_vertices + 1);
    for (const Edge& e : g.edges)
      if (e.a != e.b) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
      }
    r.connected = connected_from(g.n_vertices, adj);
  }
  if (!r.trivalent) r.note = "not trivalent";
  if (r.has_self_loop) r.note = "self-loop present";
  return r;
}

ValidationReport validate_graph(const KnotGraph& g) {
  ValidationReport r;
  int n = total_vertices(g);
  r.valence = valence_table(n, g.internal_edges, r.vertex_range_ok, r.has_self_loop);
  // Trivalence: one internal-edge endpoint per external vertex (the two loop
  // arcs supply the rest), three per internal vertex.
  r.trivalent = r.vertex_range_ok;
  for (int v = 1; v <= g.n_ext; ++v)
    if (r.valence[v] != 1) r.trivalent = false;
  for (int v = g.n_ext + 1; v <= n; ++v)
    if (r.valence[v] != 3) r.trivalent = false;
  if (r.vertex_range_ok) r.connected = knot_connected_without_arcs(g, -1, -1);
  if (!r.trivalent) r.note = "not trivalent";
  if (r.has_self_loop) r.note = "self-loop present";
  return r;
}

bool is_trivalent(const LabeledGraph& g) {
  ValidationReport r = validate_graph(g);
  return r.trivalent && !r.has_self_loop;
}
bool is_trivalent(const KnotGraph& g) {
  ValidationReport r = validate_graph(g);
  return r.trivalent && !r.has_self_loop;
}

bool is_connected(const LabeledGraph& g) { return validate_graph(g).connected; }
bool is_connected(const KnotGraph& g) { return knot_connected_without_arcs(g, -1, -1); }

bool is_prime(const KnotGraph& g) {
  if (!is_connected(g)) return false;
  int m = g.n_ext >= 2 ? g.n_ext : 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (!knot_connected_without_arcs(g, i, j)) return false;
  return true;
}

Rational ord(const LabeledGraph& g) {
  if (!is_trivalent(g)) throw NotTrivalent("ord requires a trivalent graph: " + canonical_key(g));
  return Rational(g.n_vertices, 2);
}

Rational ord(const KnotGraph& g) {
  if (!is_trivalent(g)) throw NotTrivalent("ord requires a trivalent graph: " + canonical_key(g));
  return Rational(total_vertices(g), 2);
}

int arc_count(const KnotGraph& g) { return g.n_ext >= 2 ? g.n_ext : (g.n_ext == 1 ? 1 : 0); }

SignedGraph contract_edge(const LabeledGraph& g, int edge_index) {
  if (edge_index < 0 || edge_index >= static_cast<int>(g.edges.size()))
    throw InvalidEdge("edge index " + std::to_string(edge_index) + " out of range");
  const Edge e = g.edges[edge_index];
  SignedGraph out;
  out.variant = Variant::closed;
  out.sign = (e.b % 2 == 0) ? 1 : -1;
  out.closed.n_vertices = g.n_vertices - 1;
  if (!contract_core(g.edges, edge_index, e.a, e.b, out.sign, out.closed.edges)) {
    out.is_zero = true;
    out.closed.edges.clear();
  }
  return out;
}

SignedGraph contract_edge(const KnotGraph& g, int edge_index) {
  int arcs = arc_count(g);
  int n_edges = arcs + static_cast<int>(g.internal_edges.size());
  if (edge_index < 0 || edge_index >= n_edges)
    throw InvalidEdge("edge index " + std::to_string(edge_index) + " out of range");

  SignedGraph out;
  out.variant = Variant::knot;
  int i, j;
  if (edge_index < arcs) {
    if (g.n_ext == 1)
      throw InvalidEdge("the single-external-vertex self-arc is not contractible");
    if (edge_index < g.n_ext - 1) {
      i = edge_index + 1;
      j = edge_index + 2;
      out.sign = (j % 2 == 0) ? 1 : -1;
    } else {
      // wrap arc (n_ext, 1): boundary orientation contributes (-1)^(n_ext-1)
      i = 1;
      j = g.n_ext;
      out.sign = ((g.n_ext - 1) % 2 == 0) ? 1 : -1;
    }
    out.knot.n_ext = g.n_ext - 1;
    out.knot.n_int = g.n_int;
  } else {
    const Edge e = g.internal_edges[edge_index - arcs];
    if (e.b <= g.n_ext)
      throw InvalidEdge("chord between two external vertices is not contractible: (" +
                        std::to_string(e.a) + "," + std::to_string(e.b) + ")");
    i = e.a;
    j = e.b;
    out.sign = (j % 2 == 0) ? 1 : -1;
    out.knot.n_ext = g.n_ext - (j <= g.n_ext ? 1 : 0);
    out.knot.n_int = g.n_int - (j > g.n_ext ? 1 : 0);
  }
  int skip = edge_index < arcs ? -1 : edge_index - arcs;
  if (!contract_core(g.internal_edges, skip, i, j, out.sign, out.knot.internal_edges)) {
    out.is_zero = true;
    out.knot.internal_edges.clear();
  }
  return out;
}

NormalForm rotation_normal_form(const KnotGraph& g) {
  NormalForm nf;
  for (const Edge& e : g.internal_edges)
    if (e.a == e.b) {
      nf.is_zero = true;
      return nf;
    }
  // doubled internal edge kills the class (the flat propagator squares to zero)
  std::vector<Edge> sorted = g.internal_edges;
  std::sort(sorted.begin(), sorted.end());
  for (size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k] == sorted[k - 1]) {
      nf.is_zero = true;
      return nf;
    }

  KnotGraph cur = g;
  cur.internal_edges = sorted;
  int cur_sign = 1;
  std::map<std::string, int> seen;
  std::string best_key;
  KnotGraph best = cur;
  int best_sign = 1;
  int rotations = std::max(g.n_ext, 1);
  for (int r = 0; r < rotations; ++r) {
    std::string key = canonical_key(cur);
    auto it = seen.find(key);
    if (it != seen.end() && it->second != cur_sign) {
      nf.is_zero = true;  // ambivalent class: G = -G
      return nf;
    }
    seen.emplace(key, cur_sign);
    if (best_key.empty() || key < best_key) {
      best_key = key;
      best = cur;
      best_sign = cur_sign;
    }
    if (g.n_ext == 0) break;
    // rotate: externals v -> v+1 (n_ext -> 1), internals fixed;
    // base sign (-1)^(n_ext-1), one -1 per edge whose stored order flips.
    int s = ((g.n_ext - 1) % 2 == 0) ? 1 : -1;
    std::vector<Edge> next;
    next.reserve(cur.internal_edges.size());
    for (const Edge& e : cur.internal_edges) {
      auto rot = [&](int v) { return v <= g.n_ext ? (v == g.n_ext ? 1 : v + 1) : v; };
      int a = rot(e.a), b = rot(e.b);
      if (a > b) {
        std::swap(a, b);
        s = -s;
      }
      next.push_back({a, b});
    }
    std::sort(next.begin(), next.end());
    cur.internal_edges = next;
    cur_sign *= s;
  }
  nf.rep = best;
  nf.sign = best_sign;
  return nf;
}

void GraphSum::add(const LabeledGraph& g, const Rational& c) {
  if (c == 0) return;
  if (variant && *variant != Variant::closed)
    throw MixedVariant("cannot add a closed graph to a knot-variant sum");
  for (const Edge& e : g.edges)
    if (e.a == e.b) return;  // self-loop: zero cochain
  if (!terms.empty()) {
    const Term& t = terms.begin()->second;
    if (t.closed.n_vertices != g.n_vertices)
      throw MixedVariant("vertex count mismatch in GraphSum: " +
                         std::to_string(t.closed.n_vertices) + " vs " +
                         std::to_string(g.n_vertices));
  }
  variant = Variant::closed;
  std::string key = canonical_key(g);
  auto it = terms.find(key);
  if (it == terms.end()) {
    Term t;
    t.variant = Variant::closed;
    t.closed = g;
    std::sort(t.closed.edges.begin(), t.closed.edges.end());
    t.coeff = c;
    terms.emplace(key, std::move(t));
  } else {
    it->second.coeff += c;
    if (it->second.coeff == 0) terms.erase(it);
  }
}

void GraphSum::add(const KnotGraph& g, const Rational& c) {
  if (c == 0) return;
  if (variant && *variant != Variant::knot)
    throw MixedVariant("cannot add a knot graph to a closed-variant sum");
  NormalForm nf = rotation_normal_form(g);
  if (nf.is_zero) return;
  if (!terms.empty()) {
    const Term& t = terms.begin()->second;
    if (total_vertices(t.knot) != total_vertices(g))
      throw MixedVariant("total vertex count mismatch in GraphSum: " +
                         std::to_string(total_vertices(t.knot)) + " vs " +
                         std::to_string(total_vertices(g)));
  }
  variant = Variant::knot;
  Rational eff = c * nf.sign;
  std::string key = canonical_key(nf.rep);
  auto it = terms.find(key);
  if (it == terms.end()) {
    Term t;
    t.variant = Variant::knot;
    t.knot = nf.rep;
    t.coeff = eff;
    terms.emplace(key, std::move(t));
  } else {
    it->second.coeff += eff;
    if (it->second.coeff == 0) terms.erase(it);
  }
}

GraphSum GraphSum::scaled(const Rational& c) const {
  GraphSum out;
  if (c == 0) return out;
  out.variant = variant;
  for (const auto& [k, t] : terms) {
    Term s = t;
    s.coeff = t.coeff * c;
    out.terms.emplace(k, std::move(s));
  }
  return out;
}

GraphSum delta_term(const LabeledGraph& g, const Rational& c) {
  GraphSum out;
  for (int idx = 0; idx < static_cast<int>(g.edges.size()); ++idx) {
    SignedGraph sg = contract_edge(g, idx);
    if (sg.is_zero) continue;
    out.add(sg.closed, c * sg.sign);
  }
  return out;
}

GraphSum delta_term(const KnotGraph& g, const Rational& c) {
  GraphSum out;
  int arcs = arc_count(g);
  int n_edges = arcs + static_cast<int>(g.internal_edges.size());
  for (int idx = 0; idx < n_edges; ++idx) {
    if (g.n_ext == 1 && idx == 0) continue;  // degenerate self-arc
    if (idx >= arcs) {
      const Edge& e = g.internal_edges[idx - arcs];
      if (e.b <= g.n_ext) continue;  // chord: delta never contracts it
    }
    SignedGraph sg = contract_edge(g, idx);
    if (sg.is_zero) continue;
    out.add(sg.knot, c * sg.sign);
  }
  return out;
}

GraphSum delta(const GraphSum& v) {
  GraphSum out;
  if (!v.variant) return out;
  for (const auto& [key, t] : v.terms) {
    GraphSum part = t.variant == Variant::closed ? delta_term(t.closed, t.coeff)
                                                 : delta_term(t.knot, t.coeff);
    for (const auto& [k2, t2] : part.terms) {
      if (t2.variant == Variant::closed)
        out.add(t2.closed, t2.coeff);
      else
        out.add(t2.knot, t2.coeff);
    }
  }
  return out;
}

namespace {

// Lexicographic backtracking over nondecreasing edge sequences hitting the
// target valences exactly.
void enumerate_edges(int n, const std::vector<int>& target, std::vector<Edge>& edges,
                     std::vector<int>& deg, int total_edges,
                     const std::function<void(const std::vector<Edge>&)>& emit) {
  if (static_cast<int>(edges.size()) == total_edges) {
    for (int v = 1; v <= n; ++v)
      if (deg[v] != target[v]) return;
    emit(edges);
    return;
  }
  int lo = 0;
  for (int v = 1; v <= n; ++v)
    if (deg[v] < target[v]) {
      lo = v;
      break;
    }
  if (lo == 0) return;
  const bool has_last = !edges.empty();
  const Edge last = has_last ? edges.back() : Edge{0, 0};
  if (has_last && lo < last.a) return;  // smallest unfinished vertex can no longer gain edges
  for (int a = 1; a <= n; ++a) {
    if (deg[a] >= target[a]) continue;
    for (int b = a + 1; b <= n; ++b) {
      if (deg[b] >= target[b]) continue;
      Edge e{a, b};
      if (has_last && e < last) continue;
      deg[a]++;
      deg[b]++;
      edges.push_back(e);
      enumerate_edges(n, target, edges, deg, total_edges, emit);
      edges.pop_back();
      deg[a]--;
      deg[b]--;
    }
  }
}

}  // namespace

GraphList enumerate_trivalent(int n, Variant variant, std::optional<int> n_int) {
  if (n < 2) throw SizeLimit("vertex count must be at least 2");
  if (n > kEnumerationVertexLimit)
    throw SizeLimit("vertex count " + std::to_string(n) + " above enumeration limit " +
                    std::to_string(kEnumerationVertexLimit));
  GraphList out;
  out.variant = variant;
  if (variant == Variant::closed) {
    if ((3 * n) % 2 != 0) return out;
    std::vector<int> target(n + 1, 3);
    target[0] = 0;
    std::vector<Edge> edges;
    std::vector<int> deg(n + 1, 0);
    enumerate_edges(n, target, edges, deg, 3 * n / 2,
                    [&](const std::vector<Edge>& es) { out.closed.push_back({n, es}); });
    return out;
  }
  for (int ne = n; ne >= 0; --ne) {
    int ni = n - ne;
    if (n_int && ni != *n_int) continue;
    if ((ne + 3 * ni) % 2 != 0) continue;
    std::vector<int> target(n + 1, 0);
    for (int v = 1; v <= ne; ++v) target[v] = 1;
    for (int v = ne + 1; v <= n; ++v) target[v] = 3;
    std::vector<Edge> edges;
    std::vector<int> deg(n + 1, 0);
    enumerate_edges(n, target, edges, deg, (ne + 3 * ni) / 2, [&](const std::vector<Edge>& es) {
      out.knot.push_back({ne, ni, es});
    });
  }
  return out;
}

std::vector<GraphSum> cocycle_basis(int n, Variant variant, BasisFilter filter) {
  GraphList all = enumerate_trivalent(n, variant);

  // deterministic column list
  struct Column {
    Variant variant;
    LabeledGraph closed;
    KnotGraph knot;
  };
  std::vector<Column> cols;
  std::map<std::string, int> col_index;
  if (variant == Variant::closed) {
    for (const LabeledGraph& g : all.closed) {
      if (filter != BasisFilter::none && !is_connected(g)) continue;
      std::string key = canonical_key(g);
      if (col_index.count(key)) continue;
      col_index.emplace(key, static_cast<int>(cols.size()));
      cols.push_back({Variant::closed, g, {}});
    }
  } else {
    for (const KnotGraph& g : all.knot) {
      if (filter == BasisFilter::connected && !is_connected(g)) continue;
      if (filter == BasisFilter::prime && !is_prime(g)) continue;
      NormalForm nf = rotation_normal_form(g);
      if (nf.is_zero) continue;
      std::string key = canonical_key(nf.rep);
      if (col_index.count(key)) continue;
      col_index.emplace(key, static_cast<int>(cols.size()));
      cols.push_back({Variant::knot, {}, nf.rep});
    }
  }

  int ncols = static_cast<int>(cols.size());
  std::map<std::string, std::vector<Rational>> rows;
  for (int c = 0; c < ncols; ++c) {
    GraphSum img = cols[c].variant == Variant::closed
                       ? delta_term(cols[c].closed, Rational(1))
                       : delta_term(cols[c].knot, Rational(1));
    for (const auto& [key, t] : img.terms) {
      auto [it, fresh] = rows.try_emplace(key, std::vector<Rational>(ncols));
      it->second[c] = t.coeff;
    }
  }

  // exact RREF
  std::vector<std::vector<Rational>> m;
  m.reserve(rows.size());
  for (auto& [k, r] : rows) m.push_back(std::move(r));
  int nrows = static_cast<int>(m.size());
  std::vector<int> pivots;
  int pr = 0;
  for (int pc = 0; pc < ncols && pr < nrows; ++pc) {
    int pv = -1;
    for (int r = pr; r < nrows; ++r)
      if (m[r][pc] != 0) {
        pv = r;
        break;
      }
    if (pv < 0) continue;
    std::swap(m[pr], m[pv]);
    Rational inv = Rational(1) / m[pr][pc];
    for (int c = 0; c < ncols; ++c) m[pr][c] *= inv;
    for (int r = 0; r < nrows; ++r) {
      if (r == pr || m[r][pc] == 0) continue;
      Rational f = m[r][pc];
      for (int c = 0; c < ncols; ++c) m[r][c] -= f * m[pr][c];
    }
    pivots.push_back(pc);
    ++pr;
  }

  std::vector<GraphSum> basis;
  std::vector<char> is_pivot(ncols, 0);
  for (int pc : pivots) is_pivot[pc] = 1;
  for (int fc = 0; fc < ncols; ++fc) {
    if (is_pivot[fc]) continue;
    std::vector<Rational> vec(ncols);
    vec[fc] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) vec[pivots[r]] = -m[r][fc];
    // leading coefficient (first nonzero in column order) -> 1
    Rational lead;
    for (int c = 0; c < ncols; ++c)
      if (vec[c] != 0) {
        lead = vec[c];
        break;
      }
    GraphSum gs;
    for (int c = 0; c < ncols; ++c) {
      if (vec[c] == 0) continue;
      Rational coeff = vec[c] / lead;
      if (cols[c].variant == Variant::closed)
        gs.add(cols[c].closed, coeff);
      else
        gs.add(cols[c].knot, coeff);
    }
    if (!delta(gs).empty())
      throw NotCocycle("internal error: kernel vector fails delta check");
    basis.push_back(std::move(gs));
  }
  return basis;
}

}  // namespace knotint
