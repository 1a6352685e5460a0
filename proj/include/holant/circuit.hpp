#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "signature.hpp"

namespace holant {

/// Incidences grouped by vertex, an ordered list of external edges, and a
/// perfect pairing of the remaining incidences into internal edges.
struct GraphFragment {
  std::vector<std::string> vertex_ids;
  std::vector<std::vector<std::string>> vertex_incidences;  // J_v, label order
  std::vector<std::pair<std::string, std::string>> internal_edges;
  std::vector<std::string> external_edges;  // ordered; order defines bit positions

  std::size_t num_vertices() const { return vertex_ids.size(); }
  std::size_t num_incidences() const {
    std::size_t n = 0;
    for (const auto& j : vertex_incidences) n += j.size();
    return n;
  }
  bool closed() const { return external_edges.empty(); }
};

inline void validate_fragment(const GraphFragment& g) {
  if (g.vertex_ids.size() != g.vertex_incidences.size())
    throw std::invalid_argument("fragment: vertex id/incidence list mismatch");
  std::set<std::string> ids(g.vertex_ids.begin(), g.vertex_ids.end());
  if (ids.size() != g.vertex_ids.size())
    throw std::invalid_argument("fragment: duplicate vertex id");
  std::set<std::string> all;
  for (const auto& j : g.vertex_incidences)
    for (const auto& inc : j)
      if (!all.insert(inc).second)
        throw std::invalid_argument("fragment: incidence '" + inc + "' appears twice");
  std::set<std::string> used;
  for (const auto& [a, b] : g.internal_edges) {
    if (a == b) throw std::invalid_argument("fragment: internal edge pairs an incidence with itself");
    for (const auto& inc : {a, b}) {
      if (!all.count(inc))
        throw std::invalid_argument("fragment: internal edge uses unknown incidence '" + inc + "'");
      if (!used.insert(inc).second)
        throw std::invalid_argument("fragment: incidence '" + inc + "' in two internal edges");
    }
  }
  for (const auto& inc : g.external_edges) {
    if (!all.count(inc))
      throw std::invalid_argument("fragment: external edge uses unknown incidence '" + inc + "'");
    if (!used.insert(inc).second)
      throw std::invalid_argument("fragment: incidence '" + inc + "' both internal and external");
  }
  if (used.size() != all.size())
    throw std::invalid_argument("fragment: some incidence is neither internal nor external");
}

/// A graph fragment with one constraint signature per vertex. The constraint
/// of vertex v must be indexed exactly by J_v (same labels, same order).
struct Circuit {
  GraphFragment fragment;
  std::vector<Signature> constraints;  // parallel to fragment.vertex_ids

  const Signature& constraint_of(std::size_t v) const { return constraints.at(v); }
};

inline void validate_circuit(const Circuit& c) {
  validate_fragment(c.fragment);
  if (c.constraints.size() != c.fragment.vertex_ids.size())
    throw std::invalid_argument("circuit: one constraint per vertex required");
  for (std::size_t v = 0; v < c.constraints.size(); ++v)
    if (c.constraints[v].index_set().labels() != c.fragment.vertex_incidences[v])
      throw std::invalid_argument("circuit: constraint of vertex '" +
                                  c.fragment.vertex_ids[v] +
                                  "' is not indexed by its incidences");
}

inline IndexSet external_index_set(const Circuit& c) {
  return IndexSet(c.fragment.external_edges);
}

namespace detail {

// Flat view of a circuit for evaluation: incidences become indices, each
// knowing its vertex and bit position.
struct FlatCircuit {
  std::size_t num_incidences = 0;
  std::vector<std::pair<std::size_t, std::size_t>> incidence_home;  // (vertex, bit)
  std::vector<std::pair<std::size_t, std::size_t>> internal_edges;  // incidence indices
  std::vector<std::size_t> external_incidences;
  std::vector<std::size_t> vertex_arity;
};

inline FlatCircuit flatten(const Circuit& c) {
  FlatCircuit f;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t v = 0; v < c.fragment.vertex_incidences.size(); ++v) {
    const auto& j = c.fragment.vertex_incidences[v];
    f.vertex_arity.push_back(j.size());
    for (std::size_t b = 0; b < j.size(); ++b) {
      index_of[j[b]] = f.incidence_home.size();
      f.incidence_home.emplace_back(v, b);
    }
  }
  f.num_incidences = f.incidence_home.size();
  for (const auto& [a, b] : c.fragment.internal_edges)
    f.internal_edges.emplace_back(index_of.at(a), index_of.at(b));
  for (const auto& a : c.fragment.external_edges)
    f.external_incidences.push_back(index_of.at(a));
  return f;
}

// Existence of a positive completion of a partially assigned vertex table.
inline bool completion_possible(const Signature& sig, std::uint32_t assigned_mask,
                                std::uint32_t assigned_bits) {
  std::uint32_t n = sig.table_size();
  std::uint32_t free_mask = (n - 1) & ~assigned_mask;
  // Iterate the submasks of free_mask, superimposed on the assigned bits.
  std::uint32_t sub = free_mask;
  while (true) {
    if (sig.value(assigned_bits | sub) != 0) return true;
    if (sub == 0) break;
    sub = (sub - 1) & free_mask;
  }
  return false;
}

// Orders internal edges so that consecutive edges share vertices where
// possible; the zero-product pruning then fires early.
inline std::vector<std::size_t> dfs_edge_order(const FlatCircuit& f) {
  std::size_t m = f.internal_edges.size();
  std::vector<bool> edge_done(m, false);
  std::vector<bool> vertex_seen(f.vertex_arity.size(), false);
  std::vector<std::size_t> order;
  order.reserve(m);
  while (order.size() < m) {
    // Prefer an edge touching an already-seen vertex.
    std::size_t pick = m;
    for (std::size_t e = 0; e < m; ++e) {
      if (edge_done[e]) continue;
      auto [i, j] = f.internal_edges[e];
      if (vertex_seen[f.incidence_home[i].first] || vertex_seen[f.incidence_home[j].first]) {
        pick = e;
        break;
      }
      if (pick == m) pick = e;
    }
    edge_done[pick] = true;
    order.push_back(pick);
    vertex_seen[f.incidence_home[f.internal_edges[pick].first].first] = true;
    vertex_seen[f.incidence_home[f.internal_edges[pick].second].first] = true;
  }
  return order;
}

struct EvalState {
  std::vector<std::uint32_t> mask;  // per-vertex assigned incidence bits
  std::vector<std::uint32_t> bits;
};

inline void assign_incidence(const FlatCircuit& f, EvalState& st, std::size_t inc, int value) {
  auto [v, b] = f.incidence_home[inc];
  st.mask[v] |= (std::uint32_t{1} << b);
  if (value) st.bits[v] |= (std::uint32_t{1} << b);
}

inline void unassign_incidence(const FlatCircuit& f, EvalState& st, std::size_t inc) {
  auto [v, b] = f.incidence_home[inc];
  st.mask[v] &= ~(std::uint32_t{1} << b);
  st.bits[v] &= ~(std::uint32_t{1} << b);
}

inline void eval_recurse(const Circuit& c, const FlatCircuit& f,
                         const std::vector<std::size_t>& order, std::size_t depth,
                         EvalState& st, Rational& acc) {
  if (depth == order.size()) {
    Rational prod = 1;
    for (std::size_t v = 0; v < c.constraints.size(); ++v) {
      prod *= c.constraints[v].value(st.bits[v]);
      if (prod == 0) return;
    }
    acc += prod;
    return;
  }
  auto [i, j] = f.internal_edges[order[depth]];
  for (int value = 0; value <= 1; ++value) {
    assign_incidence(f, st, i, value);
    assign_incidence(f, st, j, value);
    std::size_t vi = f.incidence_home[i].first;
    std::size_t vj = f.incidence_home[j].first;
    bool alive = completion_possible(c.constraints[vi], st.mask[vi], st.bits[vi]) &&
                 (vi == vj || completion_possible(c.constraints[vj], st.mask[vj], st.bits[vj]));
    if (alive) eval_recurse(c, f, order, depth + 1, st, acc);
    unassign_incidence(f, st, i);
    unassign_incidence(f, st, j);
  }
}

}  // namespace detail

/// Exact sum, over all assignments extending the external configuration, of
/// the product of constraint values. Brute force with zero-product pruning.
inline Rational evaluate(const Circuit& c, const Configuration& external) {
  if (external.domain != external_index_set(c))
    throw std::invalid_argument("evaluate: external configuration over wrong index set");
  detail::FlatCircuit f = detail::flatten(c);
  detail::EvalState st;
  st.mask.assign(c.constraints.size(), 0);
  st.bits.assign(c.constraints.size(), 0);
  for (std::size_t k = 0; k < f.external_incidences.size(); ++k)
    detail::assign_incidence(f, st, f.external_incidences[k], external.get(k) ? 1 : 0);
  for (std::size_t v = 0; v < c.constraints.size(); ++v)
    if (!detail::completion_possible(c.constraints[v], st.mask[v], st.bits[v]))
      return Rational(0);
  Rational acc = 0;
  detail::eval_recurse(c, f, detail::dfs_edge_order(f), 0, st, acc);
  return acc;
}

inline Rational evaluate_closed(const Circuit& c) {
  if (!c.fragment.closed()) throw std::invalid_argument("evaluate_closed: circuit has external edges");
  return evaluate(c, Configuration(IndexSet(), 0));
}

/// Total weight of configurations violating exactly k internal-edge
/// equalities. z_k(c, 0) is the plain closed evaluation.
inline Rational z_k(const Circuit& c, unsigned k) {
  if (!c.fragment.closed()) throw std::invalid_argument("z_k: circuit must be closed");
  detail::FlatCircuit f = detail::flatten(c);
  std::size_t m = f.internal_edges.size();
  if (k > m) return Rational(0);
  Rational total = 0;
  // Choose which k edges are violated, then a value per edge (the violated
  // edge's second incidence gets the opposite value).
  std::vector<std::size_t> chosen;
  std::vector<int> edge_value(m, 0);
  auto enumerate_values = [&](const std::vector<bool>& violated) {
    std::size_t combos = std::size_t{1} << m;
    for (std::size_t word = 0; word < combos; ++word) {
      detail::EvalState st;
      st.mask.assign(c.constraints.size(), 0);
      st.bits.assign(c.constraints.size(), 0);
      for (std::size_t e = 0; e < m; ++e) {
        int a = (word >> e) & 1u;
        int b = violated[e] ? 1 - a : a;
        detail::assign_incidence(f, st, f.internal_edges[e].first, a);
        detail::assign_incidence(f, st, f.internal_edges[e].second, b);
      }
      Rational prod = 1;
      for (std::size_t v = 0; v < c.constraints.size() && prod != 0; ++v)
        prod *= c.constraints[v].value(st.bits[v]);
      total += prod;
    }
  };
  std::vector<bool> violated(m, false);
  std::vector<std::size_t> idx(k);
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t left) {
    if (left == 0) {
      enumerate_values(violated);
      return;
    }
    for (std::size_t e = start; e + left <= m; ++e) {
      violated[e] = true;
      choose(e + 1, left - 1);
      violated[e] = false;
    }
  };
  choose(0, k);
  return total;
}

/// Contraction of an internal edge: the two endpoint vertices merge (or a
/// loop disappears) and the merged vertex carries the local two-vertex
/// signature. The circuit's signature is unchanged.
inline Circuit contract_edge(const Circuit& c, std::size_t edge_index) {
  if (edge_index >= c.fragment.internal_edges.size())
    throw std::invalid_argument("contract_edge: no such internal edge");
  const auto& [inc_a, inc_b] = c.fragment.internal_edges[edge_index];

  auto locate = [&](const std::string& inc) -> std::pair<std::size_t, std::size_t> {
    for (std::size_t v = 0; v < c.fragment.vertex_incidences.size(); ++v) {
      const auto& j = c.fragment.vertex_incidences[v];
      for (std::size_t b = 0; b < j.size(); ++b)
        if (j[b] == inc) return {v, b};
    }
    throw std::logic_error("contract_edge: incidence not found");
  };
  auto [u, bit_u] = locate(inc_a);
  auto [v, bit_v] = locate(inc_b);

  Circuit out;
  Signature merged;
  std::vector<std::string> merged_incidences;
  if (u == v) {
    // Loop: sum the table over equal values at the two loop positions.
    const Signature& fu = c.constraints[u];
    std::uint32_t ba = std::uint32_t{1} << bit_u;
    std::uint32_t bb = std::uint32_t{1} << bit_v;
    const auto& j = c.fragment.vertex_incidences[u];
    std::vector<std::size_t> keep;
    for (std::size_t b = 0; b < j.size(); ++b)
      if (b != bit_u && b != bit_v) {
        keep.push_back(b);
        merged_incidences.push_back(j[b]);
      }
    IndexSet is{merged_incidences};
    std::vector<Rational> t(is.table_size(), Rational(0));
    for (std::uint32_t x = 0; x < is.table_size(); ++x) {
      std::uint32_t base = 0;
      for (std::size_t i = 0; i < keep.size(); ++i)
        if ((x >> i) & 1u) base |= (std::uint32_t{1} << keep[i]);
      t[x] = fu.value(base) + fu.value(base | ba | bb);
    }
    merged = Signature(is, std::move(t));
  } else {
    const Signature& fu = c.constraints[u];
    const Signature& fv = c.constraints[v];
    const auto& ju = c.fragment.vertex_incidences[u];
    const auto& jv = c.fragment.vertex_incidences[v];
    std::vector<std::size_t> keep_u, keep_v;
    for (std::size_t b = 0; b < ju.size(); ++b)
      if (b != bit_u) {
        keep_u.push_back(b);
        merged_incidences.push_back(ju[b]);
      }
    for (std::size_t b = 0; b < jv.size(); ++b)
      if (b != bit_v) {
        keep_v.push_back(b);
        merged_incidences.push_back(jv[b]);
      }
    if (merged_incidences.size() > IndexSet::max_arity)
      throw std::invalid_argument("contract_edge: merged arity above cap");
    IndexSet is{merged_incidences};
    std::vector<Rational> t(is.table_size(), Rational(0));
    for (std::uint32_t x = 0; x < is.table_size(); ++x) {
      std::uint32_t xu = 0, xv = 0;
      for (std::size_t i = 0; i < keep_u.size(); ++i)
        if ((x >> i) & 1u) xu |= (std::uint32_t{1} << keep_u[i]);
      for (std::size_t i = 0; i < keep_v.size(); ++i)
        if ((x >> (keep_u.size() + i)) & 1u) xv |= (std::uint32_t{1} << keep_v[i]);
      Rational sum = 0;
      for (std::uint32_t tbit = 0; tbit <= 1; ++tbit) {
        std::uint32_t fu_idx = xu | (tbit << bit_u);
        std::uint32_t fv_idx = xv | (tbit << bit_v);
        sum += fu.value(fu_idx) * fv.value(fv_idx);
      }
      t[x] = sum;
    }
    merged = Signature(is, std::move(t));
  }

  std::string merged_id = c.fragment.vertex_ids[u];
  if (u != v) merged_id += "+" + c.fragment.vertex_ids[v];
  for (std::size_t w = 0; w < c.fragment.vertex_ids.size(); ++w) {
    if (w == u || w == v) continue;
    out.fragment.vertex_ids.push_back(c.fragment.vertex_ids[w]);
    out.fragment.vertex_incidences.push_back(c.fragment.vertex_incidences[w]);
    out.constraints.push_back(c.constraints[w]);
  }
  out.fragment.vertex_ids.push_back(merged_id);
  out.fragment.vertex_incidences.push_back(merged_incidences);
  out.constraints.push_back(merged);
  for (std::size_t e = 0; e < c.fragment.internal_edges.size(); ++e)
    if (e != edge_index) out.fragment.internal_edges.push_back(c.fragment.internal_edges[e]);
  out.fragment.external_edges = c.fragment.external_edges;
  validate_circuit(out);
  return out;
}

/// The signature of the circuit: the table of evaluate over all external
/// configurations, indexed by the external edge list.
inline Signature signature_of(const Circuit& c) {
  IndexSet is = external_index_set(c);
  std::vector<Rational> t(is.table_size());
  for (std::uint32_t x = 0; x < is.table_size(); ++x)
    t[x] = evaluate(c, Configuration(is, x));
  return Signature(is, std::move(t));
}

// ---------------------------------------------------------------------------
// Labelled multigraph instances (Even / Odd / NAE per vertex).

enum class VertexLabel { Even, Odd, Nae };

struct LabelledGraphInstance {
  std::vector<std::pair<std::string, VertexLabel>> vertices;
  std::vector<std::pair<std::string, std::string>> edges;  // loops and parallels allowed
};

inline Circuit instance_to_circuit(const LabelledGraphInstance& g) {
  std::map<std::string, std::size_t> vertex_index;
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (vertex_index.count(g.vertices[v].first))
      throw std::invalid_argument("instance: duplicate vertex id");
    vertex_index[g.vertices[v].first] = v;
  }
  Circuit c;
  c.fragment.vertex_ids.reserve(g.vertices.size());
  c.fragment.vertex_incidences.assign(g.vertices.size(), {});
  for (const auto& [id, label] : g.vertices) c.fragment.vertex_ids.push_back(id);

  std::vector<std::size_t> next(g.vertices.size(), 0);
  auto fresh_incidence = [&](const std::string& vid) {
    std::size_t v = vertex_index.at(vid);
    std::string inc = vid + "." + std::to_string(next[v]++);
    c.fragment.vertex_incidences[v].push_back(inc);
    return inc;
  };
  for (const auto& [a, b] : g.edges) {
    if (!vertex_index.count(a) || !vertex_index.count(b))
      throw std::invalid_argument("instance: edge endpoint names unknown vertex");
    std::string ia = fresh_incidence(a);
    std::string ib = fresh_incidence(b);
    c.fragment.internal_edges.emplace_back(ia, ib);
  }
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    IndexSet is{c.fragment.vertex_incidences[v]};
    switch (g.vertices[v].second) {
      case VertexLabel::Even: c.constraints.push_back(make_even(is)); break;
      case VertexLabel::Odd: c.constraints.push_back(make_odd(is)); break;
      case VertexLabel::Nae: c.constraints.push_back(make_nae(is)); break;
    }
  }
  validate_circuit(c);
  return c;
}

// ---------------------------------------------------------------------------
// Sink-free orientations. A skew edge must point both ends out or both in.

struct SfoGraph {
  struct Edge {
    std::size_t u, v;
    bool skew = false;
  };
  std::size_t num_vertices = 0;
  std::vector<Edge> edges;
};

/// The reduction of a sink-free-orientation instance to a labelled NAE/parity
/// instance: vertices become NAE, each non-skew edge is subdivided by an Odd
/// vertex, and each original vertex gets a pendant Odd vertex.
inline LabelledGraphInstance sfo_to_instance(const SfoGraph& g) {
  LabelledGraphInstance out;
  for (std::size_t v = 0; v < g.num_vertices; ++v)
    out.vertices.emplace_back("v" + std::to_string(v), VertexLabel::Nae);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (g.edges[e].u >= g.num_vertices || g.edges[e].v >= g.num_vertices)
      throw std::invalid_argument("sfo: edge endpoint out of range");
    std::string su = "v" + std::to_string(g.edges[e].u);
    std::string sv = "v" + std::to_string(g.edges[e].v);
    if (g.edges[e].skew) {
      out.edges.emplace_back(su, sv);
    } else {
      std::string mid = "m" + std::to_string(e);
      out.vertices.emplace_back(mid, VertexLabel::Odd);
      out.edges.emplace_back(su, mid);
      out.edges.emplace_back(mid, sv);
    }
  }
  for (std::size_t v = 0; v < g.num_vertices; ++v) {
    std::string pend = "o" + std::to_string(v);
    out.vertices.emplace_back(pend, VertexLabel::Odd);
    out.edges.emplace_back("v" + std::to_string(v), pend);
  }
  return out;
}

}  // namespace holant
