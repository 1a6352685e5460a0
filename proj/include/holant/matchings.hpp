#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "signature.hpp"
#include "simplex.hpp"
#include "windability.hpp"

namespace holant {

/// A graph fragment with a non-negative rational weight per internal edge
/// and a fugacity per vertex. External edges carry no weight. The signature
/// counts weighted matchings: a set F of edges has weight zero if it covers
/// some vertex twice, and otherwise the product of its edge weights times
/// the fugacities of the uncovered vertices.
struct MatchingsCircuit {
  GraphFragment fragment;
  std::vector<Rational> edge_weights;  // parallel to fragment.internal_edges
  std::vector<Rational> fugacities;    // parallel to fragment.vertex_ids
};

inline void validate_matchings_circuit(const MatchingsCircuit& g) {
  validate_fragment(g.fragment);
  if (g.edge_weights.size() != g.fragment.internal_edges.size())
    throw std::invalid_argument("matchings circuit: one weight per internal edge required");
  if (g.fugacities.size() != g.fragment.vertex_ids.size())
    throw std::invalid_argument("matchings circuit: one fugacity per vertex required");
  for (const auto& w : g.edge_weights)
    if (w < 0) throw std::invalid_argument("matchings circuit: negative edge weight");
  for (const auto& l : g.fugacities)
    if (l < 0) throw std::invalid_argument("matchings circuit: negative fugacity");
}

/// The standard compilation into a plain circuit: each vertex becomes a
/// Fugacity constraint and each weighted edge is subdivided by an Edge
/// constraint.
inline Circuit compile_matchings(const MatchingsCircuit& g) {
  validate_matchings_circuit(g);
  Circuit c;
  c.fragment.vertex_ids = g.fragment.vertex_ids;
  c.fragment.vertex_incidences = g.fragment.vertex_incidences;
  c.fragment.external_edges = g.fragment.external_edges;
  for (std::size_t v = 0; v < g.fragment.vertex_ids.size(); ++v)
    c.constraints.push_back(
        make_fugacity(IndexSet(g.fragment.vertex_incidences[v]), g.fugacities[v]));
  for (std::size_t e = 0; e < g.fragment.internal_edges.size(); ++e) {
    std::string id = "_w" + std::to_string(e);
    while (std::find(c.fragment.vertex_ids.begin(), c.fragment.vertex_ids.end(), id) !=
           c.fragment.vertex_ids.end())
      id += "'";
    std::string ia = id + ".0", ib = id + ".1";
    c.fragment.vertex_ids.push_back(id);
    c.fragment.vertex_incidences.push_back({ia, ib});
    c.constraints.push_back(make_edge(IndexSet({ia, ib}), g.edge_weights[e]));
    c.fragment.internal_edges.emplace_back(g.fragment.internal_edges[e].first, ia);
    c.fragment.internal_edges.emplace_back(ib, g.fragment.internal_edges[e].second);
  }
  validate_circuit(c);
  return c;
}

inline Signature mc_signature(const MatchingsCircuit& g) {
  return signature_of(compile_matchings(g));
}

// ---------------------------------------------------------------------------
// Gadget construction helpers.

namespace detail {

struct McBuilder {
  MatchingsCircuit g;
  std::map<std::string, std::size_t> vertex_index;

  std::size_t add_vertex(const std::string& id, const Rational& fugacity) {
    if (vertex_index.count(id)) throw std::logic_error("McBuilder: duplicate vertex " + id);
    vertex_index[id] = g.fragment.vertex_ids.size();
    g.fragment.vertex_ids.push_back(id);
    g.fragment.vertex_incidences.push_back({});
    g.fugacities.push_back(fugacity);
    return vertex_index[id];
  }

  std::string incidence(const std::string& vertex) {
    std::size_t v = vertex_index.at(vertex);
    std::string inc = vertex + "." + std::to_string(g.fragment.vertex_incidences[v].size());
    g.fragment.vertex_incidences[v].push_back(inc);
    return inc;
  }

  void add_edge(const std::string& u, const std::string& v, const Rational& w) {
    g.fragment.internal_edges.emplace_back(incidence(u), incidence(v));
    g.edge_weights.push_back(w);
  }

  std::string add_external(const std::string& vertex) {
    std::string inc = incidence(vertex);
    g.fragment.external_edges.push_back(inc);
    return inc;
  }

  MatchingsCircuit take() {
    validate_matchings_circuit(g);
    return std::move(g);
  }
};

// G_{p,1}: two port vertices joined, per binary digit 2^d of p, by a direct
// edge (d = 0) or a path of length 2d-1 with doubled odd-position edges.
inline void append_gp1(McBuilder& b, const Integer& p, const std::string& prefix,
                       std::string& port_s, std::string& port_t) {
  std::string s = prefix + "s", t = prefix + "t";
  b.add_vertex(s, 0);
  b.add_vertex(t, 0);
  port_s = s;
  port_t = t;
  for (std::size_t d = 0; d < mpz_sizeinbase(p.get_mpz_t(), 2); ++d) {
    if (!mpz_tstbit(p.get_mpz_t(), d)) continue;
    if (d == 0) {
      b.add_edge(s, t, 1);
      continue;
    }
    std::vector<std::string> path;
    path.push_back(s);
    for (std::size_t k = 2; k < 2 * d; ++k) {
      std::string v = prefix + "p" + std::to_string(d) + "_" + std::to_string(k);
      b.add_vertex(v, 0);
      path.push_back(v);
    }
    path.push_back(t);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      b.add_edge(path[k], path[k + 1], 1);
      if (k % 2 == 0) b.add_edge(path[k], path[k + 1], 1);  // doubled odd positions
    }
  }
}

}  // namespace detail

/// A matchings circuit with unit weights and zero fugacities whose signature
/// is diag(p, q) on its two external edges.
inline MatchingsCircuit build_gpq(const Integer& p, const Integer& q) {
  if (p < 0 || q < 0) throw std::invalid_argument("build_gpq: p, q must be non-negative");
  detail::McBuilder b;
  if (q == 1) {
    std::string s, t;
    detail::append_gp1(b, p, "a_", s, t);
    b.add_external(s);
    b.add_external(t);
    return b.take();
  }
  // Serial composition  G_{p,1} . swap . G_{q,1} . swap.
  std::string s1, t1, s2, t2;
  detail::append_gp1(b, p, "a_", s1, t1);
  b.add_vertex("h1", 0);
  detail::append_gp1(b, q, "b_", s2, t2);
  b.add_vertex("h2", 0);
  b.add_external(s1);
  b.add_edge(t1, "h1", 1);
  b.add_edge("h1", s2, 1);
  b.add_edge(t2, "h2", 1);
  b.add_external("h2");
  return b.take();
}

/// The OR gadget: a chain of k triangle boxes whose transfer matrices are
/// 2I (input 0) and the all-ones matrix (input 1), with the left boundary
/// forced to 1 and the right to 0. Unnormalized signature is 2^{k-1} OR_k;
/// with normalize set, an isolated fugacity vertex divides that off.
inline MatchingsCircuit or_gadget(std::size_t k, bool normalize = true) {
  if (k == 0) throw std::invalid_argument("or_gadget: arity must be positive");
  detail::McBuilder b;
  for (std::size_t i = 0; i < k; ++i) {
    std::string L = "L" + std::to_string(i), R = "R" + std::to_string(i);
    std::string M = "M" + std::to_string(i), T = "T" + std::to_string(i);
    b.add_vertex(L, 0);
    b.add_vertex(R, 0);
    b.add_vertex(M, 1);
    b.add_vertex(T, 0);
    b.add_edge(L, R, 1);
    b.add_edge(L, M, 1);
    b.add_edge(R, M, 1);
    b.add_edge(M, T, 1);
    b.add_edge(M, T, 1);
    if (i > 0) b.add_edge("R" + std::to_string(i - 1), L, 1);
  }
  b.add_vertex("P0", 0);
  b.add_edge("P0", "L0", 1);  // forces the left boundary to 1
  b.add_vertex("Q1", 0);
  b.add_vertex("Q2", 0);
  b.add_edge("Q1", "Q2", 1);
  b.add_edge("Q1", "R" + std::to_string(k - 1), 1);  // blocks the right boundary
  for (std::size_t i = 0; i < k; ++i) b.add_external("T" + std::to_string(i));
  if (normalize && k > 1) {
    Rational unit = pow2(1 - static_cast<long>(k));
    b.add_vertex("Z", unit);
  }
  return b.take();
}

/// Lifts a matchings circuit for F to one for its parity extension, with
/// every fugacity cleared to zero: each vertex gets a pendant triangle
/// carrying its fugacity, the triangles are chained, and the chain end is
/// the new (first) external edge.
inline MatchingsCircuit lift_to_parity(const MatchingsCircuit& g) {
  validate_matchings_circuit(g);
  MatchingsCircuit out;
  out.fragment = g.fragment;
  out.edge_weights = g.edge_weights;
  out.fugacities.assign(g.fugacities.size(), Rational(0));
  detail::McBuilder b;
  b.g = std::move(out);
  for (std::size_t v = 0; v < g.fragment.vertex_ids.size(); ++v)
    b.vertex_index[g.fragment.vertex_ids[v]] = v;
  std::size_t n = g.fragment.vertex_ids.size();
  std::string fresh = "par";
  for (bool clash = true; clash;) {
    clash = false;
    for (const auto& id : g.fragment.vertex_ids)
      if (id.rfind(fresh, 0) == 0) {
        fresh += "_";
        clash = true;
        break;
      }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::string a = fresh + "a" + std::to_string(i);
    std::string bb = fresh + "b" + std::to_string(i);
    std::string cc = fresh + "c" + std::to_string(i);
    b.add_vertex(a, 0);
    b.add_vertex(bb, 0);
    b.add_vertex(cc, 0);
    b.add_edge(a, bb, 1);
    b.add_edge(a, cc, 1);
    b.add_edge(bb, cc, 1);
    b.add_edge(g.fragment.vertex_ids[i], a, g.fugacities[i]);
    if (i + 1 < n) b.add_edge(cc, fresh + "b" + std::to_string(i + 1), 1);
  }
  std::string parity_port = b.incidence(fresh + "b0");
  MatchingsCircuit lifted = b.take();
  // The parity input is index 0 of the extended signature.
  lifted.fragment.external_edges.insert(lifted.fragment.external_edges.begin(), parity_port);
  validate_matchings_circuit(lifted);
  return lifted;
}

/// Converse of the lift: closing the parity external with a fugacity-1
/// vertex sums out the parity bit.
inline MatchingsCircuit drop_parity(const MatchingsCircuit& g, std::size_t external_index = 0) {
  validate_matchings_circuit(g);
  if (external_index >= g.fragment.external_edges.size())
    throw std::invalid_argument("drop_parity: no such external edge");
  MatchingsCircuit out = g;
  std::string port = out.fragment.external_edges[external_index];
  out.fragment.external_edges.erase(out.fragment.external_edges.begin() + external_index);
  std::string id = "sum0";
  while (std::find(out.fragment.vertex_ids.begin(), out.fragment.vertex_ids.end(), id) !=
         out.fragment.vertex_ids.end())
    id += "'";
  out.fragment.vertex_ids.push_back(id);
  out.fragment.vertex_incidences.push_back({id + ".0"});
  out.fugacities.push_back(1);
  out.fragment.internal_edges.emplace_back(port, id + ".0");
  out.edge_weights.push_back(1);
  validate_matchings_circuit(out);
  return out;
}

// ---------------------------------------------------------------------------
// Clique synthesis.

/// Solves the four-equation system equating the weight-one values of f4 with
/// the clique completions. Requires f4 to vanish on even-weight points.
/// Returns weights keyed like (i, j), 0 <= i < j < 4, or nothing when the
/// system is infeasible.
inline std::optional<std::map<std::pair<int, int>, Rational>> solve_clique_weights(
    const Signature& f4) {
  if (f4.arity() != 4) throw std::invalid_argument("solve_clique_weights: arity must be 4");
  for (std::uint32_t x = 0; x < 16; ++x)
    if (std::popcount(x) % 2 == 0 && f4.value(x) != 0)
      throw std::invalid_argument("solve_clique_weights: signature not supported on odd weights");
  std::vector<std::pair<int, int>> vars;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) vars.emplace_back(i, j);
  LinearSystem sys;
  sys.num_vars = vars.size();
  auto hat = [&](int i) { return f4.value(15u ^ (std::uint32_t{1} << i)); };  // weight-3 values
  for (int i = 0; i < 4; ++i) {
    std::vector<Rational> row(vars.size(), Rational(0));
    for (std::size_t k = 0; k < vars.size(); ++k) {
      auto [a, b] = vars[k];
      if (a == i || b == i) continue;
      // Pair {a, b} completes the matching when u takes the remaining index.
      int j = 0 + 1 + 2 + 3 - i - a - b;
      row[k] = hat(j);
    }
    sys.rows.push_back(std::move(row));
    sys.rhs.push_back(f4.value(std::uint32_t{1} << i));
  }
  FeasibilityResult lp = solve_equality_feasibility(sys);
  if (!lp.feasible) return std::nullopt;
  std::map<std::pair<int, int>, Rational> out;
  for (std::size_t k = 0; k < vars.size(); ++k) out[vars[k]] = lp.solution[k];
  return out;
}

namespace detail {
// Renames the external incidences of a matchings circuit to the given labels
// (freshening any clashing internal names first).
inline void rename_externals(MatchingsCircuit& g, const std::vector<std::string>& labels) {
  if (labels.size() != g.fragment.external_edges.size())
    throw std::invalid_argument("rename_externals: label count mismatch");
  auto rename = [&](const std::string& from, const std::string& to) {
    for (auto& j : g.fragment.vertex_incidences)
      for (auto& inc : j)
        if (inc == from) inc = to;
    for (auto& [a, b] : g.fragment.internal_edges) {
      if (a == from) a = to;
      if (b == from) b = to;
    }
    for (auto& a : g.fragment.external_edges)
      if (a == from) a = to;
  };
  std::set<std::string> existing;
  for (const auto& j : g.fragment.vertex_incidences) existing.insert(j.begin(), j.end());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (g.fragment.external_edges[k] == labels[k]) continue;
    if (existing.count(labels[k])) {
      std::string fresh = labels[k] + "~";
      while (existing.count(fresh)) fresh += "~";
      rename(labels[k], fresh);
      existing.insert(fresh);
    }
    existing.erase(g.fragment.external_edges[k]);
    rename(g.fragment.external_edges[k], labels[k]);
    existing.insert(labels[k]);
  }
  validate_matchings_circuit(g);
}
}  // namespace detail

/*
 * Synthesis for arity 3: when the product inequality holds, route through
 * the parity extension (parity index last), flip it onto the odd-support
 * clique case, solve the clique weights, undo the flip by subdividing the
 * flipped outgoing edges, and close the parity port. The result's signature
 * equals f exactly, externals named after f's labels.
 */
inline std::optional<MatchingsCircuit> synthesize_arity3(const Signature& f) {
  if (f.arity() != 3) throw std::invalid_argument("synthesize_arity3: arity must be 3");
  if (!check_arity3_inequality(f)) return std::nullopt;
  if (f.is_zero()) {
    detail::McBuilder b;
    b.add_vertex("z0", 0);
    b.add_vertex("z1", 0);
    for (int i = 0; i < 3; ++i) b.add_external("z0");
    MatchingsCircuit g = b.take();
    detail::rename_externals(g, f.index_set().labels());
    return g;
  }

  // F'(x1,x2,x3,x4) = f(x1,x2,x3) on even total weight: parity index last.
  std::vector<Rational> fp(16, Rational(0));
  for (std::uint32_t x = 0; x < 8; ++x) {
    std::uint32_t c = std::popcount(x) & 1u;
    fp[x | (c << 3)] = f.value(x);
  }
  std::uint32_t x_star = 0;
  while (fp[x_star] == 0) ++x_star;
  std::uint32_t z = x_star ^ 7u;  // flip vector x* xor (1,1,1,0)

  std::vector<Rational> fpp(16);
  for (std::uint32_t y = 0; y < 16; ++y) fpp[y] = fp[y ^ z];
  Signature f2(make_index_set(4, "d"), fpp);
  auto weights = solve_clique_weights(f2);
  if (!weights)
    throw std::logic_error("synthesize_arity3: clique system infeasible despite the inequality");

  detail::McBuilder b;
  b.add_vertex("u", 0);
  for (int i = 0; i < 4; ++i) b.add_vertex("v" + std::to_string(i), 0);
  for (int i = 0; i < 4; ++i)
    b.add_edge("u", "v" + std::to_string(i), f2.value(15u ^ (std::uint32_t{1} << i)));
  for (const auto& [key, w] : *weights)
    b.add_edge("v" + std::to_string(key.first), "v" + std::to_string(key.second), w);

  // External i, with a subdividing vertex wherever z_i = 1 to undo the flip.
  std::vector<std::string> port_vertex(4);
  for (int i = 0; i < 4; ++i) {
    std::string vi = "v" + std::to_string(i);
    if ((z >> i) & 1u) {
      std::string s = "flip" + std::to_string(i);
      b.add_vertex(s, 0);
      b.add_edge(s, vi, 1);
      port_vertex[i] = s;
    } else {
      port_vertex[i] = vi;
    }
  }
  for (int i = 0; i < 4; ++i) b.add_external(port_vertex[i]);
  MatchingsCircuit for_fprime = b.take();

  MatchingsCircuit result = drop_parity(for_fprime, 3);
  detail::rename_externals(result, f.index_set().labels());
  return result;
}

// ---------------------------------------------------------------------------
// Reduction to perfect matching counting.

struct NotExpressibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matchings circuit for the given constraint table: the OR gadget for OR
/// tables, clique synthesis at arity 3 (reached from lower arities through
/// parity extension), and the odd-support clique case at arity 4.
inline MatchingsCircuit circuit_for_constraint(const Signature& f) {
  std::size_t n = f.arity();
  if (n == 0) {
    detail::McBuilder b;
    b.add_vertex("c0", f.value(0));
    return b.take();
  }
  if (f.is_zero()) {
    detail::McBuilder b;
    b.add_vertex("z0", 0);
    b.add_vertex("z1", 0);
    for (std::size_t i = 0; i < n; ++i) b.add_external("z0");
    MatchingsCircuit g = b.take();
    detail::rename_externals(g, f.index_set().labels());
    return g;
  }
  if (f == make_or(f.index_set())) {
    MatchingsCircuit g = or_gadget(n);
    detail::rename_externals(g, f.index_set().labels());
    return g;
  }
  if (n <= 3) {
    Signature promoted = f;
    std::size_t lifts = 0;
    while (promoted.arity() < 3) {
      promoted = parity_extend(promoted);
      ++lifts;
    }
    auto synth = synthesize_arity3(promoted);
    if (!synth) throw NotExpressibleError("constraint is not windable");
    MatchingsCircuit g = *synth;
    for (std::size_t k = 0; k < lifts; ++k) g = drop_parity(g, 0);
    detail::rename_externals(g, f.index_set().labels());
    return g;
  }
  if (n == 4) {
    bool odd_support = true;
    for (std::uint32_t x = 0; x < 16 && odd_support; ++x)
      if (std::popcount(x) % 2 == 0 && f.value(x) != 0) odd_support = false;
    bool has_weight3 = false;
    for (int i = 0; i < 4; ++i)
      if (f.value(15u ^ (std::uint32_t{1} << i)) != 0) has_weight3 = true;
    if (odd_support && has_weight3) {
      auto weights = solve_clique_weights(f);
      if (weights) {
        detail::McBuilder b;
        b.add_vertex("u", 0);
        for (int i = 0; i < 4; ++i) b.add_vertex("v" + std::to_string(i), 0);
        for (int i = 0; i < 4; ++i)
          b.add_edge("u", "v" + std::to_string(i), f.value(15u ^ (std::uint32_t{1} << i)));
        for (const auto& [key, w] : *weights)
          b.add_edge("v" + std::to_string(key.first), "v" + std::to_string(key.second), w);
        for (int i = 0; i < 4; ++i) b.add_external("v" + std::to_string(i));
        MatchingsCircuit g = b.take();
        detail::rename_externals(g, f.index_set().labels());
        return g;
      }
    }
  }
  throw NotExpressibleError("no matchings circuit known for a constraint of arity " +
                            std::to_string(n));
}

struct PmGraph {
  std::size_t num_vertices = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Integer constant = 1;  // #PM(G) = constant * Z0(circuit)
};

/*
 * End-to-end reduction of a closed circuit to plain perfect-matching
 * counting: substitute a matchings circuit per constraint, clear fugacities
 * through the parity lift (skipped when they are already all zero), splice
 * diag gadgets to clear rational edge weights (collecting the denominator
 * product as the constant), then drop loops and subdivide every edge into a
 * path of length three to reach a simple graph.
 */
inline PmGraph reduce_to_pm(const Circuit& c) {
  if (!c.fragment.closed()) throw std::invalid_argument("reduce_to_pm: circuit must be closed");
  validate_circuit(c);

  // Substitute gadgets; original internal edges become weight-1 edges
  // between gadget externals.
  MatchingsCircuit big;
  std::map<std::string, std::string> port_of;  // original incidence -> gadget incidence
  for (std::size_t v = 0; v < c.constraints.size(); ++v) {
    MatchingsCircuit gadget = circuit_for_constraint(c.constraints[v]);
    std::string ns = "g" + std::to_string(v) + ":";
    for (auto& id : gadget.fragment.vertex_ids) id = ns + id;
    for (auto& j : gadget.fragment.vertex_incidences)
      for (auto& inc : j) inc = ns + inc;
    for (auto& [a, bb] : gadget.fragment.internal_edges) {
      a = ns + a;
      bb = ns + bb;
    }
    for (auto& a : gadget.fragment.external_edges) a = ns + a;
    for (std::size_t k = 0; k < gadget.fragment.external_edges.size(); ++k)
      port_of[c.fragment.vertex_incidences[v][k]] = gadget.fragment.external_edges[k];
    big.fragment.vertex_ids.insert(big.fragment.vertex_ids.end(),
                                   gadget.fragment.vertex_ids.begin(),
                                   gadget.fragment.vertex_ids.end());
    big.fragment.vertex_incidences.insert(big.fragment.vertex_incidences.end(),
                                          gadget.fragment.vertex_incidences.begin(),
                                          gadget.fragment.vertex_incidences.end());
    big.fragment.internal_edges.insert(big.fragment.internal_edges.end(),
                                       gadget.fragment.internal_edges.begin(),
                                       gadget.fragment.internal_edges.end());
    big.edge_weights.insert(big.edge_weights.end(), gadget.edge_weights.begin(),
                            gadget.edge_weights.end());
    big.fugacities.insert(big.fugacities.end(), gadget.fugacities.begin(),
                          gadget.fugacities.end());
  }
  for (const auto& [ia, ib] : c.fragment.internal_edges) {
    big.fragment.internal_edges.emplace_back(port_of.at(ia), port_of.at(ib));
    big.edge_weights.push_back(1);
  }
  validate_matchings_circuit(big);

  // Clear fugacities via the parity lift; the lift's purpose is exactly
  // this, so it is skipped when they already all vanish.
  bool any_fugacity = false;
  for (const auto& l : big.fugacities)
    if (l != 0) any_fugacity = true;
  if (any_fugacity) {
    MatchingsCircuit lifted = lift_to_parity(big);
    // Delete the parity external: keep only matchings avoiding it.
    std::string port = lifted.fragment.external_edges.front();
    lifted.fragment.external_edges.erase(lifted.fragment.external_edges.begin());
    for (auto& j : lifted.fragment.vertex_incidences)
      j.erase(std::remove(j.begin(), j.end(), port), j.end());
    big = std::move(lifted);
    validate_matchings_circuit(big);
  }

  // Splice diag gadgets at non-unit weights: when the edge weight is p/q,
  // insert the gadget realizing q when the edge is out and p when it is in;
  // the signature picks up one factor q per spliced edge.
  PmGraph out;
  MatchingsCircuit spliced;
  spliced.fragment.vertex_ids = big.fragment.vertex_ids;
  spliced.fragment.vertex_incidences = big.fragment.vertex_incidences;
  spliced.fugacities = big.fugacities;
  for (std::size_t e = 0; e < big.fragment.internal_edges.size(); ++e) {
    const Rational& w = big.edge_weights[e];
    if (w == 1) {
      spliced.fragment.internal_edges.push_back(big.fragment.internal_edges[e]);
      spliced.edge_weights.push_back(1);
      continue;
    }
    Integer p = w.get_num(), q = w.get_den();
    MatchingsCircuit gpq = build_gpq(q, p);
    std::string ns = "e" + std::to_string(e) + ":";
    for (auto& id : gpq.fragment.vertex_ids) id = ns + id;
    for (auto& j : gpq.fragment.vertex_incidences)
      for (auto& inc : j) inc = ns + inc;
    for (auto& [a, bb] : gpq.fragment.internal_edges) {
      a = ns + a;
      bb = ns + bb;
    }
    for (auto& a : gpq.fragment.external_edges) a = ns + a;
    spliced.fragment.vertex_ids.insert(spliced.fragment.vertex_ids.end(),
                                       gpq.fragment.vertex_ids.begin(),
                                       gpq.fragment.vertex_ids.end());
    spliced.fragment.vertex_incidences.insert(spliced.fragment.vertex_incidences.end(),
                                              gpq.fragment.vertex_incidences.begin(),
                                              gpq.fragment.vertex_incidences.end());
    spliced.fugacities.insert(spliced.fugacities.end(), gpq.fugacities.begin(),
                              gpq.fugacities.end());
    for (std::size_t k = 0; k < gpq.fragment.internal_edges.size(); ++k) {
      spliced.fragment.internal_edges.push_back(gpq.fragment.internal_edges[k]);
      spliced.edge_weights.push_back(1);
    }
    spliced.fragment.internal_edges.emplace_back(big.fragment.internal_edges[e].first,
                                                 gpq.fragment.external_edges[0]);
    spliced.edge_weights.push_back(1);
    spliced.fragment.internal_edges.emplace_back(gpq.fragment.external_edges[1],
                                                 big.fragment.internal_edges[e].second);
    spliced.edge_weights.push_back(1);
    out.constant *= q;
  }
  validate_matchings_circuit(spliced);

  // Forget weights and fugacities: a multigraph. Drop loops, then subdivide
  // every edge into a path of length three; neither changes the number of
  // perfect matchings, and the result is simple and loop-free.
  std::map<std::string, std::size_t> home;
  for (std::size_t v = 0; v < spliced.fragment.vertex_ids.size(); ++v)
    for (const auto& inc : spliced.fragment.vertex_incidences[v]) home[inc] = v;
  std::size_t n = spliced.fragment.vertex_ids.size();
  std::vector<std::pair<std::size_t, std::size_t>> multi_edges;
  for (const auto& [a, b] : spliced.fragment.internal_edges) {
    std::size_t u = home.at(a), v = home.at(b);
    if (u == v) continue;  // loop
    multi_edges.emplace_back(u, v);
  }
  out.num_vertices = n;
  for (const auto& [u, v] : multi_edges) {
    std::size_t x = out.num_vertices++;
    std::size_t y = out.num_vertices++;
    out.edges.emplace_back(u, x);
    out.edges.emplace_back(x, y);
    out.edges.emplace_back(y, v);
  }
  return out;
}

}  // namespace holant
