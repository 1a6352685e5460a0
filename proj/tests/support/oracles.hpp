#pragma once

// Brute-force oracles for the test suites. Everything here recomputes values
// from the definitions, independently of the library's evaluation paths.

#include <holant/circuit.hpp>
#include <holant/matchings.hpp>
#include <holant/rational.hpp>
#include <holant/signature.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracles {

using holant::Circuit;
using holant::Configuration;
using holant::IndexSet;
using holant::Integer;
using holant::MatchingsCircuit;
using holant::Rational;
using holant::SfoGraph;
using holant::Signature;

// Direct evaluation: enumerate every configuration of all incidences, keep
// the assignments extending the external configuration, sum the products.
inline Rational eval_by_definition(const Circuit& c, std::uint32_t external_bits) {
  std::vector<std::string> all;
  for (const auto& j : c.fragment.vertex_incidences) all.insert(all.end(), j.begin(), j.end());
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < all.size(); ++i) pos[all[i]] = i;
  Rational total = 0;
  for (std::uint64_t word = 0; word < (std::uint64_t{1} << all.size()); ++word) {
    bool ok = true;
    for (const auto& [a, b] : c.fragment.internal_edges)
      if (((word >> pos[a]) & 1u) != ((word >> pos[b]) & 1u)) ok = false;
    for (std::size_t k = 0; k < c.fragment.external_edges.size() && ok; ++k)
      if (((word >> pos[c.fragment.external_edges[k]]) & 1u) !=
          ((external_bits >> k) & 1u))
        ok = false;
    if (!ok) continue;
    Rational prod = 1;
    std::size_t offset = 0;
    for (std::size_t v = 0; v < c.constraints.size(); ++v) {
      std::uint32_t local = 0;
      const auto& jv = c.fragment.vertex_incidences[v];
      for (std::size_t b = 0; b < jv.size(); ++b)
        if ((word >> pos[jv[b]]) & 1u) local |= (std::uint32_t{1} << b);
      prod *= c.constraints[v].value(local);
      if (prod == 0) break;
      offset += jv.size();
    }
    total += prod;
  }
  return total;
}

// Z_k from the definition: total weight of configurations violating exactly
// k internal-edge equalities.
inline Rational z_k_by_definition(const Circuit& c, unsigned k) {
  std::vector<std::string> all;
  for (const auto& j : c.fragment.vertex_incidences) all.insert(all.end(), j.begin(), j.end());
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < all.size(); ++i) pos[all[i]] = i;
  Rational total = 0;
  for (std::uint64_t word = 0; word < (std::uint64_t{1} << all.size()); ++word) {
    unsigned violated = 0;
    for (const auto& [a, b] : c.fragment.internal_edges)
      if (((word >> pos[a]) & 1u) != ((word >> pos[b]) & 1u)) ++violated;
    if (violated != k) continue;
    Rational prod = 1;
    for (std::size_t v = 0; v < c.constraints.size(); ++v) {
      std::uint32_t local = 0;
      const auto& jv = c.fragment.vertex_incidences[v];
      for (std::size_t b = 0; b < jv.size(); ++b)
        if ((word >> pos[jv[b]]) & 1u) local |= (std::uint32_t{1} << b);
      prod *= c.constraints[v].value(local);
      if (prod == 0) break;
    }
    total += prod;
  }
  return total;
}

// Sink-free orientations by brute force. Non-skew edges point to one of the
// two ends; skew edges are both-out or both-in. A vertex with no outgoing
// half-edge is a sink.
inline Integer sfo_count(const SfoGraph& g) {
  Integer count = 0;
  for (std::uint64_t word = 0; word < (std::uint64_t{1} << g.edges.size()); ++word) {
    std::vector<int> outdeg(g.num_vertices, 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& ed = g.edges[e];
      bool flag = (word >> e) & 1u;
      if (ed.skew) {
        if (flag) {  // both ends outwards
          outdeg[ed.u] += ed.u == ed.v ? 2 : 1;
          if (ed.u != ed.v) outdeg[ed.v] += 1;
        }
      } else {
        // flag chooses the head; a loop always leaves its vertex once.
        if (ed.u == ed.v)
          outdeg[ed.u] += 1;
        else
          outdeg[flag ? ed.v : ed.u] += 1;
      }
    }
    bool sink_free = true;
    for (std::size_t v = 0; v < g.num_vertices; ++v)
      if (outdeg[v] == 0) sink_free = false;
    if (sink_free) count += 1;
  }
  return count;
}

// Matchings-circuit signature straight from the weight definition: sum over
// subsets of internal edges, with the external pattern occupying its
// endpoints.
inline Signature mc_signature_by_definition(const MatchingsCircuit& g) {
  std::map<std::string, std::size_t> home;
  for (std::size_t v = 0; v < g.fragment.vertex_ids.size(); ++v)
    for (const auto& inc : g.fragment.vertex_incidences[v]) home[inc] = v;
  std::size_t m = g.fragment.internal_edges.size();
  IndexSet is(g.fragment.external_edges);
  std::vector<Rational> table(is.table_size(), Rational(0));
  for (std::uint32_t ext = 0; ext < is.table_size(); ++ext) {
    for (std::uint64_t word = 0; word < (std::uint64_t{1} << m); ++word) {
      std::vector<int> deg(g.fragment.vertex_ids.size(), 0);
      Rational w = 1;
      for (std::size_t e = 0; e < m; ++e) {
        if (!((word >> e) & 1u)) continue;
        ++deg[home.at(g.fragment.internal_edges[e].first)];
        ++deg[home.at(g.fragment.internal_edges[e].second)];
        w *= g.edge_weights[e];
      }
      for (std::size_t k = 0; k < g.fragment.external_edges.size(); ++k)
        if ((ext >> k) & 1u) ++deg[home.at(g.fragment.external_edges[k])];
      bool ok = true;
      for (std::size_t v = 0; v < deg.size() && ok; ++v) {
        if (deg[v] >= 2) ok = false;
        if (deg[v] == 0) w *= g.fugacities[v];
      }
      if (!ok || w == 0) continue;
      table[ext] += w;
    }
  }
  return Signature(is, std::move(table));
}

// Perfect matchings, counted by always covering the lowest-index uncovered
// vertex. Output-sensitive: fast whenever the graph is sparse or the count
// is moderate, regardless of the vertex count.
inline Integer count_perfect_matchings(std::size_t n,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;  // loops never sit in a matching
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> covered(n, 0);
  Integer count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    std::size_t v = from;
    while (v < n && covered[v]) ++v;
    if (v == n) {
      count += 1;
      return;
    }
    covered[v] = 1;
    for (std::size_t w : adj[v]) {
      if (covered[w]) continue;
      covered[w] = 1;
      rec(v + 1);
      covered[w] = 0;
    }
    covered[v] = 0;
  };
  rec(0);
  return count;
}

// ---------------------------------------------------------------------------
// Random generators (all deterministic from the caller's engine).

inline Rational random_rational(std::mt19937_64& rng, int max_num = 4, int max_den = 3) {
  std::uniform_int_distribution<int> num(0, max_num);
  std::uniform_int_distribution<int> den(1, max_den);
  Rational r(num(rng), den(rng));
  r.canonicalize();
  return r;
}

inline Signature random_signature(std::mt19937_64& rng, const IndexSet& is, bool zero_one,
                                  double zero_chance = 0.4) {
  std::vector<Rational> t(is.table_size());
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& v : t) {
    if (u(rng) < zero_chance)
      v = 0;
    else
      v = zero_one ? Rational(1) : random_rational(rng);
  }
  return Signature(is, std::move(t));
}

enum class Family { ParityNae, Windable, StrictlyTerraced };

inline Signature random_family_signature(std::mt19937_64& rng, const IndexSet& is, Family fam) {
  std::uniform_int_distribution<int> pick(0, 4);
  switch (fam) {
    case Family::ParityNae: {
      int k = pick(rng) % 3;
      if (k == 0) return holant::make_even(is);
      if (k == 1) return holant::make_odd(is);
      return holant::make_nae(is);
    }
    case Family::Windable: {
      int k = pick(rng);
      if (k == 0) return holant::make_even(is);
      if (k == 1) return holant::make_odd(is);
      if (k == 2) return holant::make_nae(is);
      if (k == 3 && is.size() == 2) return holant::make_edge(is, random_rational(rng));
      return holant::make_fugacity(is, random_rational(rng));
    }
    case Family::StrictlyTerraced: {
      int k = pick(rng) % 3;
      if (k == 0) return holant::make_even(is);
      if (k == 1) return holant::make_odd(is);
      return holant::make_nae(is);
    }
  }
  throw std::logic_error("unreachable");
}

struct RandomCircuitSpec {
  std::size_t min_vertices = 1, max_vertices = 4;
  std::size_t min_arity = 1, max_arity = 3;
  std::size_t max_internal_edges = 6;
  std::size_t max_external = 0;  // 0 means closed
  bool require_connected = false;
};

inline Circuit random_circuit(std::mt19937_64& rng, const RandomCircuitSpec& spec,
                              const std::function<Signature(std::mt19937_64&, const IndexSet&)>& make) {
  while (true) {
    std::uniform_int_distribution<std::size_t> nv(spec.min_vertices, spec.max_vertices);
    std::size_t v_count = nv(rng);
    std::vector<std::size_t> arity(v_count);
    std::uniform_int_distribution<std::size_t> na(spec.min_arity, spec.max_arity);
    for (auto& a : arity) a = na(rng);
    std::size_t total = 0;
    for (auto a : arity) total += a;
    if (spec.max_external == 0 && total % 2 != 0) {
      // Closed circuits need an even incidence count.
      if (arity.back() < spec.max_arity)
        ++arity.back();
      else if (arity.back() > spec.min_arity && arity.back() > 1)
        --arity.back();
      else
        continue;
      ++total;
    }
    total = 0;
    for (auto a : arity) total += a;
    std::vector<std::string> pool;
    Circuit c;
    for (std::size_t v = 0; v < v_count; ++v) {
      c.fragment.vertex_ids.push_back("v" + std::to_string(v));
      std::vector<std::string> j;
      for (std::size_t b = 0; b < arity[v]; ++b) {
        j.push_back("v" + std::to_string(v) + "." + std::to_string(b));
        pool.push_back(j.back());
      }
      c.fragment.vertex_incidences.push_back(j);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t pairs = std::min(pool.size() / 2, spec.max_internal_edges);
    while (total - 2 * pairs > spec.max_external && pairs < pool.size() / 2) ++pairs;
    if (total - 2 * pairs > spec.max_external) continue;  // resample shapes
    for (std::size_t e = 0; e < pairs; ++e)
      c.fragment.internal_edges.emplace_back(pool[2 * e], pool[2 * e + 1]);
    for (std::size_t k = 2 * pairs; k < pool.size(); ++k)
      c.fragment.external_edges.push_back(pool[k]);
    for (std::size_t v = 0; v < v_count; ++v)
      c.constraints.push_back(make(rng, IndexSet(c.fragment.vertex_incidences[v])));
    if (spec.require_connected && v_count > 1) {
      std::map<std::string, std::size_t> home;
      for (std::size_t v = 0; v < v_count; ++v)
        for (const auto& inc : c.fragment.vertex_incidences[v]) home[inc] = v;
      std::vector<std::set<std::size_t>> adj(v_count);
      for (const auto& [a, b] : c.fragment.internal_edges) {
        adj[home[a]].insert(home[b]);
        adj[home[b]].insert(home[a]);
      }
      std::vector<char> seen(v_count, 0);
      std::vector<std::size_t> stack{0};
      seen[0] = 1;
      while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w : adj[v])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
      if (std::count(seen.begin(), seen.end(), 1) != static_cast<long>(v_count)) continue;
    }
    holant::validate_circuit(c);
    return c;
  }
}

inline SfoGraph random_sfo_graph(std::mt19937_64& rng, std::size_t max_vertices,
                                 std::size_t max_edges) {
  std::uniform_int_distribution<std::size_t> nv(1, max_vertices);
  SfoGraph g;
  g.num_vertices = nv(rng);
  std::uniform_int_distribution<std::size_t> ne(1, max_edges);
  std::size_t edges = ne(rng);
  std::uniform_int_distribution<std::size_t> pick(0, g.num_vertices - 1);
  std::uniform_int_distribution<int> coin(0, 4);
  for (std::size_t e = 0; e < edges; ++e) {
    SfoGraph::Edge ed;
    ed.u = pick(rng);
    ed.v = pick(rng);
    ed.skew = coin(rng) == 0;
    g.edges.push_back(ed);
  }
  return g;
}

}  // namespace oracles
