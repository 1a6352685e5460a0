#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace holant {

/// A set of disjoint index pairs (normalized: a < b inside a pair, pairs
/// sorted by first element).
using Pairing = std::vector<std::pair<int, int>>;

/// A partition into pairs and singletons, also normalized.
struct PairPartition {
  Pairing pairs;
  std::vector<int> singletons;

  friend bool operator<(const PairPartition& a, const PairPartition& b) {
    if (a.pairs != b.pairs) return a.pairs < b.pairs;
    return a.singletons < b.singletons;
  }
  friend bool operator==(const PairPartition& a, const PairPartition& b) {
    return a.pairs == b.pairs && a.singletons == b.singletons;
  }
};

inline Pairing normalized_pairing(Pairing m) {
  for (auto& [a, b] : m)
    if (a > b) std::swap(a, b);
  std::sort(m.begin(), m.end());
  return m;
}

/// All partitions of the given elements into pairs; empty when the count is odd.
inline std::vector<Pairing> pairings_of(std::vector<int> elems) {
  std::sort(elems.begin(), elems.end());
  std::vector<Pairing> out;
  if (elems.size() % 2 != 0) return out;
  Pairing current;
  std::vector<bool> used(elems.size(), false);
  std::function<void()> rec = [&]() {
    std::size_t first = 0;
    while (first < elems.size() && used[first]) ++first;
    if (first == elems.size()) {
      out.push_back(current);
      return;
    }
    used[first] = true;
    for (std::size_t second = first + 1; second < elems.size(); ++second) {
      if (used[second]) continue;
      used[second] = true;
      current.emplace_back(elems[first], elems[second]);
      rec();
      current.pop_back();
      used[second] = false;
    }
    used[first] = false;
  };
  rec();
  return out;
}

/// All partitions of the given elements into pairs and singletons.
inline std::vector<PairPartition> pair_singleton_partitions(std::vector<int> elems) {
  std::sort(elems.begin(), elems.end());
  std::vector<PairPartition> out;
  PairPartition current;
  std::vector<bool> used(elems.size(), false);
  std::function<void()> rec = [&]() {
    std::size_t first = 0;
    while (first < elems.size() && used[first]) ++first;
    if (first == elems.size()) {
      PairPartition p = current;
      std::sort(p.singletons.begin(), p.singletons.end());
      out.push_back(std::move(p));
      return;
    }
    used[first] = true;
    current.singletons.push_back(elems[first]);
    rec();
    current.singletons.pop_back();
    for (std::size_t second = first + 1; second < elems.size(); ++second) {
      if (used[second]) continue;
      used[second] = true;
      current.pairs.emplace_back(elems[first], elems[second]);
      rec();
      current.pairs.pop_back();
      used[second] = false;
    }
    used[first] = false;
  };
  rec();
  return out;
}

inline std::vector<int> support_indices(std::uint32_t bits, std::size_t n) {
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i)
    if ((bits >> i) & 1u) out.push_back(static_cast<int>(i));
  return out;
}

inline std::uint32_t pair_mask(const std::pair<int, int>& s) {
  return (std::uint32_t{1} << s.first) | (std::uint32_t{1} << s.second);
}

// Canonical text encodings, used as JSON keys: pairs "a-b" with a < b and
// singletons bare, comma separated, sorted by first element.
inline std::string encode_pairing(const Pairing& m) {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(m[i].first) + "-" + std::to_string(m[i].second);
  }
  return s;
}

inline std::string encode_pair_partition(const PairPartition& p) {
  std::vector<std::pair<int, std::string>> parts;
  for (const auto& [a, b] : p.pairs)
    parts.emplace_back(a, std::to_string(a) + "-" + std::to_string(b));
  for (int a : p.singletons) parts.emplace_back(a, std::to_string(a));
  std::sort(parts.begin(), parts.end());
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ",";
    s += parts[i].second;
  }
  return s;
}

/// Multigraph overlay of a set M of disjoint pairs with a pairing E: the
/// vertex set is the union of M, every vertex has degree one or two, so the
/// components are paths and cycles.
struct LinkGraph {
  struct Component {
    std::vector<int> vertices;
    bool is_path = false;  // otherwise a cycle
    int end_a = -1, end_b = -1;
  };
  std::vector<Component> components;
};

inline LinkGraph make_link_graph(const Pairing& m, const Pairing& e) {
  std::set<int> verts;
  for (const auto& [a, b] : m) {
    verts.insert(a);
    verts.insert(b);
  }
  // Edge multiset: M plus the E pairs falling inside the vertex set. Pairs
  // in both M and E show up as parallel edges (a two-cycle).
  std::vector<std::pair<int, int>> edges(m.begin(), m.end());
  for (const auto& [a, b] : e)
    if (verts.count(a) && verts.count(b)) edges.emplace_back(a, b);
  std::map<int, std::vector<std::size_t>> incident;
  for (std::size_t id = 0; id < edges.size(); ++id) {
    incident[edges[id].first].push_back(id);
    incident[edges[id].second].push_back(id);
  }
  std::vector<bool> edge_used(edges.size(), false);
  auto walk_from = [&](int start) {
    LinkGraph::Component comp;
    int cur = start;
    comp.vertices.push_back(cur);
    while (true) {
      std::size_t take = edges.size();
      for (std::size_t id : incident[cur])
        if (!edge_used[id]) {
          take = id;
          break;
        }
      if (take == edges.size()) break;
      edge_used[take] = true;
      cur = (edges[take].first == cur) ? edges[take].second : edges[take].first;
      comp.vertices.push_back(cur);
    }
    return comp;
  };

  LinkGraph lg;
  std::set<int> consumed;
  // Paths start at degree-1 vertices (covered by M but not by E internally).
  for (int v : verts) {
    if (incident[v].size() != 1) continue;
    bool fresh = !edge_used[incident[v][0]];
    if (!fresh) continue;
    LinkGraph::Component comp = walk_from(v);
    comp.is_path = true;
    comp.end_a = comp.vertices.front();
    comp.end_b = comp.vertices.back();
    for (int w : comp.vertices) consumed.insert(w);
    lg.components.push_back(std::move(comp));
  }
  // Everything else lies on cycles; the walk returns to its start.
  for (int v : verts) {
    if (consumed.count(v)) continue;
    LinkGraph::Component comp = walk_from(v);
    comp.is_path = false;
    if (comp.vertices.size() > 1 && comp.vertices.front() == comp.vertices.back())
      comp.vertices.pop_back();
    for (int w : comp.vertices) consumed.insert(w);
    lg.components.push_back(std::move(comp));
  }
  return lg;
}

/// The pairing induced on the degree-one vertices: endpoints of each path.
inline Pairing induced_external_pairing(const LinkGraph& lg) {
  Pairing m;
  for (const auto& comp : lg.components)
    if (comp.is_path && comp.end_a != comp.end_b)
      m.emplace_back(comp.end_a, comp.end_b);
  return normalized_pairing(m);
}

}  // namespace holant
