#pragma once

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain.hpp"
#include "circuit.hpp"
#include "matchings.hpp"
#include "signature.hpp"
#include "windability.hpp"

namespace holant {

using Json = nlohmann::json;

// All rationals in files are "p/q" strings (or "p" when integral); floats
// never appear. Object keys are canonicalized by serialization order.

inline Json signature_to_json(const Signature& f) {
  Json j;
  j["labels"] = f.index_set().labels();
  std::vector<std::string> table;
  for (const auto& v : f.table()) table.push_back(to_string(v));
  j["table"] = table;
  return j;
}

namespace detail {
inline const Json& field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end())
    throw std::invalid_argument(std::string("missing field '") + name + "'");
  return *it;
}
}  // namespace detail

inline Signature signature_from_json(const Json& j) {
  std::vector<std::string> labels = detail::field(j, "labels").get<std::vector<std::string>>();
  std::vector<std::string> raw = detail::field(j, "table").get<std::vector<std::string>>();
  std::vector<Rational> table;
  table.reserve(raw.size());
  for (const auto& s : raw) table.push_back(parse_rational(s));
  IndexSet is{labels};
  if (table.size() != is.table_size())
    throw std::invalid_argument("signature: table length must be 2^#labels");
  return Signature(is, std::move(table));
}

inline Json signed_signature_to_json(const SignedSignature& f) {
  Json j;
  j["labels"] = f.index_set.labels();
  std::vector<std::string> table;
  for (const auto& v : f.table) table.push_back(to_string(v));
  j["table"] = table;
  j["sqrt2_exponent"] = f.sqrt2_exponent;
  return j;
}

// ---------------------------------------------------------------------------
// Circuits. The signatures section holds canonical tables; a vertex binds its
// incidences positionally to the named signature's inputs.

inline Json circuit_to_json(const Circuit& c) {
  validate_circuit(c);
  Json j;
  std::vector<std::pair<std::size_t, std::vector<Rational>>> named;  // (arity, table)
  auto name_for = [&](const Signature& f) {
    for (std::size_t k = 0; k < named.size(); ++k)
      if (named[k].first == f.arity() && named[k].second == f.table())
        return "s" + std::to_string(k);
    named.emplace_back(f.arity(), f.table());
    return "s" + std::to_string(named.size() - 1);
  };
  Json vertices = Json::array();
  for (std::size_t v = 0; v < c.constraints.size(); ++v) {
    Json jv;
    jv["id"] = c.fragment.vertex_ids[v];
    jv["incidences"] = c.fragment.vertex_incidences[v];
    jv["signature"] = name_for(c.constraints[v]);
    vertices.push_back(jv);
  }
  Json sigs;
  for (std::size_t k = 0; k < named.size(); ++k) {
    Signature canon(make_index_set(named[k].first), named[k].second);
    sigs["s" + std::to_string(k)] = signature_to_json(canon);
  }
  j["signatures"] = sigs;
  j["vertices"] = vertices;
  Json edges = Json::array();
  for (const auto& [a, b] : c.fragment.internal_edges) edges.push_back(Json::array({a, b}));
  j["internal_edges"] = edges;
  j["external_edges"] = c.fragment.external_edges;
  return j;
}

inline Circuit circuit_from_json(const Json& j) {
  Circuit c;
  const Json& sigs = detail::field(j, "signatures");
  std::map<std::string, Signature> by_name;
  for (auto it = sigs.begin(); it != sigs.end(); ++it)
    by_name.emplace(it.key(), signature_from_json(it.value()));
  for (const Json& jv : detail::field(j, "vertices")) {
    c.fragment.vertex_ids.push_back(detail::field(jv, "id").get<std::string>());
    auto incidences = detail::field(jv, "incidences").get<std::vector<std::string>>();
    std::string name = detail::field(jv, "signature").get<std::string>();
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw std::invalid_argument("circuit: vertex references unknown signature '" + name + "'");
    if (it->second.arity() != incidences.size())
      throw std::invalid_argument("circuit: vertex '" + c.fragment.vertex_ids.back() +
                                  "' arity mismatch with signature '" + name + "'");
    c.constraints.push_back(Signature(IndexSet(incidences), it->second.table()));
    c.fragment.vertex_incidences.push_back(std::move(incidences));
  }
  for (const Json& je : detail::field(j, "internal_edges")) {
    if (!je.is_array() || je.size() != 2)
      throw std::invalid_argument("circuit: internal edge must be a pair");
    c.fragment.internal_edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
  }
  c.fragment.external_edges =
      detail::field(j, "external_edges").get<std::vector<std::string>>();
  validate_circuit(c);
  return c;
}

// ---------------------------------------------------------------------------
// Labelled NAE/parity instances.

inline Json instance_to_json(const LabelledGraphInstance& g) {
  Json j;
  j["type"] = "nae-parity";
  Json vertices = Json::array();
  for (const auto& [id, label] : g.vertices) {
    Json jv;
    jv["id"] = id;
    jv["label"] = label == VertexLabel::Even ? "Even" : label == VertexLabel::Odd ? "Odd" : "NAE";
    vertices.push_back(jv);
  }
  j["vertices"] = vertices;
  Json edges = Json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(Json::array({a, b}));
  j["edges"] = edges;
  return j;
}

inline LabelledGraphInstance instance_from_json(const Json& j) {
  if (detail::field(j, "type").get<std::string>() != "nae-parity")
    throw std::invalid_argument("instance: type must be \"nae-parity\"");
  LabelledGraphInstance g;
  for (const Json& jv : detail::field(j, "vertices")) {
    std::string label = detail::field(jv, "label").get<std::string>();
    std::string lower;
    for (char ch : label) lower += static_cast<char>(std::tolower(ch));
    VertexLabel vl;
    if (lower == "even")
      vl = VertexLabel::Even;
    else if (lower == "odd")
      vl = VertexLabel::Odd;
    else if (lower == "nae")
      vl = VertexLabel::Nae;
    else
      throw std::invalid_argument("instance: unknown label '" + label + "'");
    g.vertices.emplace_back(detail::field(jv, "id").get<std::string>(), vl);
  }
  for (const Json& je : detail::field(j, "edges")) {
    if (!je.is_array() || je.size() != 2)
      throw std::invalid_argument("instance: edge must be a pair of vertex ids");
    g.edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Matchings circuits: circuit-shaped JSON plus weight and fugacity maps.
// Weights are keyed by the edge's incidence pair joined with '~'.

inline Json matchings_to_json(const MatchingsCircuit& g) {
  validate_matchings_circuit(g);
  Json j;
  j["type"] = "matchings-circuit";
  Json vertices = Json::array();
  for (std::size_t v = 0; v < g.fragment.vertex_ids.size(); ++v) {
    Json jv;
    jv["id"] = g.fragment.vertex_ids[v];
    jv["incidences"] = g.fragment.vertex_incidences[v];
    vertices.push_back(jv);
  }
  j["vertices"] = vertices;
  Json edges = Json::array();
  Json weights;
  for (std::size_t e = 0; e < g.fragment.internal_edges.size(); ++e) {
    const auto& [a, b] = g.fragment.internal_edges[e];
    edges.push_back(Json::array({a, b}));
    weights[a + "~" + b] = to_string(g.edge_weights[e]);
  }
  j["internal_edges"] = edges;
  j["external_edges"] = g.fragment.external_edges;
  j["weights"] = weights;
  Json fugacities;
  for (std::size_t v = 0; v < g.fragment.vertex_ids.size(); ++v)
    fugacities[g.fragment.vertex_ids[v]] = to_string(g.fugacities[v]);
  j["fugacities"] = fugacities;
  return j;
}

inline MatchingsCircuit matchings_from_json(const Json& j) {
  if (detail::field(j, "type").get<std::string>() != "matchings-circuit")
    throw std::invalid_argument("matchings circuit: type must be \"matchings-circuit\"");
  MatchingsCircuit g;
  for (const Json& jv : detail::field(j, "vertices")) {
    g.fragment.vertex_ids.push_back(detail::field(jv, "id").get<std::string>());
    g.fragment.vertex_incidences.push_back(
        detail::field(jv, "incidences").get<std::vector<std::string>>());
  }
  const Json& weights = detail::field(j, "weights");
  for (const Json& je : detail::field(j, "internal_edges")) {
    if (!je.is_array() || je.size() != 2)
      throw std::invalid_argument("matchings circuit: internal edge must be a pair");
    std::string a = je[0].get<std::string>(), b = je[1].get<std::string>();
    g.fragment.internal_edges.emplace_back(a, b);
    std::string key = a + "~" + b;
    auto it = weights.find(key);
    if (it == weights.end()) it = weights.find(b + "~" + a);
    if (it == weights.end())
      throw std::invalid_argument("matchings circuit: missing weight for edge " + key);
    g.edge_weights.push_back(parse_rational(it->get<std::string>()));
  }
  g.fragment.external_edges =
      detail::field(j, "external_edges").get<std::vector<std::string>>();
  const Json& fugacities = detail::field(j, "fugacities");
  for (const auto& id : g.fragment.vertex_ids) {
    auto it = fugacities.find(id);
    if (it == fugacities.end())
      throw std::invalid_argument("matchings circuit: missing fugacity for vertex " + id);
    g.fugacities.push_back(parse_rational(it->get<std::string>()));
  }
  validate_matchings_circuit(g);
  return g;
}

// ---------------------------------------------------------------------------
// Certificates.

inline Json two_decomposition_to_json(const TwoDecomposition& d) {
  Json j;
  j["type"] = "two-decomposition";
  j["labels"] = d.index_set.labels();
  Json entries = Json::object();
  for (const auto& [key, v] : d.values) {
    if (v == 0) continue;
    entries[bits_to_string(key.first, d.index_set.size()) + "|" +
            encode_pairing(d.pairings[key.second])] = to_string(v);
  }
  j["entries"] = entries;
  return j;
}

inline Json even_witness_to_json(const EvenWindabilityWitness& w) {
  Json j;
  j["type"] = "even-windability-witness";
  j["labels"] = w.index_set.labels();
  std::size_t n = w.index_set.size();
  Json entries = Json::object();
  for (const auto& [xy, per_m] : w.values)
    for (const auto& [m, v] : per_m) {
      if (v == 0) continue;
      entries[bits_to_string(xy.first, n) + "|" + bits_to_string(xy.second, n) + "|" +
              encode_pairing(m)] = to_string(v);
    }
  j["entries"] = entries;
  return j;
}

inline Json witness_to_json(const WindabilityWitness& w) {
  Json j;
  j["type"] = "windability-witness";
  j["labels"] = w.index_set.labels();
  std::size_t n = w.index_set.size();
  Json entries = Json::object();
  for (const auto& [xy, per_m] : w.values)
    for (const auto& [m, v] : per_m) {
      if (v == 0) continue;
      entries[bits_to_string(xy.first, n) + "|" + bits_to_string(xy.second, n) + "|" +
              encode_pair_partition(m)] = to_string(v);
    }
  j["entries"] = entries;
  return j;
}

inline Json refutation_to_json(const PinningRefutation& r, const std::vector<std::string>& labels) {
  Json j;
  j["type"] = "infeasibility-certificate";
  j["labels"] = labels;
  Json pinning = Json::object();
  for (const auto& [label, bit] : r.pinning) pinning[label] = bit;
  j["pinning"] = pinning;
  Json dual = Json::array();
  for (const auto& v : r.farkas.y) dual.push_back(to_string(v));
  j["dual"] = dual;
  j["constraint_ordering"] =
      "one row per configuration of the unpinned labels, in increasing bit-word "
      "order with label 0 as the least significant bit; rows state that the "
      "orbit variables of G*Gbar sum to its table value";
  return j;
}

// ---------------------------------------------------------------------------
// Perfect-matching output: a line-oriented edge list.

inline std::string pm_graph_to_text(const PmGraph& g) {
  std::ostringstream out;
  out << "pm " << g.num_vertices << " " << g.edges.size() << " " << to_string(g.constant)
      << "\n";
  for (const auto& [u, v] : g.edges) out << u << " " << v << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Files.

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file '" + path + "' for writing");
  out << text;
}

enum class FileKind { Signature, Circuit, Instance, Matchings };

inline FileKind detect_kind(const Json& j) {
  if (j.contains("type")) {
    std::string type = j["type"].get<std::string>();
    if (type == "nae-parity") return FileKind::Instance;
    if (type == "matchings-circuit") return FileKind::Matchings;
    throw std::invalid_argument("unknown file type '" + type + "'");
  }
  if (j.contains("table")) return FileKind::Signature;
  if (j.contains("vertices")) return FileKind::Circuit;
  throw std::invalid_argument("unrecognized file contents");
}

inline std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace holant
