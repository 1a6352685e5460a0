#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "pairing.hpp"
#include "signature.hpp"
#include "simplex.hpp"

namespace holant {

/// F(x) = 0 implies all Hamming neighbours of x share one value.
inline bool is_strictly_terraced(const Signature& f) {
  std::size_t n = f.arity();
  for (std::uint32_t x = 0; x < f.table_size(); ++x) {
    if (f.value(x) != 0) continue;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Rational& a = f.value(x ^ (std::uint32_t{1} << i));
      const Rational& b = f.value(x ^ (std::uint32_t{1} << (i + 1)));
      if (a != b) return false;
    }
  }
  return true;
}

/// Every non-support point has all its Hamming neighbours in the support.
inline bool has_coindependent_support(const Signature& f) {
  std::size_t n = f.arity();
  for (std::uint32_t x = 0; x < f.table_size(); ++x) {
    if (f.value(x) != 0) continue;
    for (std::size_t i = 0; i < n; ++i)
      if (f.value(x ^ (std::uint32_t{1} << i)) == 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 2-decompositions.

/// Values D(x, M) >= 0 over full pairings M of the index set with
/// H(x) = sum_M D(x, M) and D invariant under flipping any pair of M.
struct TwoDecomposition {
  IndexSet index_set;
  std::vector<Pairing> pairings;  // all pairings of {0..n-1}
  std::map<std::pair<std::uint32_t, std::size_t>, Rational> values;

  Rational value(std::uint32_t x, std::size_t pairing_idx) const {
    auto it = values.find({x, pairing_idx});
    return it == values.end() ? Rational(0) : it->second;
  }
};

inline bool verify_two_decomposition(const Signature& h, const TwoDecomposition& d) {
  if (d.index_set != h.index_set()) return false;
  std::size_t n = h.arity();
  std::vector<int> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(static_cast<int>(i));
  std::vector<Pairing> expect = pairings_of(all);
  if (d.pairings != expect) return false;
  for (std::uint32_t x = 0; x < h.table_size(); ++x) {
    Rational sum = 0;
    for (std::size_t m = 0; m < d.pairings.size(); ++m) sum += d.value(x, m);
    if (sum != h.value(x)) return false;
  }
  for (const auto& [key, v] : d.values)
    if (v < 0) return false;
  for (std::uint32_t x = 0; x < h.table_size(); ++x)
    for (std::size_t m = 0; m < d.pairings.size(); ++m)
      for (const auto& s : d.pairings[m])
        if (d.value(x, m) != d.value(x ^ pair_mask(s), m)) return false;
  return true;
}

namespace detail {
// Canonical representative of the orbit of x under flips of pairs of M:
// force the first element of each pair to zero.
inline std::uint32_t orbit_canon(std::uint32_t x, const Pairing& m) {
  for (const auto& s : m)
    if ((x >> s.first) & 1u) x ^= pair_mask(s);
  return x;
}
}  // namespace detail

/// The exact linear system deciding whether h has a 2-decomposition, with the
/// pair-flip equalities eliminated up front: one variable per orbit of x
/// under pair flips, per pairing. Constraint i is the row for configuration
/// x = i in increasing bit order.
inline LinearSystem build_two_decomposition_system(const Signature& h) {
  std::size_t n = h.arity();
  LinearSystem sys;
  if (n % 2 != 0) {
    // No pairings exist; the rows just say 0 = h(x).
    sys.num_vars = 0;
    sys.rows.assign(h.table_size(), {});
    for (std::uint32_t x = 0; x < h.table_size(); ++x) sys.rhs.push_back(h.value(x));
    return sys;
  }
  std::vector<int> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(static_cast<int>(i));
  std::vector<Pairing> pairings = pairings_of(all);
  std::map<std::pair<std::size_t, std::uint32_t>, std::size_t> var_of;
  for (std::size_t m = 0; m < pairings.size(); ++m)
    for (std::uint32_t x = 0; x < h.table_size(); ++x) {
      std::uint32_t rep = detail::orbit_canon(x, pairings[m]);
      if (rep == x) var_of[{m, rep}] = 0;
    }
  std::size_t next = 0;
  for (auto& [key, idx] : var_of) idx = next++;
  sys.num_vars = next;
  sys.rows.assign(h.table_size(), std::vector<Rational>(next, Rational(0)));
  sys.rhs.resize(h.table_size());
  for (std::uint32_t x = 0; x < h.table_size(); ++x) {
    for (std::size_t m = 0; m < pairings.size(); ++m)
      sys.rows[x][var_of.at({m, detail::orbit_canon(x, pairings[m])})] += 1;
    sys.rhs[x] = h.value(x);
  }
  return sys;
}

struct DecompositionResult {
  bool feasible = false;
  TwoDecomposition decomposition;  // when feasible
  FarkasCertificate farkas;        // when infeasible, for build_two_decomposition_system(h)
};

inline DecompositionResult find_two_decomposition(const Signature& h) {
  DecompositionResult out;
  std::size_t n = h.arity();
  std::vector<int> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(static_cast<int>(i));
  if (n % 2 != 0) {
    if (h.is_zero()) {
      out.feasible = true;
      out.decomposition.index_set = h.index_set();
      return out;
    }
    out.feasible = false;
    LinearSystem sys = build_two_decomposition_system(h);
    out.farkas.y.assign(sys.rows.size(), Rational(0));
    for (std::uint32_t x = 0; x < h.table_size(); ++x)
      if (h.value(x) != 0) {
        out.farkas.y[x] = 1;
        break;
      }
    if (!verify_farkas(sys, out.farkas))
      throw std::logic_error("find_two_decomposition: bad odd-arity certificate");
    return out;
  }
  LinearSystem sys = build_two_decomposition_system(h);
  FeasibilityResult lp = solve_equality_feasibility(sys);
  if (!lp.feasible) {
    out.feasible = false;
    out.farkas = lp.farkas;
    return out;
  }
  out.feasible = true;
  out.decomposition.index_set = h.index_set();
  out.decomposition.pairings = pairings_of(all);
  // Re-derive the variable numbering used by the system builder.
  std::map<std::pair<std::size_t, std::uint32_t>, std::size_t> var_of;
  for (std::size_t m = 0; m < out.decomposition.pairings.size(); ++m)
    for (std::uint32_t x = 0; x < h.table_size(); ++x) {
      std::uint32_t rep = detail::orbit_canon(x, out.decomposition.pairings[m]);
      if (rep == x) var_of[{m, rep}] = 0;
    }
  std::size_t next = 0;
  for (auto& [key, idx] : var_of) idx = next++;
  for (std::uint32_t x = 0; x < h.table_size(); ++x)
    for (std::size_t m = 0; m < out.decomposition.pairings.size(); ++m) {
      const Rational& v =
          lp.solution[var_of.at({m, detail::orbit_canon(x, out.decomposition.pairings[m])})];
      if (v != 0) out.decomposition.values[{x, m}] = v;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form certificates for the named families.

inline std::vector<Pairing> all_pairings(std::size_t n) {
  std::vector<int> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(static_cast<int>(i));
  return pairings_of(all);
}

namespace detail {
// First-fit pairing of a sorted element list: consecutive pairs.
inline Pairing first_fit_pairing(const std::vector<int>& elems) {
  Pairing m;
  for (std::size_t i = 0; i + 1 < elems.size(); i += 2)
    m.emplace_back(elems[i], elems[i + 1]);
  return m;
}
}  // namespace detail

/// Parity relations concentrate all mass on one fixed pairing.
inline TwoDecomposition decomposition_for_parity(const IndexSet& is, bool odd) {
  if (is.size() % 2 != 0)
    throw std::invalid_argument("decomposition_for_parity: arity must be even");
  TwoDecomposition d;
  d.index_set = is;
  d.pairings = all_pairings(is.size());
  std::vector<int> all;
  for (std::size_t i = 0; i < is.size(); ++i) all.push_back(static_cast<int>(i));
  Pairing fixed = detail::first_fit_pairing(all);
  std::size_t fixed_idx = 0;
  while (d.pairings[fixed_idx] != fixed) ++fixed_idx;
  for (std::uint32_t x = 0; x < is.table_size(); ++x)
    if ((std::popcount(x) % 2 == 1) == odd) d.values[{x, fixed_idx}] = 1;
  return d;
}

/// The counting construction for EvenNAE: split J into two odd-sum halves,
/// pair each half first-fit, and spread mass 2^{-|J|+2} over the splits.
inline TwoDecomposition decomposition_for_even_nae(const IndexSet& is) {
  std::size_t n = is.size();
  if (n % 2 != 0)
    throw std::invalid_argument("decomposition_for_even_nae: arity must be even");
  TwoDecomposition d;
  d.index_set = is;
  d.pairings = all_pairings(n);
  std::map<Pairing, std::size_t> pairing_idx;
  for (std::size_t m = 0; m < d.pairings.size(); ++m) pairing_idx[d.pairings[m]] = m;
  Rational unit = pow2(2 - static_cast<long>(n));
  for (std::uint32_t subset = 0; subset < (std::uint32_t{1} << n); ++subset) {
    if (std::popcount(subset) % 2 != 0) continue;
    std::vector<int> inside = support_indices(subset, n);
    std::vector<int> outside = support_indices(~subset & ((std::uint32_t{1} << n) - 1), n);
    Pairing m = detail::first_fit_pairing(inside);
    Pairing m2 = detail::first_fit_pairing(outside);
    m.insert(m.end(), m2.begin(), m2.end());
    m = normalized_pairing(m);
    std::size_t mi = pairing_idx.at(m);
    for (std::uint32_t x = 0; x < is.table_size(); ++x) {
      int in_sum = std::popcount(x & subset);
      int out_sum = std::popcount(x & ~subset & ((std::uint32_t{1} << n) - 1));
      if (in_sum % 2 == 1 && out_sum % 2 == 1) d.values[{x, mi}] += unit;
    }
  }
  return d;
}

/// D'(x, M) = D(x xor z, M): a 2-decomposition for the flip by z.
inline TwoDecomposition flip_decomposition(const TwoDecomposition& d, const Configuration& z) {
  if (z.domain != d.index_set)
    throw std::invalid_argument("flip_decomposition: configuration over wrong index set");
  TwoDecomposition out;
  out.index_set = d.index_set;
  out.pairings = d.pairings;
  for (const auto& [key, v] : d.values)
    out.values[{key.first ^ z.bits, key.second}] = v;
  return out;
}

// ---------------------------------------------------------------------------
// Windability witnesses.

/// Witness for even-windability: B(x, y, M) >= 0 over pairings M of the
/// disagreement set, with the product and swap conditions.
struct EvenWindabilityWitness {
  IndexSet index_set;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<Pairing, Rational>> values;

  Rational value(std::uint32_t x, std::uint32_t y, const Pairing& m) const {
    auto it = values.find({x, y});
    if (it == values.end()) return Rational(0);
    auto jt = it->second.find(m);
    return jt == it->second.end() ? Rational(0) : jt->second;
  }
};

/// Witness for windability: same, over pair-and-singleton partitions.
struct WindabilityWitness {
  IndexSet index_set;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<PairPartition, Rational>> values;

  Rational value(std::uint32_t x, std::uint32_t y, const PairPartition& m) const {
    auto it = values.find({x, y});
    if (it == values.end()) return Rational(0);
    auto jt = it->second.find(m);
    return jt == it->second.end() ? Rational(0) : jt->second;
  }
};

inline bool verify_even_witness(const Signature& f, const EvenWindabilityWitness& w) {
  if (w.index_set != f.index_set()) return false;
  std::size_t n = f.arity();
  for (const auto& [key, per_m] : w.values)
    for (const auto& [m, v] : per_m)
      if (v < 0) return false;
  for (std::uint32_t x = 0; x < f.table_size(); ++x) {
    for (std::uint32_t y = 0; y < f.table_size(); ++y) {
      std::vector<Pairing> ms = pairings_of(support_indices(x ^ y, n));
      Rational sum = 0;
      for (const auto& m : ms) sum += w.value(x, y, m);
      if (sum != Rational(f.value(x) * f.value(y))) return false;
      for (const auto& m : ms)
        for (const auto& s : m) {
          std::uint32_t sm = pair_mask(s);
          if (w.value(x, y, m) != w.value(x ^ sm, y ^ sm, m)) return false;
        }
    }
  }
  return true;
}

inline bool verify_witness(const Signature& f, const WindabilityWitness& w) {
  if (w.index_set != f.index_set()) return false;
  std::size_t n = f.arity();
  for (const auto& [key, per_m] : w.values)
    for (const auto& [m, v] : per_m)
      if (v < 0) return false;
  for (std::uint32_t x = 0; x < f.table_size(); ++x) {
    for (std::uint32_t y = 0; y < f.table_size(); ++y) {
      std::vector<PairPartition> ms = pair_singleton_partitions(support_indices(x ^ y, n));
      Rational sum = 0;
      for (const auto& m : ms) sum += w.value(x, y, m);
      if (sum != Rational(f.value(x) * f.value(y))) return false;
      for (const auto& m : ms) {
        for (const auto& s : m.pairs) {
          std::uint32_t sm = pair_mask(s);
          if (w.value(x, y, m) != w.value(x ^ sm, y ^ sm, m)) return false;
        }
        for (int s : m.singletons) {
          std::uint32_t sm = std::uint32_t{1} << s;
          if (w.value(x, y, m) != w.value(x ^ sm, y ^ sm, m)) return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Deciders.

struct PinningRefutation {
  std::map<std::string, int> pinning;  // labels of the analyzed signature
  FarkasCertificate farkas;            // for build_two_decomposition_system(G Gbar)
};

struct EvenWindabilityResult {
  std::optional<EvenWindabilityWitness> witness;
  std::optional<PinningRefutation> refutation;
  bool windable() const { return witness.has_value(); }
};

/*
 * F is even-windable iff every pinning G of F gives a G*Gbar with a
 * 2-decomposition. The decider runs the per-pinning feasibility problems
 * (independently; optionally on several threads) and either assembles a
 * witness from the chosen decompositions, restricting (x, y) to its
 * agreement set for the pinning and its disagreement set for the argument,
 * or reports the first pinning whose system is infeasible.
 */
inline EvenWindabilityResult is_even_windable(const Signature& f, int threads = 1) {
  std::size_t n = f.arity();
  if (n > 6) throw std::invalid_argument("is_even_windable: arity above cap of 6");
  const std::uint32_t full = f.table_size() - 1;

  // Pinning code: base-3 digits, digit i in {free, pin 0, pin 1}.
  std::size_t num_pinnings = 1;
  for (std::size_t i = 0; i < n; ++i) num_pinnings *= 3;
  struct Pin {
    std::uint32_t mask = 0, bits = 0;
  };
  std::vector<Pin> pins(num_pinnings);
  for (std::size_t code = 0; code < num_pinnings; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t digit = c % 3;
      c /= 3;
      if (digit == 1) pins[code].mask |= (std::uint32_t{1} << i);
      if (digit == 2) {
        pins[code].mask |= (std::uint32_t{1} << i);
        pins[code].bits |= (std::uint32_t{1} << i);
      }
    }
  }

  std::vector<DecompositionResult> results(num_pinnings);
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t code = lo; code < hi; ++code) {
      std::map<std::string, int> assignment;
      for (std::size_t i = 0; i < n; ++i)
        if (pins[code].mask & (std::uint32_t{1} << i))
          assignment[f.index_set().label(i)] = (pins[code].bits >> i) & 1u;
      Signature g = pin(f, assignment);
      results[code] = find_two_decomposition(product_with_complement(g));
    }
  };
  if (threads <= 1 || num_pinnings < 8) {
    run_range(0, num_pinnings);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (num_pinnings + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t lo = t * chunk, hi = std::min(num_pinnings, lo + chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  EvenWindabilityResult out;
  for (std::size_t code = 0; code < num_pinnings; ++code) {
    if (results[code].feasible) continue;
    PinningRefutation r;
    for (std::size_t i = 0; i < n; ++i)
      if (pins[code].mask & (std::uint32_t{1} << i))
        r.pinning[f.index_set().label(i)] = (pins[code].bits >> i) & 1u;
    r.farkas = results[code].farkas;
    out.refutation = std::move(r);
    return out;
  }

  // Assemble B from the per-pinning decompositions: for (x, y), the pinning
  // is x on the agreement set and the decomposition argument is x on the
  // disagreement set.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> code_of;  // (mask,bits)
  for (std::size_t code = 0; code < num_pinnings; ++code)
    code_of[{pins[code].mask, pins[code].bits}] = code;

  EvenWindabilityWitness w;
  w.index_set = f.index_set();
  for (std::uint32_t x = 0; x <= full; ++x) {
    for (std::uint32_t y = 0; y <= full; ++y) {
      std::uint32_t diff = x ^ y;
      std::uint32_t agree = full & ~diff;
      const DecompositionResult& dres = results[code_of.at({agree, x & agree})];
      std::vector<int> free_pos = support_indices(diff, n);
      std::uint32_t x_local = 0;
      for (std::size_t i = 0; i < free_pos.size(); ++i)
        if ((x >> free_pos[i]) & 1u) x_local |= (std::uint32_t{1} << i);
      for (std::size_t m = 0; m < dres.decomposition.pairings.size(); ++m) {
        Rational v = dres.decomposition.value(x_local, m);
        if (v == 0) continue;
        Pairing global;
        for (const auto& [a, b] : dres.decomposition.pairings[m])
          global.emplace_back(free_pos[a], free_pos[b]);
        w.values[{x, y}][normalized_pairing(global)] = v;
      }
    }
  }
  out.witness = std::move(w);
  return out;
}

struct WindabilityResult {
  std::optional<WindabilityWitness> witness;
  // The refuting pinning lives over the parity-extended signature's labels.
  std::optional<PinningRefutation> refutation;
  bool windable() const { return witness.has_value(); }
};

/// F is windable iff its parity extension is even-windable; a witness is
/// pulled back by dropping the parity index from every pair.
inline WindabilityResult is_windable(const Signature& f, int threads = 1) {
  if (f.arity() > 5) throw std::invalid_argument("is_windable: arity above cap of 5");
  Signature fe = parity_extend(f);
  EvenWindabilityResult er = is_even_windable(fe, threads);
  WindabilityResult out;
  if (!er.windable()) {
    out.refutation = std::move(er.refutation);
    return out;
  }
  WindabilityWitness w;
  w.index_set = f.index_set();
  for (const auto& [key, per_m] : er.witness->values) {
    std::uint32_t px = key.first, qy = key.second;
    std::uint32_t x = px >> 1, y = qy >> 1;
    for (const auto& [m, v] : per_m) {
      if (v == 0) continue;
      PairPartition nu;
      for (const auto& [a, b] : m) {
        if (a == 0)
          nu.singletons.push_back(b - 1);
        else
          nu.pairs.emplace_back(a - 1, b - 1);
      }
      nu.pairs = normalized_pairing(nu.pairs);
      std::sort(nu.singletons.begin(), nu.singletons.end());
      w.values[{x, y}][nu] += v;
    }
  }
  out.witness = std::move(w);
  return out;
}

/// The arity-3 product inequality: for every x,
/// F(x) F(xbar) <= sum over the three coordinate splits of the crossed products.
inline bool check_arity3_inequality(const Signature& f) {
  if (f.arity() != 3) throw std::invalid_argument("check_arity3_inequality: arity must be 3");
  for (std::uint32_t x = 0; x < 8; ++x) {
    std::uint32_t xb = x ^ 7u;
    Rational lhs = f.value(x) * f.value(xb);
    Rational rhs = f.value(x ^ 4u) * f.value(xb ^ 4u) + f.value(x ^ 2u) * f.value(xb ^ 2u) +
                   f.value(x ^ 6u) * f.value(xb ^ 6u);
    if (lhs > rhs) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Witness composition.

/*
 * Builds a witness for the signature of a circuit from witnesses of its
 * constraints: sum over pairs of extensions, and over per-vertex pairings
 * whose union induces (via link-graph paths through the internal edges) the
 * target pairing of the external disagreement set.
 */
inline EvenWindabilityWitness compose_witness(const Circuit& c,
                                              const std::vector<EvenWindabilityWitness>& per_vertex) {
  validate_circuit(c);
  if (per_vertex.size() != c.constraints.size())
    throw std::invalid_argument("compose_witness: one witness per vertex required");
  for (std::size_t v = 0; v < per_vertex.size(); ++v)
    if (per_vertex[v].index_set != c.constraints[v].index_set())
      throw std::invalid_argument("compose_witness: witness over wrong index set");
  detail::FlatCircuit fc = detail::flatten(c);
  if (fc.num_incidences > 12)
    throw std::invalid_argument("compose_witness: more than 12 incidences");

  std::size_t num_ext = fc.external_incidences.size();
  std::size_t num_edges = fc.internal_edges.size();
  std::size_t num_vertices = c.constraints.size();
  Pairing edge_pairs;
  for (const auto& [a, b] : fc.internal_edges)
    edge_pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
  edge_pairs = normalized_pairing(edge_pairs);
  std::vector<int> ext_position(fc.num_incidences, -1);
  for (std::size_t k = 0; k < num_ext; ++k) ext_position[fc.external_incidences[k]] = static_cast<int>(k);

  // Global configuration bits for a (external, edge-values) combination.
  auto global_bits = [&](std::uint32_t ext, std::uint32_t edges) {
    std::uint64_t g = 0;
    for (std::size_t k = 0; k < num_ext; ++k)
      if ((ext >> k) & 1u) g |= (std::uint64_t{1} << fc.external_incidences[k]);
    for (std::size_t e = 0; e < num_edges; ++e)
      if ((edges >> e) & 1u)
        g |= (std::uint64_t{1} << fc.internal_edges[e].first) |
             (std::uint64_t{1} << fc.internal_edges[e].second);
    return g;
  };
  auto local_bits = [&](std::uint64_t g, std::size_t v) {
    std::uint32_t out = 0;
    std::size_t bit = 0;
    for (std::size_t inc = 0; inc < fc.num_incidences; ++inc) {
      if (fc.incidence_home[inc].first != v) continue;
      if ((g >> inc) & 1u) out |= (std::uint32_t{1} << fc.incidence_home[inc].second);
      ++bit;
    }
    return out;
  };
  std::vector<std::vector<int>> vertex_incidence_ids(num_vertices);
  for (std::size_t inc = 0; inc < fc.num_incidences; ++inc)
    vertex_incidence_ids[fc.incidence_home[inc].first].push_back(static_cast<int>(inc));

  EvenWindabilityWitness w;
  w.index_set = IndexSet(c.fragment.external_edges);
  std::uint32_t ext_count = std::uint32_t{1} << num_ext;
  std::uint32_t edge_count = std::uint32_t{1} << num_edges;
  for (std::uint32_t xa = 0; xa < ext_count; ++xa) {
    for (std::uint32_t ya = 0; ya < ext_count; ++ya) {
      for (std::uint32_t xe = 0; xe < edge_count; ++xe) {
        std::uint64_t gx = global_bits(xa, xe);
        for (std::uint32_t ye = 0; ye < edge_count; ++ye) {
          std::uint64_t gy = global_bits(ya, ye);
          std::uint64_t gdiff = gx ^ gy;
          // Per-vertex pairings of the local disagreement sets.
          std::vector<std::vector<Pairing>> choices(num_vertices);
          bool possible = true;
          for (std::size_t v = 0; v < num_vertices && possible; ++v) {
            std::vector<int> local_diff;
            for (int inc : vertex_incidence_ids[v])
              if ((gdiff >> inc) & 1u) local_diff.push_back(inc);
            choices[v] = pairings_of(local_diff);  // global incidence ids
            if (choices[v].empty() && !local_diff.empty()) possible = false;
            if (choices[v].empty() && local_diff.empty()) choices[v] = {Pairing{}};
          }
          if (!possible) continue;
          // Product loop over the per-vertex choices.
          std::vector<std::size_t> pick(num_vertices, 0);
          while (true) {
            Rational prod = 1;
            Pairing m_union;
            for (std::size_t v = 0; v < num_vertices && prod != 0; ++v) {
              const Pairing& mv = choices[v][pick[v]];
              // Translate to the vertex's local bit indices for the lookup.
              Pairing local;
              for (const auto& [a, b] : mv) {
                int la = -1, lb = -1;
                for (std::size_t k = 0; k < vertex_incidence_ids[v].size(); ++k) {
                  if (vertex_incidence_ids[v][k] == a) la = static_cast<int>(k);
                  if (vertex_incidence_ids[v][k] == b) lb = static_cast<int>(k);
                }
                local.emplace_back(la, lb);
              }
              prod *= per_vertex[v].value(local_bits(gx, v), local_bits(gy, v),
                                          normalized_pairing(local));
              m_union.insert(m_union.end(), mv.begin(), mv.end());
            }
            if (prod != 0) {
              LinkGraph lg = make_link_graph(normalized_pairing(m_union), edge_pairs);
              Pairing induced = induced_external_pairing(lg);
              Pairing external;
              bool all_external = true;
              for (const auto& [a, b] : induced) {
                if (ext_position[a] < 0 || ext_position[b] < 0) {
                  all_external = false;
                  break;
                }
                external.emplace_back(ext_position[a], ext_position[b]);
              }
              if (!all_external)
                throw std::logic_error("compose_witness: path ends at an internal incidence");
              w.values[{xa, ya}][normalized_pairing(external)] += prod;
            }
            // Advance the mixed-radix counter.
            std::size_t v = 0;
            while (v < num_vertices && ++pick[v] == choices[v].size()) pick[v++] = 0;
            if (v == num_vertices) break;
          }
        }
      }
    }
  }
  return w;
}

}  // namespace holant
