#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "signature.hpp"
#include "windability.hpp"

namespace holant {

/// A canonical one-output parity gadget around F. Either the output edge
/// belongs to one of the parity blocks (which partition all of J plus the
/// output), or it directly replaces one incidence of F and the blocks
/// partition the rest. Loops at F are routed through an Even_2 block, so the
/// canonical form needs no loops.
struct ParityGadget {
  bool output_replaces_incidence = false;
  std::size_t replaced_index = 0;                       // mode B only
  std::vector<std::pair<std::uint32_t, int>> blocks;    // (mask over J, parity bit)
  std::uint32_t output_block = 0;                       // mode A: which block holds the output
};

/// (F'(0), F'(1)) for the gadget.
inline std::pair<Rational, Rational> gadget_values(const Signature& f, const ParityGadget& g) {
  std::pair<Rational, Rational> out{0, 0};
  for (int t = 0; t <= 1; ++t) {
    Rational sum = 0;
    for (std::uint32_t x = 0; x < f.table_size(); ++x) {
      if (g.output_replaces_incidence &&
          static_cast<int>((x >> g.replaced_index) & 1u) != t)
        continue;
      bool ok = true;
      for (std::size_t b = 0; b < g.blocks.size() && ok; ++b) {
        int parity = std::popcount(x & g.blocks[b].first) & 1;
        if (!g.output_replaces_incidence && g.output_block == b) parity ^= t;
        if (parity != g.blocks[b].second) ok = false;
      }
      if (ok) sum += f.value(x);
    }
    (t == 0 ? out.first : out.second) = sum;
  }
  return out;
}

namespace detail {

// Set partitions of {0..k-1} as lists of masks, via the usual
// "place each element in an existing block or a new one" recursion.
inline void set_partitions(std::size_t k, const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
  std::vector<std::uint32_t> blocks;
  std::function<void(std::size_t)> rec = [&](std::size_t e) {
    if (e == k) {
      fn(blocks);
      return;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b] |= (std::uint32_t{1} << e);
      rec(e + 1);
      blocks[b] &= ~(std::uint32_t{1} << e);
    }
    blocks.push_back(std::uint32_t{1} << e);
    rec(e + 1);
    blocks.pop_back();
  };
  rec(0);
}

// For a fixed block structure, the candidate ratios group by the vector of
// block parities: bucket the table once, then read off every parity choice.
inline void collect_ratios(const Signature& f, const std::vector<std::uint32_t>& block_masks,
                           std::uint32_t output_flags,  // which blocks see the output edge
                           std::uint32_t replaced_mask, // mode B: incidence carrying the output
                           Rational& best) {
  std::size_t k = block_masks.size();
  std::map<std::uint32_t, Rational> sums[2];
  for (std::uint32_t x = 0; x < f.table_size(); ++x) {
    if (f.value(x) == 0) continue;
    std::uint32_t sig = 0;
    for (std::size_t b = 0; b < k; ++b)
      if (std::popcount(x & block_masks[b]) & 1) sig |= (std::uint32_t{1} << b);
    if (replaced_mask) {
      int t = (x & replaced_mask) ? 1 : 0;
      sums[t][sig] += f.value(x);
    } else {
      sums[0][sig] += f.value(x);
      sums[1][sig ^ output_flags] += f.value(x);
    }
  }
  for (std::uint32_t parity_bits = 0; parity_bits < (std::uint32_t{1} << k); ++parity_bits) {
    auto it1 = sums[1].find(parity_bits);
    if (it1 == sums[1].end() || it1->second == 0) continue;
    auto it0 = sums[0].find(parity_bits);
    Rational f0 = (it0 == sums[0].end()) ? Rational(0) : it0->second;
    Rational ratio = f0 / it1->second;
    if (ratio > best) best = ratio;
  }
}

}  // namespace detail

/*
 * Prat(F): the largest F'(0)/F'(1) over canonical parity gadgets with
 * F'(1) > 0, and 0 for the identically-zero signature. The enumeration
 * covers both attachment modes for the output edge; every parity signature
 * of F equals one of these up to a positive constant, which cancels in the
 * ratio.
 */
inline Rational prat(const Signature& f) {
  std::size_t n = f.arity();
  if (n > 6) throw std::invalid_argument("prat: arity above cap of 6");
  if (f.is_zero()) return Rational(0);
  Rational best = 0;

  // Mode A: blocks partition J plus the output edge. Enumerate partitions of
  // J and, separately, which block (possibly a fresh singleton) holds the
  // output.
  detail::set_partitions(n, [&](const std::vector<std::uint32_t>& blocks) {
    for (std::size_t ob = 0; ob <= blocks.size(); ++ob) {
      // ob == blocks.size() puts the output edge in a block of its own.
      if (ob == blocks.size()) {
        // Lone output block: parity bit 1 forces F'(0) = 0, bit 0 forces
        // F'(1) = 0; neither produces a positive ratio.
        continue;
      }
      detail::collect_ratios(f, blocks, std::uint32_t{1} << ob, 0, best);
    }
  });

  // Mode B: the output edge replaces incidence j*, blocks partition the rest.
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<int> rest;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) rest.push_back(static_cast<int>(i));
    detail::set_partitions(rest.size(), [&](const std::vector<std::uint32_t>& blocks) {
      std::vector<std::uint32_t> translated;
      for (std::uint32_t b : blocks) {
        std::uint32_t mask = 0;
        for (std::size_t i = 0; i < rest.size(); ++i)
          if ((b >> i) & 1u) mask |= (std::uint32_t{1} << rest[i]);
        translated.push_back(mask);
      }
      detail::collect_ratios(f, translated, 0, std::uint32_t{1} << j, best);
    });
  }
  return best;
}

/// The near-assignment weight bound for a closed circuit of strictly
/// terraced constraints: Z2/Z0 <= |E|^2 / 2 * max(1, sum of Prat)^2.
inline Rational ratio_bound(const Circuit& c) {
  if (!c.fragment.closed()) throw std::invalid_argument("ratio_bound: circuit must be closed");
  Rational prat_sum = 0;
  for (const auto& f : c.constraints) {
    if (!is_strictly_terraced(f))
      throw std::invalid_argument("ratio_bound: constraint is not strictly terraced");
    prat_sum += prat(f);
  }
  Rational m(static_cast<long>(c.fragment.internal_edges.size()));
  Rational s = prat_sum < 1 ? Rational(1) : prat_sum;
  return m * m * s * s / 2;
}

struct PairwiseRatioCheck {
  Rational h0, h1, bound;
  bool holds = false;
};

/// H(t) = sum_x f(t; x) g(x), evaluated through the circuit contraction;
/// checks H(0) <= (Prat(f) + Prat(g)) H(1). Requires H(1) > 0.
inline PairwiseRatioCheck pairwise_ratio_bound(const Signature& f, const Signature& g) {
  if (f.arity() != g.arity() + 1)
    throw std::invalid_argument("pairwise_ratio_bound: f must have one more input than g");
  if (!is_strictly_terraced(f) || !is_strictly_terraced(g))
    throw std::invalid_argument("pairwise_ratio_bound: both signatures must be strictly terraced");
  Circuit c;
  std::vector<std::string> jf, jg;
  jf.push_back("t");
  for (std::size_t i = 0; i < g.arity(); ++i) {
    jf.push_back("f." + std::to_string(i));
    jg.push_back("g." + std::to_string(i));
  }
  c.fragment.vertex_ids = {"f", "g"};
  c.fragment.vertex_incidences = {jf, jg};
  for (std::size_t i = 0; i < g.arity(); ++i)
    c.fragment.internal_edges.emplace_back(jf[i + 1], jg[i]);
  c.fragment.external_edges = {"t"};
  c.constraints = {Signature(IndexSet(jf), f.table()), Signature(IndexSet(jg), g.table())};
  Signature h = signature_of(c);
  PairwiseRatioCheck out;
  out.h0 = h.value(0);
  out.h1 = h.value(1);
  if (out.h1 == 0) throw std::invalid_argument("pairwise_ratio_bound: H(1) = 0");
  out.bound = (prat(f) + prat(g)) * out.h1;
  out.holds = out.h0 <= out.bound;
  return out;
}

}  // namespace holant
