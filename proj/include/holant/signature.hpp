#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "index_set.hpp"
#include "rational.hpp"

namespace holant {

/// A weight-function on Boolean configurations of an index set: a dense table
/// of 2^n non-negative rationals in lexicographic order of the bit word.
/// Immutable after construction; cheap to copy around and share.
class Signature {
 public:
  Signature() : index_set_(), table_(1, Rational(0)) {}

  Signature(IndexSet index_set, std::vector<Rational> table)
      : index_set_(std::move(index_set)), table_(std::move(table)) {
    if (table_.size() != index_set_.table_size())
      throw std::invalid_argument("Signature: table size must be 2^n");
    for (auto& v : table_) {
      if (v < 0) throw std::invalid_argument("Signature: negative table entry");
      v.canonicalize();
    }
  }

  const IndexSet& index_set() const { return index_set_; }
  std::size_t arity() const { return index_set_.size(); }
  std::uint32_t table_size() const { return index_set_.table_size(); }
  const std::vector<Rational>& table() const { return table_; }

  const Rational& value(std::uint32_t bits) const { return table_.at(bits); }

  const Rational& at(const Configuration& x) const {
    if (x.domain != index_set_)
      throw std::invalid_argument("Signature::at: configuration over wrong index set");
    return table_[x.bits];
  }

  bool is_zero() const {
    for (const auto& v : table_)
      if (v != 0) return false;
    return true;
  }

  /// True when any two support points are at even Hamming distance.
  bool is_even_function() const {
    int seen_parity = -1;
    for (std::uint32_t x = 0; x < table_size(); ++x) {
      if (table_[x] == 0) continue;
      int p = std::popcount(x) & 1;
      if (seen_parity < 0)
        seen_parity = p;
      else if (seen_parity != p)
        return false;
    }
    return true;
  }

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.index_set_ == b.index_set_ && a.table_ == b.table_;
  }
  friend bool operator!=(const Signature& a, const Signature& b) { return !(a == b); }

 private:
  IndexSet index_set_;
  std::vector<Rational> table_;
};

enum class NamedKind { Even, Odd, Nae, EvenNae, Or, Edge, Fugacity };

inline Signature make_even(const IndexSet& is) {
  std::vector<Rational> t(is.table_size());
  for (std::uint32_t x = 0; x < is.table_size(); ++x)
    t[x] = (std::popcount(x) % 2 == 0) ? 1 : 0;
  return Signature(is, std::move(t));
}

inline Signature make_odd(const IndexSet& is) {
  std::vector<Rational> t(is.table_size());
  for (std::uint32_t x = 0; x < is.table_size(); ++x)
    t[x] = (std::popcount(x) % 2 == 1) ? 1 : 0;
  return Signature(is, std::move(t));
}

// NAE on the empty set is identically zero: no configuration of the empty set
// has both a 0 and a 1. Even on the empty set is 1, Odd is 0.
inline Signature make_nae(const IndexSet& is) {
  std::vector<Rational> t(is.table_size());
  for (std::uint32_t x = 0; x < is.table_size(); ++x) {
    std::size_t w = static_cast<std::size_t>(std::popcount(x));
    t[x] = (w >= 1 && w + 1 <= is.size()) ? 1 : 0;
  }
  return Signature(is, std::move(t));
}

inline Signature make_even_nae(const IndexSet& is) {
  std::vector<Rational> t(is.table_size());
  for (std::uint32_t x = 0; x < is.table_size(); ++x) {
    std::size_t w = static_cast<std::size_t>(std::popcount(x));
    t[x] = (w % 2 == 0 && w >= 1 && w + 1 <= is.size()) ? 1 : 0;
  }
  return Signature(is, std::move(t));
}

inline Signature make_or(const IndexSet& is) {
  std::vector<Rational> t(is.table_size());
  for (std::uint32_t x = 0; x < is.table_size(); ++x) t[x] = (x != 0) ? 1 : 0;
  return Signature(is, std::move(t));
}

inline Signature make_edge(const IndexSet& is, const Rational& w) {
  if (is.size() != 2) throw std::invalid_argument("make_edge: arity must be 2");
  if (w < 0) throw std::invalid_argument("make_edge: negative weight");
  std::vector<Rational> t(4, Rational(0));
  t[0] = 1;
  t[3] = w;
  return Signature(is, std::move(t));
}

inline Signature make_fugacity(const IndexSet& is, const Rational& lambda) {
  if (lambda < 0) throw std::invalid_argument("make_fugacity: negative fugacity");
  std::vector<Rational> t(is.table_size(), Rational(0));
  t[0] = lambda;
  for (std::size_t i = 0; i < is.size(); ++i) t[std::uint32_t{1} << i] = 1;
  return Signature(is, std::move(t));
}

inline Signature make_named(NamedKind kind, const IndexSet& is,
                            const std::optional<Rational>& param = std::nullopt) {
  switch (kind) {
    case NamedKind::Even: return make_even(is);
    case NamedKind::Odd: return make_odd(is);
    case NamedKind::Nae: return make_nae(is);
    case NamedKind::EvenNae: return make_even_nae(is);
    case NamedKind::Or: return make_or(is);
    case NamedKind::Edge:
      if (!param) throw std::invalid_argument("make_named: Edge needs a weight");
      return make_edge(is, *param);
    case NamedKind::Fugacity:
      if (!param) throw std::invalid_argument("make_named: Fugacity needs a fugacity");
      return make_fugacity(is, *param);
  }
  throw std::logic_error("make_named: unknown kind");
}

/// Fixes a subset of inputs to constants; the result is indexed by the
/// remaining labels in their original order.
inline Signature pin(const Signature& f, const std::map<std::string, int>& assignments) {
  const IndexSet& is = f.index_set();
  std::uint32_t pinned_mask = 0, pinned_bits = 0;
  for (const auto& [label, bit] : assignments) {
    auto pos = is.position(label);
    if (!pos) throw std::invalid_argument("pin: unknown label '" + label + "'");
    if (bit != 0 && bit != 1) throw std::invalid_argument("pin: bit must be 0 or 1");
    pinned_mask |= (std::uint32_t{1} << *pos);
    if (bit) pinned_bits |= (std::uint32_t{1} << *pos);
  }
  std::vector<std::string> rest;
  std::vector<std::size_t> rest_pos;
  for (std::size_t i = 0; i < is.size(); ++i) {
    if (!(pinned_mask & (std::uint32_t{1} << i))) {
      rest.push_back(is.label(i));
      rest_pos.push_back(i);
    }
  }
  IndexSet out_is{rest};
  std::vector<Rational> t(out_is.table_size());
  for (std::uint32_t x = 0; x < out_is.table_size(); ++x) {
    std::uint32_t full = pinned_bits;
    for (std::size_t i = 0; i < rest_pos.size(); ++i)
      if ((x >> i) & 1u) full |= (std::uint32_t{1} << rest_pos[i]);
    t[x] = f.value(full);
  }
  return Signature(out_is, std::move(t));
}

/// The flip by y: result(x ^ y) = f(x).
inline Signature flip(const Signature& f, const Configuration& y) {
  if (y.domain != f.index_set())
    throw std::invalid_argument("flip: configuration over wrong index set");
  std::vector<Rational> t(f.table_size());
  for (std::uint32_t x = 0; x < f.table_size(); ++x) t[x ^ y.bits] = f.value(x);
  return Signature(f.index_set(), std::move(t));
}

/// x -> f(complement of x).
inline Signature complement(const Signature& f) {
  return flip(f, Configuration(f.index_set(), f.table_size() - 1));
}

/// x -> f(x) * f(complement of x).
inline Signature product_with_complement(const Signature& f) {
  std::uint32_t all = f.table_size() - 1;
  std::vector<Rational> t(f.table_size());
  for (std::uint32_t x = 0; x < f.table_size(); ++x)
    t[x] = f.value(x) * f.value(x ^ all);
  return Signature(f.index_set(), std::move(t));
}

/// Prepends a parity input p: result(p; x) = f(x) when p + |x| is even,
/// 0 otherwise. The new label defaults to "p", uniquified if taken.
inline Signature parity_extend(const Signature& f, std::string parity_label = "p") {
  const IndexSet& is = f.index_set();
  while (is.contains(parity_label)) parity_label += "'";
  std::vector<std::string> labels;
  labels.push_back(parity_label);
  for (const auto& l : is.labels()) labels.push_back(l);
  IndexSet out_is{labels};
  std::vector<Rational> t(out_is.table_size(), Rational(0));
  for (std::uint32_t x = 0; x < f.table_size(); ++x) {
    std::uint32_t p = static_cast<std::uint32_t>(std::popcount(x) & 1);
    t[(x << 1) | p] = f.value(x);
  }
  return Signature(out_is, std::move(t));
}

/// A table of signed rationals together with a power of sqrt(2); the signed
/// values from the Hadamard transform are quarantined here and never flow
/// back into Signature.
struct SignedSignature {
  IndexSet index_set;
  std::vector<Rational> table;
  long sqrt2_exponent = 0;

  std::uint32_t table_size() const { return index_set.table_size(); }
};

namespace detail {
inline void walsh_hadamard_in_place(std::vector<Rational>& t) {
  for (std::size_t half = 1; half < t.size(); half <<= 1) {
    for (std::size_t block = 0; block < t.size(); block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        Rational a = t[i] + t[i + half];
        Rational b = t[i] - t[i + half];
        t[i] = std::move(a);
        t[i + half] = std::move(b);
      }
    }
  }
}
}  // namespace detail

/// Unnormalized transform: entry at x is sum over y of f(y) * (-1)^{x.y}.
/// The 2^{-n/2} normalization is reported as a sqrt(2) exponent of -n.
inline SignedSignature hadamard_unnormalized(const Signature& f) {
  SignedSignature out{f.index_set(), f.table(), -static_cast<long>(f.arity())};
  detail::walsh_hadamard_in_place(out.table);
  return out;
}

inline SignedSignature hadamard_unnormalized(const SignedSignature& f) {
  SignedSignature out{f.index_set, f.table,
                      f.sqrt2_exponent - static_cast<long>(f.index_set.size())};
  detail::walsh_hadamard_in_place(out.table);
  return out;
}

/// True when the two signed tables denote the same values after accounting
/// for the sqrt(2) exponents.
inline bool signed_equal(const SignedSignature& a, const SignedSignature& b) {
  if (a.index_set != b.index_set) return false;
  long diff = a.sqrt2_exponent - b.sqrt2_exponent;
  if (diff % 2 != 0) {
    // sqrt(2) is irrational: values can only agree if both tables vanish.
    for (const auto& v : a.table)
      if (v != 0) return false;
    for (const auto& v : b.table)
      if (v != 0) return false;
    return true;
  }
  Rational scale = pow2(diff / 2);
  for (std::uint32_t x = 0; x < a.table_size(); ++x)
    if (Rational(a.table[x] * scale) != b.table[x]) return false;
  return true;
}

}  // namespace holant
