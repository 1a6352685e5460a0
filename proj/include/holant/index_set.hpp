#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace holant {

/// An ordered list of distinct incidence labels. Label i maps to bit i of a
/// table index (least significant first), which pins down every serialized
/// table unambiguously.
class IndexSet {
 public:
  static constexpr std::size_t max_arity = 24;

  IndexSet() : labels_(std::make_shared<const std::vector<std::string>>()) {}

  explicit IndexSet(std::vector<std::string> labels) {
    if (labels.size() > max_arity)
      throw std::invalid_argument("IndexSet: arity above cap of 24");
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("IndexSet: duplicate label");
    labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
  }

  std::size_t size() const { return labels_->size(); }
  bool empty() const { return labels_->empty(); }
  const std::string& label(std::size_t i) const { return labels_->at(i); }
  const std::vector<std::string>& labels() const { return *labels_; }
  std::uint32_t table_size() const { return std::uint32_t{1} << labels_->size(); }

  std::optional<std::size_t> position(const std::string& label) const {
    for (std::size_t i = 0; i < labels_->size(); ++i)
      if ((*labels_)[i] == label) return i;
    return std::nullopt;
  }

  bool contains(const std::string& label) const { return position(label).has_value(); }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.labels_ == b.labels_ || *a.labels_ == *b.labels_;
  }
  friend bool operator!=(const IndexSet& a, const IndexSet& b) { return !(a == b); }

 private:
  std::shared_ptr<const std::vector<std::string>> labels_;
};

/// Canonical anonymous index sets "x0".."x{n-1}", handy in tests and gadgets.
inline IndexSet make_index_set(std::size_t n, const std::string& prefix = "x") {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return IndexSet(std::move(labels));
}

/// A 0/1 configuration of an IndexSet, stored as a bit word (label i = bit i).
struct Configuration {
  IndexSet domain;
  std::uint32_t bits = 0;

  Configuration() = default;
  Configuration(IndexSet d, std::uint32_t b) : domain(std::move(d)), bits(b) {
    if (bits >= domain.table_size())
      throw std::invalid_argument("Configuration: bits outside domain");
  }

  bool get(std::size_t i) const { return (bits >> i) & 1u; }
  std::size_t weight() const { return static_cast<std::size_t>(__builtin_popcount(bits)); }

  Configuration flipped(std::size_t i) const {
    Configuration c = *this;
    c.bits ^= (std::uint32_t{1} << i);
    return c;
  }

  Configuration complemented() const {
    Configuration c = *this;
    c.bits = ~c.bits & (domain.table_size() - 1);
    return c;
  }

  friend Configuration operator^(const Configuration& a, const Configuration& b) {
    if (a.domain != b.domain)
      throw std::invalid_argument("Configuration xor: index-set mismatch");
    return Configuration(a.domain, a.bits ^ b.bits);
  }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.domain == b.domain && a.bits == b.bits;
  }

  std::string bit_string() const {
    std::string s(domain.size(), '0');
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (get(i)) s[i] = '1';
    return s;
  }
};

inline std::string bits_to_string(std::uint32_t bits, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t i = 0; i < n; ++i)
    if ((bits >> i) & 1u) s[i] = '1';
  return s;
}

inline std::uint32_t bits_from_string(const std::string& s) {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      bits |= (std::uint32_t{1} << i);
    else if (s[i] != '0')
      throw std::invalid_argument("bits_from_string: expected '0'/'1'");
  }
  return bits;
}

}  // namespace holant
