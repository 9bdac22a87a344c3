#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bagrisk/graph.hpp"

namespace bagrisk {

inline constexpr std::size_t kDefaultMaxScope = 30;

/// Dense non-negative table over binary variables.
///
/// Scope is kept in ascending NodeId order. The first scope variable is the
/// most significant bit of a table index; T encodes 1 and F encodes 0.
class Factor {
 public:
  /// Unit factor: empty scope, table [1].
  Factor() : table_{1.0} {}

  /// Scope may be given in any order without duplicates; the table is laid
  /// out for that order and is permuted into canonical order.
  Factor(std::vector<NodeId> scope, std::vector<double> table);

  /// All-ones factor over a canonical scope.
  static Factor ones(std::vector<NodeId> canonical_scope);

  const std::vector<NodeId>& scope() const { return scope_; }
  std::span<const double> table() const { return table_; }
  std::span<double> mutable_table() { return table_; }
  std::size_t size() const { return table_.size(); }
  double operator[](std::size_t i) const { return table_[i]; }

  bool contains(NodeId var) const;
  /// Bit position (counted from the least significant bit) of `var`.
  std::size_t bit_of(NodeId var) const;

  /// Entry for a full assignment of the scope (missing vars read as F).
  double value(const EvidenceSet& assignment) const;
  double sum() const;

 private:
  std::vector<NodeId> scope_;
  std::vector<double> table_;
};

/// Maps indices of a table over `super` onto indices of a table over `sub`
/// (both canonical, sub ⊆ super) with one byte-chunk lookup per 8 scope bits.
class SubIndex {
 public:
  SubIndex() = default;
  SubIndex(std::span<const NodeId> super, std::span<const NodeId> sub);

  std::size_t operator()(std::size_t i) const {
    std::size_t r = 0;
    for (std::size_t c = 0; c < chunks_.size(); ++c) r += chunks_[c][(i >> (8 * c)) & 0xFFu];
    return r;
  }

 private:
  std::vector<std::array<std::uint32_t, 256>> chunks_;
};

std::vector<NodeId> scope_union(std::span<const NodeId> a, std::span<const NodeId> b);
std::vector<NodeId> scope_intersection(std::span<const NodeId> a, std::span<const NodeId> b);
std::vector<NodeId> scope_difference(std::span<const NodeId> a, std::span<const NodeId> b);
bool scope_subset(std::span<const NodeId> sub, std::span<const NodeId> super);

/// Throws ScopeOverflow if the product scope exceeds `max_scope`.
Factor product(const Factor& a, const Factor& b, std::size_t max_scope = kDefaultMaxScope);
/// Product of many factors in one pass over the union scope.
Factor product(std::span<const Factor* const> factors, std::size_t max_scope = kDefaultMaxScope);

Factor sum_out(const Factor& f, NodeId var);
Factor max_out(const Factor& f, NodeId var);
Factor reduce(const Factor& f, NodeId var, bool value);
/// Sums out every variable not in `keep` (keep ⊆ scope, canonical).
Factor marginalize_onto(const Factor& f, std::span<const NodeId> keep);
/// Throws ZeroMass when the table sums to zero.
Factor normalize(const Factor& f);

/// In-place f *= g where g.scope ⊆ f.scope.
void multiply_into(Factor& f, const Factor& g);
void multiply_into(Factor& f, const Factor& g, const SubIndex& index);
/// Zeroes every entry of f inconsistent with the evidence on vars in its scope.
void mask_evidence(Factor& f, const EvidenceSet& evidence);

/// Bytes of a dense table over `scope_size` variables at 8 bytes per entry.
constexpr std::uint64_t table_bytes(std::size_t scope_size) {
  return std::uint64_t{1} << (scope_size + 3);
}

}  // namespace bagrisk
