#include "bagrisk/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bagrisk/errors.hpp"

namespace bagrisk {

namespace {

std::size_t table_length(std::size_t scope_size) { return std::size_t{1} << scope_size; }

void check_scope_size(std::size_t size, std::size_t max_scope) {
  if (size > max_scope) {
    throw BagError(ErrorCode::ScopeOverflow, "factor scope of " + std::to_string(size) +
                                                 " variables exceeds limit " +
                                                 std::to_string(max_scope));
  }
}

// Inserts bit `value` at position `bit` of `j`.
inline std::size_t insert_bit(std::size_t j, std::size_t bit, std::size_t value) {
  const std::size_t low = j & ((std::size_t{1} << bit) - 1);
  const std::size_t high = (j >> bit) << (bit + 1);
  return high | (value << bit) | low;
}

}  // namespace

SubIndex::SubIndex(std::span<const NodeId> super, std::span<const NodeId> sub) {
  const std::size_t n = super.size();
  std::vector<std::uint32_t> contribution(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto it = std::find(sub.begin(), sub.end(), super[k]);
    if (it == sub.end()) continue;
    const auto l = static_cast<std::size_t>(it - sub.begin());
    contribution[n - 1 - k] = std::uint32_t{1} << (sub.size() - 1 - l);
  }
  const std::size_t chunk_count = std::max<std::size_t>(1, (n + 7) / 8);
  chunks_.resize(chunk_count);
  for (std::size_t c = 0; c < chunk_count; ++c) {
    for (std::uint32_t byte = 0; byte < 256; ++byte) {
      std::uint32_t r = 0;
      for (std::size_t b = 0; b < 8; ++b) {
        const std::size_t bit = 8 * c + b;
        if (bit < n && (byte >> b) & 1u) r += contribution[bit];
      }
      chunks_[c][byte] = r;
    }
  }
}

Factor::Factor(std::vector<NodeId> scope, std::vector<double> table) {
  check_scope_size(scope.size(), 62);
  if (table.size() != table_length(scope.size())) {
    throw BagError(ErrorCode::InvalidFactor, "table length " + std::to_string(table.size()) +
                                                 " does not match scope of " +
                                                 std::to_string(scope.size()));
  }
  for (double v : table) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw BagError(ErrorCode::InvalidFactor, "negative or non-finite table entry");
    }
  }
  std::vector<NodeId> canonical = scope;
  std::sort(canonical.begin(), canonical.end());
  if (std::adjacent_find(canonical.begin(), canonical.end()) != canonical.end()) {
    throw BagError(ErrorCode::InvalidFactor, "duplicate variable in scope");
  }
  if (canonical == scope) {
    scope_ = std::move(scope);
    table_ = std::move(table);
    return;
  }
  const SubIndex to_original(canonical, scope);
  table_.resize(table.size());
  for (std::size_t i = 0; i < table_.size(); ++i) table_[i] = table[to_original(i)];
  scope_ = std::move(canonical);
}

Factor Factor::ones(std::vector<NodeId> canonical_scope) {
  Factor f;
  f.table_.assign(table_length(canonical_scope.size()), 1.0);
  f.scope_ = std::move(canonical_scope);
  return f;
}

bool Factor::contains(NodeId var) const {
  return std::binary_search(scope_.begin(), scope_.end(), var);
}

std::size_t Factor::bit_of(NodeId var) const {
  const auto it = std::lower_bound(scope_.begin(), scope_.end(), var);
  if (it == scope_.end() || *it != var) {
    throw BagError(ErrorCode::VarNotInScope, "variable " + std::to_string(var));
  }
  return scope_.size() - 1 - static_cast<std::size_t>(it - scope_.begin());
}

double Factor::value(const EvidenceSet& assignment) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < scope_.size(); ++k) {
    const auto it = assignment.find(scope_[k]);
    if (it != assignment.end() && it->second) index |= std::size_t{1} << (scope_.size() - 1 - k);
  }
  return table_[index];
}

double Factor::sum() const { return std::accumulate(table_.begin(), table_.end(), 0.0); }

std::vector<NodeId> scope_union(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<NodeId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<NodeId> scope_intersection(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<NodeId> scope_difference(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<NodeId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool scope_subset(std::span<const NodeId> sub, std::span<const NodeId> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

Factor product(const Factor& a, const Factor& b, std::size_t max_scope) {
  const Factor* both[] = {&a, &b};
  return product(std::span<const Factor* const>(both), max_scope);
}

Factor product(std::span<const Factor* const> factors, std::size_t max_scope) {
  std::vector<NodeId> scope;
  for (const Factor* f : factors) scope = scope_union(scope, f->scope());
  check_scope_size(scope.size(), max_scope);

  Factor out = Factor::ones(scope);
  auto table = out.mutable_table();
  for (const Factor* f : factors) {
    if (f->scope().size() == scope.size()) {
      for (std::size_t i = 0; i < table.size(); ++i) table[i] *= (*f)[i];
    } else {
      const SubIndex index(scope, f->scope());
      for (std::size_t i = 0; i < table.size(); ++i) table[i] *= (*f)[index(i)];
    }
  }
  return out;
}

namespace {

template <typename Combine>
Factor eliminate(const Factor& f, NodeId var, Combine combine) {
  const std::size_t bit = f.bit_of(var);
  std::vector<NodeId> scope;
  scope.reserve(f.scope().size() - 1);
  for (NodeId v : f.scope()) {
    if (v != var) scope.push_back(v);
  }
  Factor out = Factor::ones(std::move(scope));
  auto table = out.mutable_table();
  for (std::size_t j = 0; j < table.size(); ++j) {
    table[j] = combine(f[insert_bit(j, bit, 0)], f[insert_bit(j, bit, 1)]);
  }
  return out;
}

}  // namespace

Factor sum_out(const Factor& f, NodeId var) {
  return eliminate(f, var, [](double lo, double hi) { return lo + hi; });
}

Factor max_out(const Factor& f, NodeId var) {
  return eliminate(f, var, [](double lo, double hi) { return std::max(lo, hi); });
}

Factor reduce(const Factor& f, NodeId var, bool value) {
  const std::size_t v = value ? 1 : 0;
  return eliminate(f, var, [v](double lo, double hi) { return v ? hi : lo; });
}

Factor marginalize_onto(const Factor& f, std::span<const NodeId> keep) {
  if (!scope_subset(keep, f.scope())) {
    throw BagError(ErrorCode::VarNotInScope, "marginalization target not within factor scope");
  }
  Factor out = Factor::ones(std::vector<NodeId>(keep.begin(), keep.end()));
  auto table = out.mutable_table();
  if (keep.size() == f.scope().size()) {
    std::copy(f.table().begin(), f.table().end(), table.begin());
    return out;
  }
  std::fill(table.begin(), table.end(), 0.0);
  const SubIndex index(f.scope(), keep);
  for (std::size_t i = 0; i < f.size(); ++i) table[index(i)] += f[i];
  return out;
}

Factor normalize(const Factor& f) {
  const double total = f.sum();
  if (!(total > 0.0)) throw BagError(ErrorCode::ZeroMass, "factor has zero total mass");
  Factor out = f;
  for (double& v : out.mutable_table()) v /= total;
  return out;
}

void multiply_into(Factor& f, const Factor& g) {
  if (!scope_subset(g.scope(), f.scope())) {
    throw BagError(ErrorCode::VarNotInScope, "multiplier scope not within factor scope");
  }
  multiply_into(f, g, SubIndex(f.scope(), g.scope()));
}

void multiply_into(Factor& f, const Factor& g, const SubIndex& index) {
  auto table = f.mutable_table();
  if (g.scope().empty()) {
    const double s = g[0];
    for (double& v : table) v *= s;
    return;
  }
  for (std::size_t i = 0; i < table.size(); ++i) table[i] *= g[index(i)];
}

void mask_evidence(Factor& f, const EvidenceSet& evidence) {
  std::size_t care = 0;
  std::size_t want = 0;
  for (const auto& [var, value] : evidence) {
    if (!f.contains(var)) continue;
    const std::size_t bit = std::size_t{1} << f.bit_of(var);
    care |= bit;
    if (value) want |= bit;
  }
  if (care == 0) return;
  auto table = f.mutable_table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if ((i & care) != want) table[i] = 0.0;
  }
}

}  // namespace bagrisk
