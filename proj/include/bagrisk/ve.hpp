#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "bagrisk/factor.hpp"
#include "bagrisk/graph.hpp"
#include "bagrisk/ordering.hpp"

namespace bagrisk {

/// How an elimination order is obtained: an explicit sequence wins over the
/// heuristic. Explicit sequences are filtered to eliminable variables and
/// completed with any missing ones in ascending id.
struct OrderSpec {
  Heuristic heuristic = Heuristic::MinWeight;
  std::uint64_t seed = 0;
  std::optional<std::vector<NodeId>> explicit_order;
};

struct VeOptions {
  std::size_t max_scope = kDefaultMaxScope;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct VeResult {
  double probability = 0.0;
  std::size_t max_scope = 0;
  /// Σ 2^(|φ|+3) over the product factors created by this run.
  std::uint64_t table_bytes = 0;
};

struct VeSweep {
  std::vector<double> marginals;  // indexed by NodeId
  std::size_t max_scope = 0;      // largest over all queries
  std::uint64_t peak_table_bytes = 0;
};

/// P(query = T | evidence). Evidence is applied by factor reduction; every
/// other non-query variable is summed out in order; the residual factor is
/// normalized, i.e. divided by P(evidence).
/// Throws ImpossibleEvidence, ScopeOverflow, ResourceCap (deadline).
VeResult ve_query(const BagGraph& g, NodeId query, const EvidenceSet& evidence,
                  const OrderSpec& spec = {}, const VeOptions& options = {});

inline double ve_marginal(const BagGraph& g, NodeId query, const EvidenceSet& evidence,
                          const OrderSpec& spec = {}, const VeOptions& options = {}) {
  return ve_query(g, query, evidence, spec, options).probability;
}

/// Runs a full, independent VE per node. One order is computed up front and
/// each query drops its own variable from it; no intermediate result is shared.
VeSweep ve_all_marginals(const BagGraph& g, const EvidenceSet& evidence,
                         const OrderSpec& spec = {}, const VeOptions& options = {});

/// Most probable joint assignment consistent with the evidence (max-product
/// elimination with argmax traceback; ties resolve to F).
EvidenceSet ve_mpe(const BagGraph& g, const EvidenceSet& evidence, const OrderSpec& spec = {});

/// The elimination sequence under `spec`, leaving every node in `keep`
/// uneliminated.
std::vector<NodeId> resolve_order(const BagGraph& g, const OrderSpec& spec,
                                  const std::set<NodeId>& keep);

}  // namespace bagrisk
