#pragma once

#include <cstddef>
#include <vector>

#include "bagrisk/graph.hpp"

namespace bagrisk {

inline constexpr std::size_t kOracleMaxNodes = 20;

/// P(query = T | evidence) by enumerating all 2^n joint assignments.
/// Throws TooLarge above `max_nodes`, ImpossibleEvidence when P(evidence) = 0.
double joint_oracle(const BagGraph& g, NodeId query, const EvidenceSet& evidence,
                    std::size_t max_nodes = kOracleMaxNodes);

/// Same enumeration, all posteriors at once (indexed by NodeId).
std::vector<double> joint_oracle_all(const BagGraph& g, const EvidenceSet& evidence,
                                     std::size_t max_nodes = kOracleMaxNodes);

}  // namespace bagrisk
