#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bagrisk/factor.hpp"
#include "bagrisk/graph.hpp"

namespace bagrisk {

/// Conditional probability table p(child | parents).
///
/// scope = [parents..., child]; the first scope variable is the most
/// significant index bit, so table[(parent_bits << 1) | child_value].
struct Cpt {
  NodeId child = 0;
  std::vector<NodeId> scope;
  std::vector<double> table;

  std::size_t parent_count() const { return scope.empty() ? 0 : scope.size() - 1; }
  /// P(child = T | parents), parent_bits with the first parent as MSB.
  double p_true(std::uint64_t parent_bits) const { return table[(parent_bits << 1) | 1u]; }
  Factor to_factor() const { return Factor(scope, table); }
};

// The free-standing builders bind placeholder ids: parents 0..k-1, child k.

/// AND gate: every precondition must hold, then each exploit must succeed.
Cpt build_and_cpt(std::span<const double> probs);
/// Noisy-OR gate.
Cpt build_or_cpt(std::span<const double> probs);
/// AND gate with detector error probability p_e.
Cpt build_and_cpt_ids(std::span<const double> probs, double p_e);
/// Noisy-OR gate with detector error probability p_e.
Cpt build_or_cpt_ids(std::span<const double> probs, double p_e);
/// Prior of a parentless node: scope [child], P(T) = p.
Cpt prior_cpt(double p);

/// CPT of `node` within `g`: gate over regular parents, bypass parents and the
/// node's ids_error folded in as independent escape terms.
Cpt node_cpt(const BagGraph& g, NodeId node);
/// Every node's CPT as a canonical factor, indexed by NodeId.
std::vector<Factor> cpt_factors(const BagGraph& g);

}  // namespace bagrisk
