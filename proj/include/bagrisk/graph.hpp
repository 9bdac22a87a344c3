#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bagrisk {

using NodeId = std::uint32_t;

enum class GateType { And, Or };

/// A security condition. `prior` is only legal on initial nodes (no parents);
/// an initial node without an explicit prior is compromised with probability 1.
/// `ids_error` is the detector error term p_e folded into the node's CPT.
struct BagNode {
  NodeId id = 0;
  std::string label;
  GateType gate = GateType::Or;
  std::optional<double> prior;
  double ids_error = 0.0;
};

/// parent -> child with the probability of exploiting the vulnerability that
/// links them. Bypass edges (zero-day) are combined noisy-OR style after the
/// node's gate has been evaluated on its regular parents.
struct BagEdge {
  NodeId parent = 0;
  NodeId child = 0;
  double exploit_prob = 0.0;
  bool bypass = false;
};

/// Hard evidence: node -> observed compromised (true) / clean (false).
using EvidenceSet = std::map<NodeId, bool>;

/// Immutable, validated DAG of security conditions.
class BagGraph {
 public:
  BagGraph() = default;

  /// Validates and builds. Throws BagError (CycleDetected, InvalidProbability,
  /// DanglingEdge, DuplicateEdge, InvalidId, InvalidPrior, InvalidEdge).
  static BagGraph build(std::vector<BagNode> nodes, std::vector<BagEdge> edges);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  const std::vector<BagNode>& nodes() const { return nodes_; }
  const std::vector<BagEdge>& edges() const { return edges_; }
  const BagNode& node(NodeId id) const;

  /// Parents in edge-declaration order; this is also the CPT scope order.
  std::span<const NodeId> parents(NodeId id) const;
  std::span<const NodeId> children(NodeId id) const;
  /// Indices into edges(), aligned with parents(id).
  std::span<const std::size_t> in_edges(NodeId id) const;

  std::span<const NodeId> topological_order() const { return topo_; }

  bool is_initial(NodeId id) const { return parents(id).empty(); }
  /// Effective prior of an initial node (1.0 when unset).
  double prior(NodeId id) const;

  std::optional<NodeId> find_label(std::string_view label) const;
  bool contains(NodeId id) const { return id < nodes_.size(); }

 private:
  std::vector<BagNode> nodes_;
  std::vector<BagEdge> edges_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<std::size_t>> in_edges_;
  std::vector<NodeId> topo_;
};

inline BagGraph build_graph(std::vector<BagNode> nodes, std::vector<BagEdge> edges) {
  return BagGraph::build(std::move(nodes), std::move(edges));
}

/// Replaces initial node `node` by one copy per outgoing edge. The first copy
/// keeps the original id; further copies are appended with ids size(), size()+1, ...
/// so every other node keeps its id. Copies are labelled <label>1, <label>2, ...
BagGraph split_initial_node(const BagGraph& g, NodeId node);

/// Adds one parentless node (prior 1, id = size()) with a bypass edge of
/// probability `p_zero` into every originally non-initial node.
BagGraph augment_zero_day(const BagGraph& g, double p_zero);

/// Throws UnknownNode if a key is not a node of `g`.
void validate_evidence(const BagGraph& g, const EvidenceSet& evidence);

bool is_probability(double p);

}  // namespace bagrisk
