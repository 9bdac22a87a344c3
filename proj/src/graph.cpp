#include "bagrisk/graph.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <set>

#include "bagrisk/errors.hpp"

namespace bagrisk {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

namespace {

std::string node_ref(const BagNode& n) {
  return "node " + std::to_string(n.id) + (n.label.empty() ? "" : " (" + n.label + ")");
}

}  // namespace

BagGraph BagGraph::build(std::vector<BagNode> nodes, std::vector<BagEdge> edges) {
  const std::size_t n = nodes.size();
  if (n == 0) throw BagError(ErrorCode::InvalidId, "graph has no nodes");
  std::vector<bool> seen(n, false);
  for (const auto& node : nodes) {
    if (node.id >= n) {
      throw BagError(ErrorCode::InvalidId, "id " + std::to_string(node.id) +
                                               " outside dense range 0.." + std::to_string(n - 1));
    }
    if (seen[node.id]) {
      throw BagError(ErrorCode::InvalidId, "duplicate id " + std::to_string(node.id));
    }
    seen[node.id] = true;
    if (node.prior && !is_probability(*node.prior)) {
      throw BagError(ErrorCode::InvalidProbability, node_ref(node) + ": prior outside [0,1]");
    }
    if (!is_probability(node.ids_error)) {
      throw BagError(ErrorCode::InvalidProbability, node_ref(node) + ": ids_error outside [0,1]");
    }
  }

  BagGraph g;
  g.nodes_.resize(n);
  for (auto& node : nodes) {
    const NodeId id = node.id;
    g.nodes_[id] = std::move(node);
  }
  g.parents_.resize(n);
  g.children_.resize(n);
  g.in_edges_.resize(n);

  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    if (edge.parent >= n || edge.child >= n) {
      throw BagError(ErrorCode::DanglingEdge, "edge " + std::to_string(edge.parent) + "->" +
                                                  std::to_string(edge.child) +
                                                  " references an unknown id");
    }
    if (edge.parent == edge.child) {
      throw BagError(ErrorCode::CycleDetected, "self-loop on node " + std::to_string(edge.parent));
    }
    if (!is_probability(edge.exploit_prob)) {
      throw BagError(ErrorCode::InvalidProbability, "edge " + std::to_string(edge.parent) + "->" +
                                                        std::to_string(edge.child) +
                                                        ": p outside [0,1]");
    }
    if (!pairs.emplace(edge.parent, edge.child).second) {
      throw BagError(ErrorCode::DuplicateEdge, "edge " + std::to_string(edge.parent) + "->" +
                                                   std::to_string(edge.child) + " declared twice");
    }
    g.parents_[edge.child].push_back(edge.parent);
    g.children_[edge.parent].push_back(edge.child);
    g.in_edges_[edge.child].push_back(e);
  }
  g.edges_ = std::move(edges);

  for (NodeId id = 0; id < n; ++id) {
    const auto& node = g.nodes_[id];
    if (g.parents_[id].empty()) {
      if (node.ids_error != 0.0) {
        throw BagError(ErrorCode::InvalidPrior, node_ref(node) + ": ids_error on an initial node");
      }
      continue;
    }
    if (node.prior) {
      throw BagError(ErrorCode::InvalidPrior, node_ref(node) + ": prior set on a node with parents");
    }
    bool has_regular = false;
    for (auto e : g.in_edges_[id]) has_regular = has_regular || !g.edges_[e].bypass;
    if (!has_regular) {
      throw BagError(ErrorCode::InvalidEdge, node_ref(node) + ": only bypass parents");
    }
  }

  // Kahn with a min-heap keeps the order deterministic.
  std::vector<std::size_t> indegree(n);
  for (NodeId id = 0; id < n; ++id) indegree[id] = g.parents_[id].size();
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId id = 0; id < n; ++id) {
    if (indegree[id] == 0) ready.push(id);
  }
  while (!ready.empty()) {
    const NodeId id = ready.top();
    ready.pop();
    g.topo_.push_back(id);
    for (NodeId c : g.children_[id]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (g.topo_.size() != n) {
    throw BagError(ErrorCode::CycleDetected, "edge set contains a directed cycle");
  }
  return g;
}

const BagNode& BagGraph::node(NodeId id) const {
  if (!contains(id)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return nodes_[id];
}

std::span<const NodeId> BagGraph::parents(NodeId id) const {
  if (!contains(id)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return parents_[id];
}

std::span<const NodeId> BagGraph::children(NodeId id) const {
  if (!contains(id)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return children_[id];
}

std::span<const std::size_t> BagGraph::in_edges(NodeId id) const {
  if (!contains(id)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return in_edges_[id];
}

double BagGraph::prior(NodeId id) const { return node(id).prior.value_or(1.0); }

std::optional<NodeId> BagGraph::find_label(std::string_view label) const {
  for (const auto& n : nodes_) {
    if (n.label == label) return n.id;
  }
  return std::nullopt;
}

BagGraph split_initial_node(const BagGraph& g, NodeId node) {
  if (!g.contains(node)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(node));
  if (!g.is_initial(node)) {
    throw BagError(ErrorCode::NotInitialNode, "node " + std::to_string(node) + " has parents");
  }
  std::vector<BagNode> nodes = g.nodes();
  std::vector<BagEdge> edges = g.edges();
  const BagNode original = g.node(node);

  std::size_t copy = 0;
  for (auto& edge : edges) {
    if (edge.parent != node) continue;
    ++copy;
    if (copy == 1) {
      edge.parent = node;
    } else {
      BagNode extra = original;
      extra.id = static_cast<NodeId>(nodes.size());
      nodes.push_back(extra);
      edge.parent = extra.id;
    }
  }
  if (copy > 1) {
    nodes[node].label = original.label + "1";
    for (std::size_t k = 2; k <= copy; ++k) {
      nodes[g.size() + k - 2].label = original.label + std::to_string(k);
    }
  }
  return BagGraph::build(std::move(nodes), std::move(edges));
}

BagGraph augment_zero_day(const BagGraph& g, double p_zero) {
  if (!is_probability(p_zero)) {
    throw BagError(ErrorCode::InvalidProbability, "zero-day probability outside [0,1]");
  }
  std::vector<BagNode> nodes = g.nodes();
  std::vector<BagEdge> edges = g.edges();
  const auto zero = static_cast<NodeId>(nodes.size());
  nodes.push_back(BagNode{zero, "zero_day", GateType::Or, 1.0, 0.0});
  for (NodeId id = 0; id < g.size(); ++id) {
    if (g.is_initial(id)) continue;
    edges.push_back(BagEdge{zero, id, p_zero, true});
  }
  return BagGraph::build(std::move(nodes), std::move(edges));
}

void validate_evidence(const BagGraph& g, const EvidenceSet& evidence) {
  for (const auto& [id, value] : evidence) {
    (void)value;
    if (!g.contains(id)) {
      throw BagError(ErrorCode::UnknownNode, "evidence on unknown node " + std::to_string(id));
    }
  }
}

}  // namespace bagrisk
