#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "bagrisk/factor.hpp"
#include "bagrisk/graph.hpp"

namespace bagrisk {

/// Bipartite variable/factor graph of a BAG. One factor per non-initial
/// node's CPT; the prior of an initial node with exactly one child is folded
/// into that child's factor, any other prior stays a standalone leaf factor.
class FactorGraph {
 public:
  struct FactorNode {
    Factor potential;            // product of the hosted CPTs
    std::vector<NodeId> hosted;  // nodes whose CPTs were multiplied in
  };

  static FactorGraph build(const BagGraph& g);

  std::size_t variable_count() const { return var_factors_.size(); }
  std::size_t factor_count() const { return factors_.size(); }
  const std::vector<FactorNode>& factors() const { return factors_; }
  std::span<const std::size_t> factors_of(NodeId v) const { return var_factors_[v]; }
  /// Factor holding the CPT of `v`.
  std::size_t host_of(NodeId v) const { return host_[v]; }

  /// True iff the undirected bipartite graph has no cycle.
  bool is_tree() const;

 private:
  std::vector<FactorNode> factors_;
  std::vector<std::vector<std::size_t>> var_factors_;
  std::vector<std::size_t> host_;
};

inline FactorGraph build_factor_graph(const BagGraph& g) { return FactorGraph::build(g); }
inline bool is_tree(const FactorGraph& fg) { return fg.is_tree(); }

/// Sum-product on a tree-shaped factor graph with a two-pass schedule rooted,
/// per connected component, at the variable with the highest NodeId.
///
/// The message store belongs to the engine; use one engine per thread.
class BpEngine {
 public:
  using Message = std::array<double, 2>;

  /// Throws NotATree on loopy factor graphs.
  explicit BpEngine(FactorGraph fg);

  /// Full two-pass propagation under `evidence` (replaces any previous evidence).
  std::vector<double> marginals(const EvidenceSet& evidence);

  /// Overwrites the evidence entries in `delta` and recomputes only messages
  /// whose upstream side holds a changed factor. Marginals equal a full pass.
  std::vector<double> update_evidence(const EvidenceSet& delta);

  const EvidenceSet& evidence() const { return evidence_; }
  std::size_t messages_last_pass() const { return messages_last_pass_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Messages on the edge between factor `f` and variable `v`.
  Message factor_to_var(std::size_t f, NodeId v) const;
  Message var_to_factor(NodeId v, std::size_t f) const;

  const FactorGraph& graph() const { return fg_; }

 private:
  struct Edge {
    std::size_t factor;
    NodeId var;
  };
  // Tree nodes: variables are 0..V-1, factors V..V+F-1.
  std::size_t factor_node(std::size_t f) const { return fg_.variable_count() + f; }

  void apply_evidence(const std::vector<std::size_t>& factors);
  void send_up(std::size_t node);
  void send_down(std::size_t node);
  void compute(std::size_t edge, bool to_var);
  std::vector<double> read_marginals() const;
  bool in_subtree(std::size_t node, std::size_t root) const;
  std::size_t edge_id(std::size_t f, NodeId v) const;

  FactorGraph fg_;
  std::vector<Factor> active_;  // potentials with evidence applied
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> factor_edges_;  // per factor, aligned with scope
  std::vector<std::vector<std::size_t>> var_edges_;
  std::vector<Message> to_var_;
  std::vector<Message> to_factor_;

  std::vector<std::size_t> preorder_;
  std::vector<std::size_t> parent_edge_;  // edge to the parent tree node, npos at roots
  std::vector<std::size_t> tin_, tout_;
  std::vector<std::size_t> component_;  // root of each tree node's component

  EvidenceSet evidence_;
  std::vector<bool> dirty_up_;  // per edge: recompute message towards root
  std::vector<bool> dirty_down_;
  bool selective_ = false;
  std::size_t messages_last_pass_ = 0;
};

}  // namespace bagrisk
