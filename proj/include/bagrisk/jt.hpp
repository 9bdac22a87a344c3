#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bagrisk/factor.hpp"
#include "bagrisk/graph.hpp"
#include "bagrisk/ve.hpp"

namespace bagrisk {

/// Clique tree induced by a symbolic variable-elimination run.
///
/// Bipartite: factor nodes carry the CPTs assigned to them; cluster nodes hold
/// either the sepset between two adjacent factors or, for a leaf factor, the
/// variables of that factor not covered by its other clusters.
class CliqueTree {
 public:
  struct FactorNode {
    std::vector<NodeId> scope;
    std::vector<NodeId> cpts;            // nodes whose CPTs are assigned here
    std::vector<std::size_t> clusters;   // incident cluster ids
  };
  struct ClusterNode {
    std::vector<NodeId> scope;
    std::vector<std::size_t> factors;    // one (leaf) or two (sepset)
    bool leaf() const { return factors.size() == 1; }
  };

  const std::vector<FactorNode>& factors() const { return factors_; }
  const std::vector<ClusterNode>& clusters() const { return clusters_; }
  /// Number of φ factors the elimination run produced before pruning.
  std::size_t initial_factor_count() const { return initial_factor_count_; }
  const std::vector<NodeId>& elimination_order() const { return order_; }
  std::size_t variable_count() const { return variable_count_; }

  std::size_t max_factor_scope() const;
  /// Σ 2^(|scope|+3) over factor nodes.
  std::uint64_t estimated_bytes() const;

  /// Connected and acyclic as a bipartite graph.
  bool is_tree() const;
  /// Every variable's containing nodes form a connected subtree.
  bool running_intersection_holds() const;
  /// Each CPT assigned exactly once, to a factor whose scope covers it.
  bool assignment_valid(const BagGraph& g) const;

  friend CliqueTree build_clique_tree(const BagGraph& g, const OrderSpec& spec);

 private:
  std::vector<FactorNode> factors_;
  std::vector<ClusterNode> clusters_;
  std::vector<NodeId> order_;
  std::size_t initial_factor_count_ = 0;
  std::size_t variable_count_ = 0;
};

/// Builds the tree from the VE run under `spec` (MinWeight unless told
/// otherwise): one factor per φ, an edge where a τ feeds a later φ, factors
/// whose scope is contained in a neighbour's merged into it, sepset clusters
/// on every edge and one leaf cluster per leaf factor.
CliqueTree build_clique_tree(const BagGraph& g, const OrderSpec& spec = {});

struct JtMetrics {
  std::size_t factor_count = 0;
  std::size_t max_scope = 0;
  std::uint64_t est_bytes = 0;
  double build_seconds = 0.0;
  double calibrate_seconds = 0.0;
  double marginals_seconds = 0.0;
  double requery_seconds = 0.0;
};

struct JtCounters {
  std::size_t ordering_runs = 0;
  std::size_t tree_builds = 0;
  std::size_t calibrations = 0;
  std::size_t messages = 0;
};

/// Shenoy-Shafer propagation over a CliqueTree. The tree, CPT assignment and
/// index maps are built once; calibrate/requery only recompute messages.
///
/// After calibrate() the engine is read-only for marginal queries; calibrate
/// and requery need exclusive access.
class JunctionTree {
 public:
  struct Options {
    OrderSpec order{};
    std::size_t max_scope = kDefaultMaxScope;
  };

  explicit JunctionTree(const BagGraph& g) : JunctionTree(g, Options{}) {}
  JunctionTree(const BagGraph& g, Options options);

  /// Evidence is applied by masking the potential holding each observed
  /// node's CPT, then both message passes run. Throws ImpossibleEvidence, in
  /// which case the previous calibration is restored.
  void calibrate(const EvidenceSet& evidence);

  /// Posterior of `query` from the smallest cluster containing it.
  double marginal(NodeId query) const;
  std::vector<double> all_marginals() const;

  /// Recalibrate under `evidence` on the cached structure; returns all marginals.
  std::vector<double> requery(const EvidenceSet& evidence);

  /// Belief over a cluster scope (normalized joint of the cluster variables).
  Factor cluster_belief(std::size_t cluster) const;
  /// Message from factor node `f` into cluster `c`.
  const Factor& message(std::size_t f, std::size_t c) const;

  const CliqueTree& tree() const { return tree_; }
  const EvidenceSet& evidence() const { return evidence_; }
  bool calibrated() const { return calibrated_; }
  JtMetrics metrics() const;
  const JtCounters& counters() const { return counters_; }

 private:
  struct Link {
    std::size_t cluster;
    SubIndex index;  // factor scope -> cluster scope
  };

  void propagate();
  void send(std::size_t f, std::size_t link);
  Factor unnormalized_cluster_belief(std::size_t c) const;
  std::size_t slot(std::size_t c, std::size_t f) const;

  BagGraph graph_;
  CliqueTree tree_;
  std::size_t max_scope_;
  std::vector<Factor> base_;     // potential per factor node
  std::vector<Factor> active_;   // with evidence applied
  std::vector<std::vector<Link>> links_;
  std::vector<std::array<Factor, 2>> inbox_;  // per cluster, message from factors[slot]
  std::vector<std::size_t> host_;             // node -> factor holding its CPT
  std::vector<std::size_t> query_cluster_;    // node -> cluster answering it (npos: factor)
  std::vector<std::size_t> query_factor_;
  std::vector<std::size_t> schedule_;         // factor preorder from the root
  std::vector<std::size_t> parent_link_;      // per factor, link index toward root (npos: root)
  EvidenceSet evidence_;
  bool calibrated_ = false;
  JtCounters counters_;
  JtMetrics metrics_;
};

}  // namespace bagrisk
