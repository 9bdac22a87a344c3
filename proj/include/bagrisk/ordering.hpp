#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "bagrisk/graph.hpp"

namespace bagrisk {

enum class Heuristic { Random, MinNeighbours, MinFill, MinWeight, WeightedMinFill };

std::string_view to_string(Heuristic h);
/// Accepts the CLI spellings: random, min-neighbours, min-fill, min-weight, weighted-min-fill.
std::optional<Heuristic> parse_heuristic(std::string_view name);

struct EliminationOrder {
  std::vector<NodeId> order;
  Heuristic heuristic = Heuristic::Random;
  std::uint64_t seed = 0;
};

/// Undirected adjacency, one sorted neighbour list per node.
using Adjacency = std::vector<std::vector<NodeId>>;

/// Parents, children and co-parents.
Adjacency moralize(const BagGraph& g);
/// Parents and children only.
Adjacency skeleton(const BagGraph& g);

/// Working graph of a greedy elimination: eliminating a node connects its
/// remaining neighbours pairwise (fill-in) and removes it.
class EliminationGraph {
 public:
  /// `weights[v]` is the MinWeight / WeightedMinFill node weight.
  EliminationGraph(Adjacency adjacency, std::vector<double> weights);

  double score(NodeId v, Heuristic h) const;
  /// Number of edges eliminating `v` would add.
  std::size_t fill_in(NodeId v) const;
  std::span<const NodeId> neighbours(NodeId v) const { return adjacency_[v]; }
  bool eliminated(NodeId v) const { return eliminated_[v]; }
  void eliminate(NodeId v);

 private:
  bool adjacent(NodeId a, NodeId b) const;
  void connect(NodeId a, NodeId b);

  Adjacency adjacency_;
  std::vector<double> weights_;
  std::vector<bool> eliminated_;
};

/// Node weight used by MinWeight: the number of variables in the scope of
/// the node's CPT (parents + 1).
std::vector<double> cpt_scope_weights(const BagGraph& g);

/// The working graph the greedy heuristics start from: the DAG skeleton with
/// CPT-scope weights.
EliminationGraph heuristic_graph(const BagGraph& g);

/// Greedy (or seeded random) order over every node not in `exclude`.
/// Ties break by (score, NodeId) ascending.
EliminationOrder order(const BagGraph& g, Heuristic heuristic, std::uint64_t seed,
                       const std::set<NodeId>& exclude = {});

/// Largest factor scope a variable-elimination run would create when
/// eliminating `order` (no tables are built). At least 1 for a non-empty graph.
std::size_t max_scope_of(const BagGraph& g, std::span<const NodeId> order);
inline std::size_t max_scope_of(const BagGraph& g, const EliminationOrder& o) {
  return max_scope_of(g, o.order);
}

}  // namespace bagrisk
