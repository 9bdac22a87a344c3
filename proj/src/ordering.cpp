#include "bagrisk/ordering.hpp"

#include <algorithm>
#include <limits>

#include "bagrisk/errors.hpp"
#include "bagrisk/rng.hpp"

namespace bagrisk {

std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::Random: return "random";
    case Heuristic::MinNeighbours: return "min-neighbours";
    case Heuristic::MinFill: return "min-fill";
    case Heuristic::MinWeight: return "min-weight";
    case Heuristic::WeightedMinFill: return "weighted-min-fill";
  }
  return "random";
}

std::optional<Heuristic> parse_heuristic(std::string_view name) {
  for (auto h : {Heuristic::Random, Heuristic::MinNeighbours, Heuristic::MinFill,
                 Heuristic::MinWeight, Heuristic::WeightedMinFill}) {
    if (to_string(h) == name) return h;
  }
  return std::nullopt;
}

namespace {

void insert_sorted(std::vector<NodeId>& v, NodeId x) {
  const auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

Adjacency skeleton(const BagGraph& g) {
  Adjacency adj(g.size());
  for (const auto& e : g.edges()) {
    insert_sorted(adj[e.parent], e.child);
    insert_sorted(adj[e.child], e.parent);
  }
  return adj;
}

Adjacency moralize(const BagGraph& g) {
  Adjacency adj = skeleton(g);
  for (NodeId v = 0; v < g.size(); ++v) {
    const auto parents = g.parents(v);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      for (std::size_t j = i + 1; j < parents.size(); ++j) {
        insert_sorted(adj[parents[i]], parents[j]);
        insert_sorted(adj[parents[j]], parents[i]);
      }
    }
  }
  return adj;
}

EliminationGraph::EliminationGraph(Adjacency adjacency, std::vector<double> weights)
    : adjacency_(std::move(adjacency)),
      weights_(std::move(weights)),
      eliminated_(adjacency_.size(), false) {}

bool EliminationGraph::adjacent(NodeId a, NodeId b) const {
  return std::binary_search(adjacency_[a].begin(), adjacency_[a].end(), b);
}

void EliminationGraph::connect(NodeId a, NodeId b) {
  insert_sorted(adjacency_[a], b);
  insert_sorted(adjacency_[b], a);
}

std::size_t EliminationGraph::fill_in(NodeId v) const {
  const auto& nb = adjacency_[v];
  std::size_t missing = 0;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (std::size_t j = i + 1; j < nb.size(); ++j) {
      if (!adjacent(nb[i], nb[j])) ++missing;
    }
  }
  return missing;
}

double EliminationGraph::score(NodeId v, Heuristic h) const {
  const auto& nb = adjacency_[v];
  switch (h) {
    case Heuristic::Random:
      return 0.0;
    case Heuristic::MinNeighbours:
      return static_cast<double>(nb.size());
    case Heuristic::MinFill:
      return static_cast<double>(fill_in(v));
    case Heuristic::MinWeight: {
      double w = 1.0;
      for (NodeId u : nb) w *= weights_[u];
      return w;
    }
    case Heuristic::WeightedMinFill: {
      double total = 0.0;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
          if (!adjacent(nb[i], nb[j])) total += weights_[nb[i]] * weights_[nb[j]];
        }
      }
      return total;
    }
  }
  return 0.0;
}

void EliminationGraph::eliminate(NodeId v) {
  const std::vector<NodeId> nb = adjacency_[v];
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (std::size_t j = i + 1; j < nb.size(); ++j) connect(nb[i], nb[j]);
  }
  for (NodeId u : nb) {
    auto& list = adjacency_[u];
    list.erase(std::lower_bound(list.begin(), list.end(), v));
  }
  adjacency_[v].clear();
  eliminated_[v] = true;
}

std::vector<double> cpt_scope_weights(const BagGraph& g) {
  std::vector<double> w(g.size());
  for (NodeId v = 0; v < g.size(); ++v) w[v] = static_cast<double>(g.parents(v).size() + 1);
  return w;
}

EliminationGraph heuristic_graph(const BagGraph& g) {
  return EliminationGraph(skeleton(g), cpt_scope_weights(g));
}

EliminationOrder order(const BagGraph& g, Heuristic heuristic, std::uint64_t seed,
                       const std::set<NodeId>& exclude) {
  for (NodeId v : exclude) {
    if (!g.contains(v)) throw BagError(ErrorCode::UnknownNode, "excluded node " + std::to_string(v));
  }
  EliminationOrder result{{}, heuristic, seed};
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!exclude.contains(v)) candidates.push_back(v);
  }
  if (heuristic == Heuristic::Random) {
    Rng rng(seed);
    rng.shuffle(candidates);
    result.order = std::move(candidates);
    return result;
  }

  EliminationGraph work = heuristic_graph(g);
  const bool second_order = heuristic == Heuristic::MinFill || heuristic == Heuristic::WeightedMinFill;
  std::vector<double> score(g.size(), 0.0);
  std::vector<bool> pending(g.size(), false);
  for (NodeId v : candidates) {
    score[v] = work.score(v, heuristic);
    pending[v] = true;
  }
  std::vector<bool> dirty(g.size(), false);
  for (std::size_t step = 0; step < candidates.size(); ++step) {
    NodeId best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    bool found = false;
    for (NodeId v : candidates) {
      if (!pending[v]) continue;
      if (!found || score[v] < best_score) {
        best = v;
        best_score = score[v];
        found = true;
      }
    }
    pending[best] = false;
    result.order.push_back(best);

    // Only scores within distance one (two for fill-based scores) move.
    std::vector<NodeId> touched(work.neighbours(best).begin(), work.neighbours(best).end());
    work.eliminate(best);
    std::vector<NodeId> refresh;
    for (NodeId u : touched) {
      if (!dirty[u]) {
        dirty[u] = true;
        refresh.push_back(u);
      }
      if (second_order) {
        for (NodeId w : work.neighbours(u)) {
          if (!dirty[w]) {
            dirty[w] = true;
            refresh.push_back(w);
          }
        }
      }
    }
    for (NodeId u : refresh) {
      dirty[u] = false;
      if (pending[u]) score[u] = work.score(u, heuristic);
    }
  }
  return result;
}

std::size_t max_scope_of(const BagGraph& g, std::span<const NodeId> elimination) {
  EliminationGraph work(moralize(g), std::vector<double>(g.size(), 1.0));
  std::size_t max_scope = g.empty() ? 0 : 1;
  for (NodeId v : elimination) {
    if (!g.contains(v)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(v));
    if (work.eliminated(v)) continue;
    max_scope = std::max(max_scope, work.neighbours(v).size() + 1);
    work.eliminate(v);
  }
  return max_scope;
}

}  // namespace bagrisk
