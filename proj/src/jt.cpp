#include "bagrisk/jt.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "bagrisk/cpt.hpp"
#include "bagrisk/errors.hpp"

namespace bagrisk {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PoolItem {
  std::vector<NodeId> scope;
  std::size_t cpt = npos;  // node id of the CPT, or npos for a τ
  std::size_t phi = npos;  // φ that produced this τ
};

}  // namespace

std::size_t CliqueTree::max_factor_scope() const {
  std::size_t s = 0;
  for (const auto& f : factors_) s = std::max(s, f.scope.size());
  return s;
}

std::uint64_t CliqueTree::estimated_bytes() const {
  std::uint64_t total = 0;
  for (const auto& f : factors_) total += table_bytes(f.scope.size());
  return total;
}

bool CliqueTree::is_tree() const {
  if (factors_.empty()) return clusters_.empty();
  std::size_t edges = 0;
  for (const auto& c : clusters_) edges += c.factors.size();
  if (edges != factors_.size() + clusters_.size() - 1) return false;
  // Connected: walk factor -> cluster -> factor.
  std::vector<bool> seen(factors_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t f = stack.back();
    stack.pop_back();
    for (std::size_t c : factors_[f].clusters) {
      for (std::size_t g : clusters_[c].factors) {
        if (!seen[g]) {
          seen[g] = true;
          ++reached;
          stack.push_back(g);
        }
      }
    }
  }
  return reached == factors_.size();
}

bool CliqueTree::running_intersection_holds() const {
  for (NodeId v = 0; v < variable_count_; ++v) {
    auto has = [v](const std::vector<NodeId>& s) { return std::binary_search(s.begin(), s.end(), v); };
    std::size_t holders = 0;
    std::size_t start = npos;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      if (has(factors_[f].scope)) {
        ++holders;
        if (start == npos) start = f;
      }
    }
    for (const auto& c : clusters_) holders += has(c.scope) ? 1 : 0;
    if (holders == 0) continue;
    if (start == npos) return false;  // a cluster variable missing from every factor
    // Flood through nodes that contain v; all holders must be reached.
    std::vector<bool> seen_f(factors_.size(), false);
    std::vector<bool> seen_c(clusters_.size(), false);
    std::vector<std::size_t> stack{start};
    seen_f[start] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t f = stack.back();
      stack.pop_back();
      for (std::size_t c : factors_[f].clusters) {
        if (seen_c[c] || !has(clusters_[c].scope)) continue;
        seen_c[c] = true;
        ++reached;
        for (std::size_t g : clusters_[c].factors) {
          if (!seen_f[g] && has(factors_[g].scope)) {
            seen_f[g] = true;
            ++reached;
            stack.push_back(g);
          }
        }
      }
    }
    if (reached != holders) return false;
  }
  return true;
}

bool CliqueTree::assignment_valid(const BagGraph& g) const {
  std::vector<int> count(g.size(), 0);
  for (const auto& f : factors_) {
    for (NodeId v : f.cpts) {
      ++count[v];
      std::vector<NodeId> scope(g.parents(v).begin(), g.parents(v).end());
      scope.push_back(v);
      std::sort(scope.begin(), scope.end());
      if (!scope_subset(scope, f.scope)) return false;
    }
  }
  return std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
}

CliqueTree build_clique_tree(const BagGraph& g, const OrderSpec& spec) {
  CliqueTree tree;
  tree.variable_count_ = g.size();
  if (g.empty()) return tree;

  std::vector<NodeId> full = resolve_order(g, spec, {});
  const NodeId last = full.back();
  full.pop_back();
  tree.order_ = full;

  std::vector<PoolItem> pool;
  for (NodeId v = 0; v < g.size(); ++v) {
    std::vector<NodeId> scope(g.parents(v).begin(), g.parents(v).end());
    scope.push_back(v);
    std::sort(scope.begin(), scope.end());
    pool.push_back({std::move(scope), v, npos});
  }

  struct Phi {
    std::vector<NodeId> scope;
    std::vector<NodeId> cpts;
  };
  std::vector<Phi> phis;
  std::vector<std::set<std::size_t>> adjacent;

  auto add_phi = [&](Phi phi, const std::vector<std::size_t>& feeders) {
    const std::size_t id = phis.size();
    phis.push_back(std::move(phi));
    adjacent.emplace_back();
    for (std::size_t j : feeders) {
      adjacent[id].insert(j);
      adjacent[j].insert(id);
    }
    return id;
  };

  for (NodeId v : tree.order_) {
    Phi phi;
    std::vector<std::size_t> feeders;
    std::vector<PoolItem> rest;
    for (auto& item : pool) {
      if (!std::binary_search(item.scope.begin(), item.scope.end(), v)) {
        rest.push_back(std::move(item));
        continue;
      }
      phi.scope = scope_union(phi.scope, item.scope);
      if (item.cpt != npos) phi.cpts.push_back(static_cast<NodeId>(item.cpt));
      if (item.phi != npos) feeders.push_back(item.phi);
    }
    pool = std::move(rest);
    if (phi.scope.empty()) continue;
    std::vector<NodeId> tau = phi.scope;
    tau.erase(std::find(tau.begin(), tau.end(), v));
    const std::size_t id = add_phi(std::move(phi), feeders);
    pool.push_back({std::move(tau), npos, id});
  }

  // Whatever is left mentions at most the final variable.
  Phi tail{{last}, {}};
  std::vector<std::size_t> roots;
  std::size_t hub = npos;
  for (const auto& item : pool) {
    if (item.cpt != npos) tail.cpts.push_back(static_cast<NodeId>(item.cpt));
    if (item.phi == npos) continue;
    roots.push_back(item.phi);
    // Prefer a root that still mentions the final variable, so every other
    // root sharing it stays one hop away.
    if (hub == npos || !item.scope.empty()) hub = item.phi;
  }
  if (!tail.cpts.empty()) {
    add_phi(std::move(tail), roots);
  } else if (roots.size() > 1) {
    // Join the remaining components through empty or {last} sepsets.
    for (std::size_t r : roots) {
      if (r == hub) continue;
      adjacent[r].insert(hub);
      adjacent[hub].insert(r);
    }
  }
  tree.initial_factor_count_ = phis.size();

  // Merge factors whose scope is contained in a neighbour's.
  std::vector<bool> alive(phis.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t f = 0; f < phis.size(); ++f) {
      if (!alive[f]) continue;
      for (std::size_t n : adjacent[f]) {
        if (!scope_subset(phis[f].scope, phis[n].scope)) continue;
        auto& cpts = phis[n].cpts;
        cpts.insert(cpts.end(), phis[f].cpts.begin(), phis[f].cpts.end());
        std::sort(cpts.begin(), cpts.end());
        adjacent[n].erase(f);
        for (std::size_t other : adjacent[f]) {
          if (other == n) continue;
          adjacent[other].erase(f);
          adjacent[other].insert(n);
          adjacent[n].insert(other);
        }
        adjacent[f].clear();
        alive[f] = false;
        changed = true;
        break;
      }
    }
  }

  std::vector<std::size_t> renumber(phis.size(), npos);
  for (std::size_t f = 0; f < phis.size(); ++f) {
    if (!alive[f]) continue;
    renumber[f] = tree.factors_.size();
    std::sort(phis[f].cpts.begin(), phis[f].cpts.end());
    tree.factors_.push_back({phis[f].scope, phis[f].cpts, {}});
  }
  for (std::size_t f = 0; f < phis.size(); ++f) {
    if (!alive[f]) continue;
    for (std::size_t n : adjacent[f]) {
      if (n < f) continue;
      const std::size_t a = renumber[f];
      const std::size_t b = renumber[n];
      const std::size_t c = tree.clusters_.size();
      tree.clusters_.push_back(
          {scope_intersection(tree.factors_[a].scope, tree.factors_[b].scope), {a, b}});
      tree.factors_[a].clusters.push_back(c);
      tree.factors_[b].clusters.push_back(c);
    }
  }
  for (std::size_t f = 0; f < tree.factors_.size(); ++f) {
    auto& factor = tree.factors_[f];
    if (factor.clusters.size() > 1) continue;
    std::vector<NodeId> covered;
    for (std::size_t c : factor.clusters) covered = scope_union(covered, tree.clusters_[c].scope);
    auto rest = scope_difference(factor.scope, covered);
    if (rest.empty()) continue;
    factor.clusters.push_back(tree.clusters_.size());
    tree.clusters_.push_back({std::move(rest), {f}});
  }
  return tree;
}

JunctionTree::JunctionTree(const BagGraph& g, Options options)
    : graph_(g), max_scope_(options.max_scope) {
  const auto start = Clock::now();
  tree_ = build_clique_tree(graph_, options.order);
  ++counters_.ordering_runs;
  ++counters_.tree_builds;
  if (tree_.max_factor_scope() > max_scope_) {
    throw BagError(ErrorCode::ScopeOverflow, "clique of " + std::to_string(tree_.max_factor_scope()) +
                                                 " variables exceeds limit " + std::to_string(max_scope_));
  }

  const auto& factors = tree_.factors();
  const auto& clusters = tree_.clusters();
  const auto cpts = cpt_factors(graph_);
  host_.assign(graph_.size(), npos);
  for (std::size_t f = 0; f < factors.size(); ++f) {
    Factor psi = Factor::ones(factors[f].scope);
    for (NodeId v : factors[f].cpts) {
      multiply_into(psi, cpts[v]);
      host_[v] = f;
    }
    base_.push_back(std::move(psi));
    std::vector<Link> links;
    for (std::size_t c : factors[f].clusters) {
      links.push_back({c, SubIndex(factors[f].scope, clusters[c].scope)});
    }
    links_.push_back(std::move(links));
  }
  active_ = base_;
  inbox_.resize(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto& m : inbox_[c]) m = Factor::ones(clusters[c].scope);
  }

  // Preorder of factor nodes from the root (the last factor).
  parent_link_.assign(factors.size(), npos);
  if (!factors.empty()) {
    std::vector<bool> seen(factors.size(), false);
    std::vector<std::size_t> stack{factors.size() - 1};
    seen[factors.size() - 1] = true;
    while (!stack.empty()) {
      const std::size_t f = stack.back();
      stack.pop_back();
      schedule_.push_back(f);
      for (std::size_t c : factors[f].clusters) {
        for (std::size_t g2 : clusters[c].factors) {
          if (seen[g2]) continue;
          seen[g2] = true;
          const auto& back = factors[g2].clusters;
          parent_link_[g2] = static_cast<std::size_t>(std::find(back.begin(), back.end(), c) - back.begin());
          stack.push_back(g2);
        }
      }
    }
  }

  query_cluster_.assign(graph_.size(), npos);
  query_factor_.assign(graph_.size(), npos);
  for (NodeId v = 0; v < graph_.size(); ++v) {
    auto has = [v](const std::vector<NodeId>& s) { return std::binary_search(s.begin(), s.end(), v); };
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (!has(clusters[c].scope)) continue;
      if (query_cluster_[v] == npos || clusters[c].scope.size() < clusters[query_cluster_[v]].scope.size()) {
        query_cluster_[v] = c;
      }
    }
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (!has(factors[f].scope)) continue;
      if (query_factor_[v] == npos || factors[f].scope.size() < factors[query_factor_[v]].scope.size()) {
        query_factor_[v] = f;
      }
    }
  }
  metrics_.build_seconds = seconds_since(start);
}

std::size_t JunctionTree::slot(std::size_t c, std::size_t f) const {
  return tree_.clusters()[c].factors[0] == f ? 0 : 1;
}

void JunctionTree::send(std::size_t f, std::size_t link) {
  ++counters_.messages;
  const auto& clusters = tree_.clusters();
  const Link& target = links_[f][link];
  struct Incoming {
    const Factor* message;
    const SubIndex* index;
  };
  std::vector<Incoming> incoming;
  for (std::size_t l = 0; l < links_[f].size(); ++l) {
    const std::size_t c = links_[f][l].cluster;
    if (l == link || clusters[c].leaf()) continue;
    incoming.push_back({&inbox_[c][1 - slot(c, f)], &links_[f][l].index});
  }
  Factor out = Factor::ones(clusters[target.cluster].scope);
  auto table = out.mutable_table();
  std::fill(table.begin(), table.end(), 0.0);
  const Factor& psi = active_[f];
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double w = psi[i];
    if (w == 0.0) continue;
    for (const auto& in : incoming) w *= (*in.message)[(*in.index)(i)];
    table[target.index(i)] += w;
  }
  inbox_[target.cluster][slot(target.cluster, f)] = std::move(out);
}

void JunctionTree::propagate() {
  for (auto it = schedule_.rbegin(); it != schedule_.rend(); ++it) {
    if (parent_link_[*it] != npos) send(*it, parent_link_[*it]);
  }
  for (std::size_t f : schedule_) {
    for (std::size_t l = 0; l < links_[f].size(); ++l) {
      if (l != parent_link_[f]) send(f, l);
    }
  }
}

void JunctionTree::calibrate(const EvidenceSet& evidence) {
  validate_evidence(graph_, evidence);
  const auto start = Clock::now();
  const EvidenceSet previous = evidence_;
  const bool was_calibrated = calibrated_;

  std::set<std::size_t> touched;
  for (const auto& [v, value] : evidence_) touched.insert(host_[v]);
  for (const auto& [v, value] : evidence) touched.insert(host_[v]);
  evidence_ = evidence;
  for (std::size_t f : touched) {
    active_[f] = base_[f];
    EvidenceSet hosted;
    for (NodeId v : tree_.factors()[f].cpts) {
      if (const auto it = evidence_.find(v); it != evidence_.end()) hosted.insert(*it);
    }
    mask_evidence(active_[f], hosted);
  }
  propagate();
  ++counters_.calibrations;
  calibrated_ = true;

  if (!tree_.factors().empty()) {
    const std::size_t root = schedule_.front();
    double mass = 0.0;
    if (!tree_.factors()[root].clusters.empty()) {
      mass = unnormalized_cluster_belief(tree_.factors()[root].clusters.front()).sum();
    } else {
      mass = active_[root].sum();
    }
    if (!(mass > 0.0)) {
      if (was_calibrated) {
        calibrate(previous);
      } else {
        evidence_ = previous;
        calibrated_ = false;
      }
      throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");
    }
  }
  metrics_.calibrate_seconds = seconds_since(start);
}

Factor JunctionTree::unnormalized_cluster_belief(std::size_t c) const {
  const auto& cluster = tree_.clusters()[c];
  Factor belief = inbox_[c][0];
  if (!cluster.leaf()) {
    auto table = belief.mutable_table();
    const auto other = inbox_[c][1].table();
    for (std::size_t i = 0; i < table.size(); ++i) table[i] *= other[i];
  }
  return belief;
}

Factor JunctionTree::cluster_belief(std::size_t c) const {
  if (!calibrated_) throw BagError(ErrorCode::InvalidSpec, "junction tree not calibrated");
  return normalize(unnormalized_cluster_belief(c));
}

const Factor& JunctionTree::message(std::size_t f, std::size_t c) const { return inbox_.at(c)[slot(c, f)]; }

double JunctionTree::marginal(NodeId query) const {
  if (!graph_.contains(query)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(query));
  if (!calibrated_) throw BagError(ErrorCode::InvalidSpec, "junction tree not calibrated");
  const std::vector<NodeId> target{query};
  Factor belief;
  if (query_cluster_[query] != npos) {
    belief = unnormalized_cluster_belief(query_cluster_[query]);
  } else {
    const std::size_t f = query_factor_[query];
    belief = active_[f];
    for (std::size_t l = 0; l < links_[f].size(); ++l) {
      const std::size_t c = links_[f][l].cluster;
      if (tree_.clusters()[c].leaf()) continue;
      multiply_into(belief, inbox_[c][1 - slot(c, f)], links_[f][l].index);
    }
  }
  const Factor m = marginalize_onto(belief, target);
  const double mass = m[0] + m[1];
  if (!(mass > 0.0)) throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");
  return m[1] / mass;
}

std::vector<double> JunctionTree::all_marginals() const {
  if (!calibrated_) throw BagError(ErrorCode::InvalidSpec, "junction tree not calibrated");
  std::vector<double> out(graph_.size());
  std::map<std::size_t, Factor> beliefs;
  for (NodeId v = 0; v < graph_.size(); ++v) {
    const std::size_t c = query_cluster_[v];
    if (c == npos) {
      out[v] = marginal(v);
      continue;
    }
    auto it = beliefs.find(c);
    if (it == beliefs.end()) it = beliefs.emplace(c, unnormalized_cluster_belief(c)).first;
    const std::vector<NodeId> target{v};
    const Factor m = marginalize_onto(it->second, target);
    const double mass = m[0] + m[1];
    if (!(mass > 0.0)) throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");
    out[v] = m[1] / mass;
  }
  return out;
}

std::vector<double> JunctionTree::requery(const EvidenceSet& evidence) {
  const auto start = Clock::now();
  calibrate(evidence);
  auto out = all_marginals();
  metrics_.requery_seconds = seconds_since(start);
  return out;
}

JtMetrics JunctionTree::metrics() const {
  JtMetrics m = metrics_;
  m.factor_count = tree_.factors().size();
  m.max_scope = tree_.max_factor_scope();
  m.est_bytes = tree_.estimated_bytes();
  return m;
}

}  // namespace bagrisk
