#include "bagrisk/bp.hpp"

#include <algorithm>
#include <numeric>

#include "bagrisk/cpt.hpp"
#include "bagrisk/errors.hpp"

namespace bagrisk {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

FactorGraph FactorGraph::build(const BagGraph& g) {
  FactorGraph fg;
  const auto cpts = cpt_factors(g);
  fg.var_factors_.resize(g.size());
  fg.host_.assign(g.size(), npos);

  auto merged_prior = [&g](NodeId v) { return g.is_initial(v) && g.children(v).size() == 1; };

  for (NodeId v = 0; v < g.size(); ++v) {
    if (merged_prior(v)) continue;
    FactorNode node{cpts[v], {v}};
    if (!g.is_initial(v)) {
      for (NodeId p : g.parents(v)) {
        if (!merged_prior(p)) continue;
        node.potential = product(node.potential, cpts[p]);
        node.hosted.push_back(p);
      }
    }
    for (NodeId h : node.hosted) fg.host_[h] = fg.factors_.size();
    fg.factors_.push_back(std::move(node));
  }
  for (std::size_t f = 0; f < fg.factors_.size(); ++f) {
    for (NodeId v : fg.factors_[f].potential.scope()) fg.var_factors_[v].push_back(f);
  }
  return fg;
}

bool FactorGraph::is_tree() const {
  const std::size_t vars = variable_count();
  DisjointSets sets(vars + factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    for (NodeId v : factors_[f].potential.scope()) {
      if (!sets.unite(v, vars + f)) return false;
    }
  }
  return true;
}

BpEngine::BpEngine(FactorGraph fg) : fg_(std::move(fg)) {
  if (!fg_.is_tree()) {
    throw BagError(ErrorCode::NotATree, "factor graph has a cycle; use the junction tree engine");
  }
  const std::size_t vars = fg_.variable_count();
  const std::size_t factors = fg_.factor_count();
  factor_edges_.resize(factors);
  var_edges_.resize(vars);
  for (std::size_t f = 0; f < factors; ++f) {
    active_.push_back(fg_.factors()[f].potential);
    for (NodeId v : fg_.factors()[f].potential.scope()) {
      factor_edges_[f].push_back(edges_.size());
      var_edges_[v].push_back(edges_.size());
      edges_.push_back({f, v});
    }
  }
  to_var_.assign(edges_.size(), Message{1.0, 1.0});
  to_factor_.assign(edges_.size(), Message{1.0, 1.0});

  // Root each component at its highest variable id and record a DFS order.
  const std::size_t total = vars + factors;
  parent_edge_.assign(total, npos);
  tin_.assign(total, 0);
  tout_.assign(total, 0);
  component_.assign(total, npos);
  std::vector<bool> seen(total, false);
  std::size_t clock = 0;
  for (std::size_t r = vars; r-- > 0;) {
    if (seen[r]) continue;
    // (node, next incident edge index)
    std::vector<std::pair<std::size_t, std::size_t>> stack{{r, 0}};
    seen[r] = true;
    component_[r] = r;
    tin_[r] = clock++;
    preorder_.push_back(r);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& incident = node < vars ? var_edges_[node] : factor_edges_[node - vars];
      if (next == incident.size()) {
        tout_[node] = clock;
        stack.pop_back();
        continue;
      }
      const std::size_t e = incident[next++];
      const std::size_t other = node < vars ? factor_node(edges_[e].factor) : edges_[e].var;
      if (seen[other]) continue;
      seen[other] = true;
      parent_edge_[other] = e;
      component_[other] = r;
      tin_[other] = clock++;
      preorder_.push_back(other);
      stack.emplace_back(other, 0);
    }
  }
  dirty_up_.assign(edges_.size(), true);
  dirty_down_.assign(edges_.size(), true);
}

std::size_t BpEngine::edge_id(std::size_t f, NodeId v) const {
  for (std::size_t e : factor_edges_.at(f)) {
    if (edges_[e].var == v) return e;
  }
  throw BagError(ErrorCode::VarNotInScope, "variable " + std::to_string(v) + " not on factor");
}

BpEngine::Message BpEngine::factor_to_var(std::size_t f, NodeId v) const { return to_var_[edge_id(f, v)]; }

BpEngine::Message BpEngine::var_to_factor(NodeId v, std::size_t f) const {
  return to_factor_[edge_id(f, v)];
}

bool BpEngine::in_subtree(std::size_t node, std::size_t root) const {
  return tin_[root] <= tin_[node] && tin_[node] < tout_[root];
}

void BpEngine::apply_evidence(const std::vector<std::size_t>& factors) {
  for (std::size_t f : factors) {
    active_[f] = fg_.factors()[f].potential;
    EvidenceSet hosted;
    for (NodeId v : fg_.factors()[f].hosted) {
      if (const auto it = evidence_.find(v); it != evidence_.end()) hosted.insert(*it);
    }
    mask_evidence(active_[f], hosted);
  }
}

void BpEngine::compute(std::size_t e, bool to_var) {
  ++messages_last_pass_;
  const auto [f, v] = edges_[e];
  if (!to_var) {
    Message m{1.0, 1.0};
    for (std::size_t other : var_edges_[v]) {
      if (other == e) continue;
      m[0] *= to_var_[other][0];
      m[1] *= to_var_[other][1];
    }
    to_factor_[e] = m;
    return;
  }
  const Factor& psi = active_[f];
  const auto& incident = factor_edges_[f];
  const std::size_t k = incident.size();
  Message m{0.0, 0.0};
  std::size_t target_bit = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (incident[j] == e) target_bit = k - 1 - j;
  }
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double w = psi[i];
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      if (incident[j] == e) continue;
      w *= to_factor_[incident[j]][(i >> (k - 1 - j)) & 1u];
    }
    m[(i >> target_bit) & 1u] += w;
  }
  to_var_[e] = m;
}

void BpEngine::send_up(std::size_t node) {
  const std::size_t e = parent_edge_[node];
  if (e == npos) return;
  if (selective_ && !dirty_up_[e]) return;
  compute(e, node >= fg_.variable_count());
}

void BpEngine::send_down(std::size_t node) {
  const std::size_t vars = fg_.variable_count();
  const auto& incident = node < vars ? var_edges_[node] : factor_edges_[node - vars];
  for (std::size_t e : incident) {
    if (e == parent_edge_[node]) continue;
    if (selective_ && !dirty_down_[e]) continue;
    compute(e, node >= vars);
  }
}

std::vector<double> BpEngine::read_marginals() const {
  std::vector<double> out(fg_.variable_count());
  for (NodeId v = 0; v < out.size(); ++v) {
    double p0 = 1.0;
    double p1 = 1.0;
    for (std::size_t e : var_edges_[v]) {
      p0 *= to_var_[e][0];
      p1 *= to_var_[e][1];
    }
    const double mass = p0 + p1;
    if (!(mass > 0.0)) throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");
    out[v] = p1 / mass;
  }
  return out;
}

std::vector<double> BpEngine::marginals(const EvidenceSet& evidence) {
  for (const auto& [v, value] : evidence) {
    (void)value;
    if (v >= fg_.variable_count()) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(v));
  }
  evidence_ = evidence;
  std::vector<std::size_t> all(fg_.factor_count());
  std::iota(all.begin(), all.end(), 0);
  apply_evidence(all);
  selective_ = false;
  messages_last_pass_ = 0;
  for (auto it = preorder_.rbegin(); it != preorder_.rend(); ++it) send_up(*it);
  for (std::size_t node : preorder_) send_down(node);
  return read_marginals();
}

std::vector<double> BpEngine::update_evidence(const EvidenceSet& delta) {
  std::vector<std::size_t> changed;
  for (const auto& [v, value] : delta) {
    if (v >= fg_.variable_count()) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(v));
    const auto it = evidence_.find(v);
    if (it != evidence_.end() && it->second == value) continue;
    evidence_[v] = value;
    changed.push_back(fg_.host_of(v));
  }
  std::sort(changed.begin(), changed.end());
  changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
  apply_evidence(changed);

  // The message across edge e towards the root reads the subtree below e;
  // the one away from the root reads everything else.
  const std::size_t vars = fg_.variable_count();
  for (std::size_t node = 0; node < parent_edge_.size(); ++node) {
    const std::size_t e = parent_edge_[node];
    if (e == npos) continue;
    bool below = false;
    bool outside = false;
    for (std::size_t f : changed) {
      if (component_[vars + f] != component_[node]) continue;
      if (in_subtree(vars + f, node)) {
        below = true;
      } else {
        outside = true;
      }
    }
    dirty_up_[e] = below;
    dirty_down_[e] = outside;
  }
  selective_ = true;
  messages_last_pass_ = 0;
  for (auto it = preorder_.rbegin(); it != preorder_.rend(); ++it) send_up(*it);
  for (std::size_t node : preorder_) send_down(node);
  selective_ = false;
  return read_marginals();
}

}  // namespace bagrisk
