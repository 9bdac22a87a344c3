#include "bagrisk/ve.hpp"

#include <algorithm>

#include "bagrisk/cpt.hpp"
#include "bagrisk/errors.hpp"

namespace bagrisk {

std::vector<NodeId> resolve_order(const BagGraph& g, const OrderSpec& spec,
                                  const std::set<NodeId>& keep) {
  if (!spec.explicit_order) return order(g, spec.heuristic, spec.seed, keep).order;
  std::vector<bool> placed(g.size(), false);
  std::vector<NodeId> out;
  for (NodeId v : *spec.explicit_order) {
    if (!g.contains(v)) throw BagError(ErrorCode::UnknownNode, "order names node " + std::to_string(v));
    if (keep.contains(v) || placed[v]) continue;
    placed[v] = true;
    out.push_back(v);
  }
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!placed[v] && !keep.contains(v)) out.push_back(v);
  }
  return out;
}

namespace {

std::vector<Factor> reduced_factors(const BagGraph& g, const EvidenceSet& evidence) {
  std::vector<Factor> factors = cpt_factors(g);
  for (auto& f : factors) {
    for (const auto& [var, value] : evidence) {
      if (f.contains(var)) f = reduce(f, var, value);
    }
  }
  return factors;
}

void check_deadline(const VeOptions& options) {
  if (options.deadline && std::chrono::steady_clock::now() > *options.deadline) {
    throw BagError(ErrorCode::ResourceCap, "variable elimination exceeded its time budget");
  }
}

// Pulls every factor mentioning `var` out of the pool.
std::vector<Factor> take_bucket(std::vector<Factor>& pool, NodeId var) {
  std::vector<Factor> bucket;
  auto keep = std::partition(pool.begin(), pool.end(), [var](const Factor& f) { return !f.contains(var); });
  std::move(keep, pool.end(), std::back_inserter(bucket));
  pool.erase(keep, pool.end());
  return bucket;
}

Factor multiply_all(const std::vector<Factor>& factors, std::size_t max_scope) {
  std::vector<const Factor*> ptrs;
  for (const auto& f : factors) ptrs.push_back(&f);
  return product(std::span<const Factor* const>(ptrs), max_scope);
}

VeResult eliminate_for(const BagGraph& g, NodeId query, const EvidenceSet& evidence,
                       std::span<const NodeId> elimination, const VeOptions& options) {
  if (const auto it = evidence.find(query); it != evidence.end()) {
    return VeResult{it->second ? 1.0 : 0.0, 0, 0};
  }
  std::vector<Factor> pool = reduced_factors(g, evidence);
  VeResult result;
  for (NodeId var : elimination) {
    check_deadline(options);
    auto bucket = take_bucket(pool, var);
    if (bucket.empty()) continue;
    const Factor phi = multiply_all(bucket, options.max_scope);
    result.max_scope = std::max(result.max_scope, phi.scope().size());
    result.table_bytes += table_bytes(phi.scope().size());
    pool.push_back(sum_out(phi, var));
  }
  const Factor residual = multiply_all(pool, options.max_scope);
  result.max_scope = std::max(result.max_scope, residual.scope().size());
  if (residual.scope() != std::vector<NodeId>{query}) {
    throw BagError(ErrorCode::VarNotInScope, "elimination left variables other than the query");
  }
  const double mass = residual.sum();
  if (!(mass > 0.0)) throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");
  result.probability = residual[1] / mass;
  return result;
}

std::set<NodeId> keys_of(const EvidenceSet& evidence) {
  std::set<NodeId> keys;
  for (const auto& [id, value] : evidence) keys.insert(id);
  return keys;
}

}  // namespace

VeResult ve_query(const BagGraph& g, NodeId query, const EvidenceSet& evidence,
                  const OrderSpec& spec, const VeOptions& options) {
  if (!g.contains(query)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(query));
  validate_evidence(g, evidence);
  auto keep = keys_of(evidence);
  keep.insert(query);
  const auto elimination = resolve_order(g, spec, keep);
  return eliminate_for(g, query, evidence, elimination, options);
}

VeSweep ve_all_marginals(const BagGraph& g, const EvidenceSet& evidence, const OrderSpec& spec,
                         const VeOptions& options) {
  validate_evidence(g, evidence);
  const auto skeleton_order = resolve_order(g, spec, keys_of(evidence));
  VeSweep sweep;
  sweep.marginals.resize(g.size());
  std::vector<NodeId> elimination;
  for (NodeId q = 0; q < g.size(); ++q) {
    elimination.clear();
    for (NodeId v : skeleton_order) {
      if (v != q) elimination.push_back(v);
    }
    const VeResult r = eliminate_for(g, q, evidence, elimination, options);
    sweep.marginals[q] = r.probability;
    sweep.max_scope = std::max(sweep.max_scope, r.max_scope);
    sweep.peak_table_bytes = std::max(sweep.peak_table_bytes, r.table_bytes);
  }
  return sweep;
}

EvidenceSet ve_mpe(const BagGraph& g, const EvidenceSet& evidence, const OrderSpec& spec) {
  validate_evidence(g, evidence);
  const auto elimination = resolve_order(g, spec, keys_of(evidence));
  std::vector<Factor> pool = reduced_factors(g, evidence);

  std::vector<std::pair<NodeId, Factor>> trace;
  for (NodeId var : elimination) {
    auto bucket = take_bucket(pool, var);
    if (bucket.empty()) continue;
    Factor phi = multiply_all(bucket, kDefaultMaxScope);
    pool.push_back(max_out(phi, var));
    trace.emplace_back(var, std::move(phi));
  }
  double best = 1.0;
  for (const auto& f : pool) best *= f[0];
  if (!(best > 0.0)) throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");

  EvidenceSet assignment = evidence;
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    const auto& [var, phi] = *it;
    assignment[var] = false;
    const double p_false = phi.value(assignment);
    assignment[var] = true;
    const double p_true = phi.value(assignment);
    assignment[var] = p_true > p_false;
  }
  return assignment;
}

}  // namespace bagrisk
