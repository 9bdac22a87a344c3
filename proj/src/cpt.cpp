#include "bagrisk/cpt.hpp"

#include <numeric>

#include "bagrisk/errors.hpp"

namespace bagrisk {

namespace {

void check_probs(std::span<const double> probs) {
  if (probs.empty()) throw BagError(ErrorCode::EmptyParentList, "gate needs at least one parent");
  for (double p : probs) {
    if (!is_probability(p)) throw BagError(ErrorCode::InvalidProbability, "exploit probability outside [0,1]");
  }
}

void check_error_rate(double p_e) {
  if (!is_probability(p_e)) throw BagError(ErrorCode::InvalidProbability, "p_e outside [0,1]");
}

struct GateInput {
  double prob;
  bool bypass;
};

// P(child=T | parent bits) for one row. The gate is evaluated on the regular
// parents, then combined noisy-OR style with p_e and every true bypass parent:
// base + (1-base) * lift. With no bypass and p_e = 0 this returns base
// unchanged, bit for bit.
double gate_row(GateType gate, std::span<const GateInput> inputs, std::uint64_t bits, double p_e) {
  const std::size_t k = inputs.size();
  double base = 0.0;
  if (gate == GateType::And) {
    double prod = 1.0;
    bool all_true = true;
    for (std::size_t j = 0; j < k; ++j) {
      if (inputs[j].bypass) continue;
      const bool on = (bits >> (k - 1 - j)) & 1u;
      if (!on) {
        all_true = false;
        break;
      }
      prod *= inputs[j].prob;
    }
    base = all_true ? prod : 0.0;
  } else {
    double fail = 1.0;
    bool any_true = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (inputs[j].bypass) continue;
      if ((bits >> (k - 1 - j)) & 1u) {
        any_true = true;
        fail *= 1.0 - inputs[j].prob;
      }
    }
    base = any_true ? 1.0 - fail : 0.0;
  }

  double lift = p_e;
  bool lifted = p_e != 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!inputs[j].bypass) continue;
    if ((bits >> (k - 1 - j)) & 1u) {
      lift += (1.0 - lift) * inputs[j].prob;
      lifted = true;
    }
  }
  if (!lifted) return base;
  if (lift == 1.0) return 1.0;
  return base + (1.0 - base) * lift;
}

Cpt make_cpt(GateType gate, std::span<const GateInput> inputs, double p_e,
             std::vector<NodeId> scope, NodeId child) {
  const std::size_t k = inputs.size();
  Cpt cpt;
  cpt.child = child;
  cpt.scope = std::move(scope);
  cpt.table.resize(std::size_t{2} << k);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
    const double t = gate_row(gate, inputs, bits, p_e);
    cpt.table[(bits << 1) | 1u] = t;
    cpt.table[bits << 1] = 1.0 - t;
  }
  return cpt;
}

Cpt placeholder_cpt(GateType gate, std::span<const double> probs, double p_e) {
  check_probs(probs);
  check_error_rate(p_e);
  std::vector<GateInput> inputs;
  for (double p : probs) inputs.push_back({p, false});
  std::vector<NodeId> scope(probs.size() + 1);
  std::iota(scope.begin(), scope.end(), NodeId{0});
  return make_cpt(gate, inputs, p_e, std::move(scope), static_cast<NodeId>(probs.size()));
}

}  // namespace

Cpt build_and_cpt(std::span<const double> probs) { return placeholder_cpt(GateType::And, probs, 0.0); }

Cpt build_or_cpt(std::span<const double> probs) { return placeholder_cpt(GateType::Or, probs, 0.0); }

Cpt build_and_cpt_ids(std::span<const double> probs, double p_e) {
  return placeholder_cpt(GateType::And, probs, p_e);
}

Cpt build_or_cpt_ids(std::span<const double> probs, double p_e) {
  return placeholder_cpt(GateType::Or, probs, p_e);
}

Cpt prior_cpt(double p) {
  if (!is_probability(p)) throw BagError(ErrorCode::InvalidProbability, "prior outside [0,1]");
  return Cpt{0, {0}, {1.0 - p, p}};
}

Cpt node_cpt(const BagGraph& g, NodeId node) {
  if (g.is_initial(node)) {
    Cpt cpt = prior_cpt(g.prior(node));
    cpt.child = node;
    cpt.scope = {node};
    return cpt;
  }
  const auto parents = g.parents(node);
  const auto in_edges = g.in_edges(node);
  std::vector<GateInput> inputs;
  inputs.reserve(parents.size());
  for (std::size_t e : in_edges) inputs.push_back({g.edges()[e].exploit_prob, g.edges()[e].bypass});
  std::vector<NodeId> scope(parents.begin(), parents.end());
  scope.push_back(node);
  const auto& n = g.node(node);
  return make_cpt(n.gate, inputs, n.ids_error, std::move(scope), node);
}

std::vector<Factor> cpt_factors(const BagGraph& g) {
  std::vector<Factor> out;
  out.reserve(g.size());
  for (NodeId id = 0; id < g.size(); ++id) out.push_back(node_cpt(g, id).to_factor());
  return out;
}

}  // namespace bagrisk
