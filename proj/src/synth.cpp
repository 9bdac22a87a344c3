#include "bagrisk/synth.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "bagrisk/errors.hpp"
#include "bagrisk/rng.hpp"

namespace bagrisk {

std::optional<Family> parse_family(std::string_view name) {
  if (name == "random") return Family::PseudoRandom;
  if (name == "cluster") return Family::Clustered;
  return std::nullopt;
}

std::optional<InterEdges> parse_inter_edges(std::string_view name) {
  if (name == "pairwise") return InterEdges::Pairwise;
  if (name == "sparse") return InterEdges::Sparse;
  return std::nullopt;
}

void validate(const GenSpec& spec) {
  auto bad = [](const std::string& msg) { throw BagError(ErrorCode::InvalidSpec, msg); };
  if (spec.n < 1) bad("n must be at least 1");
  if (spec.n > UINT32_MAX) bad("n too large");
  if (spec.m < 1) bad("max parents must be at least 1");
  if (!is_probability(spec.prob_lo) || !is_probability(spec.prob_hi) || spec.prob_lo > spec.prob_hi) {
    bad("probability range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!is_probability(spec.gate_mix)) bad("gate mix must lie in [0,1]");
  if (spec.family == Family::Clustered) {
    if (spec.n_c < 1) bad("cluster size must be at least 1");
    if (spec.n % spec.n_c != 0) {
      bad("n = " + std::to_string(spec.n) + " is not divisible by cluster size " + std::to_string(spec.n_c));
    }
  }
}

namespace {

// Appends one random subgraph of `count` nodes starting at id `offset`.
void random_block(const GenSpec& spec, std::size_t offset, std::size_t count, Rng& rng,
                  std::vector<BagNode>& nodes, std::vector<BagEdge>& edges) {
  std::vector<NodeId> pool;
  for (std::size_t j = 0; j < count; ++j) {
    const auto id = static_cast<NodeId>(offset + j);
    BagNode node{id, "n" + std::to_string(id), GateType::Or, std::nullopt, 0.0};
    if (j > 0) {
      const std::size_t k = rng.between(1, std::min(spec.m, j));
      // Partial Fisher-Yates over 0..j-1.
      pool.resize(j);
      std::iota(pool.begin(), pool.end(), static_cast<NodeId>(offset));
      for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(j - i)]);
      std::vector<NodeId> parents(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(parents.begin(), parents.end());
      node.gate = rng.unit() < spec.gate_mix ? GateType::And : GateType::Or;
      for (NodeId p : parents) {
        edges.push_back({p, id, rng.uniform(spec.prob_lo, spec.prob_hi), false});
      }
    }
    nodes.push_back(std::move(node));
  }
}

}  // namespace

BagGraph gen_random(const GenSpec& spec) {
  validate(spec);
  if (spec.family != Family::PseudoRandom) throw BagError(ErrorCode::InvalidSpec, "expected the random family");
  Rng rng(spec.seed);
  std::vector<BagNode> nodes;
  std::vector<BagEdge> edges;
  random_block(spec, 0, spec.n, rng, nodes, edges);
  return BagGraph::build(std::move(nodes), std::move(edges));
}

BagGraph gen_cluster(const GenSpec& spec) {
  validate(spec);
  if (spec.family != Family::Clustered) throw BagError(ErrorCode::InvalidSpec, "expected the cluster family");
  Rng rng(spec.seed);
  std::vector<BagNode> nodes;
  std::vector<BagEdge> edges;
  const std::size_t k = spec.n / spec.n_c;
  for (std::size_t c = 0; c < k; ++c) random_block(spec, c * spec.n_c, spec.n_c, rng, nodes, edges);

  auto link = [&](std::size_t from, std::size_t to) {
    const auto parent = static_cast<NodeId>(from * spec.n_c + rng.below(spec.n_c));
    // Skip the cluster's first slot so its initial node stays initial, when possible.
    const std::size_t slot = spec.n_c > 1 ? rng.between(1, spec.n_c - 1) : 0;
    const auto child = static_cast<NodeId>(to * spec.n_c + slot);
    edges.push_back({parent, child, rng.uniform(spec.prob_lo, spec.prob_hi), false});
  };
  if (spec.inter_edges == InterEdges::Pairwise) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) link(i, j);
    }
  } else {
    for (std::size_t i = 0; i + 1 < k; ++i) link(i, rng.between(i + 1, k - 1));
  }
  return BagGraph::build(std::move(nodes), std::move(edges));
}

BagGraph generate(const GenSpec& spec) {
  return spec.family == Family::Clustered ? gen_cluster(spec) : gen_random(spec);
}

std::vector<BagGraph> gen_batch(const GenSpec& spec, std::size_t count) {
  std::vector<BagGraph> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GenSpec s = spec;
    s.seed = spec.seed + i;
    out.push_back(generate(s));
  }
  return out;
}

}  // namespace bagrisk
