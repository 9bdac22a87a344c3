#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "bagrisk/graph.hpp"

namespace bagrisk {

enum class Family { PseudoRandom, Clustered };

/// How clusters are wired together: one edge per ordered cluster pair, or a
/// single outgoing edge per cluster into a uniformly chosen later cluster.
enum class InterEdges { Pairwise, Sparse };

std::optional<Family> parse_family(std::string_view name);        // random | cluster
std::optional<InterEdges> parse_inter_edges(std::string_view name);  // pairwise | sparse

struct GenSpec {
  Family family = Family::PseudoRandom;
  std::size_t n = 10;
  std::size_t m = 2;    // max parents
  std::size_t n_c = 0;  // cluster size, Clustered only
  std::uint64_t seed = 0;
  double prob_lo = 0.05;
  double prob_hi = 0.95;
  double gate_mix = 0.5;  // probability a non-initial node is AND
  InterEdges inter_edges = InterEdges::Pairwise;
};

/// Throws InvalidSpec describing the first bad field.
void validate(const GenSpec& spec);

/// Node j > 0 draws n_p ~ U{1..min(m, j)} distinct parents from 0..j-1.
BagGraph gen_random(const GenSpec& spec);
/// n / n_c independent random clusters joined by inter-cluster edges that
/// always point from a lower to a higher cluster.
BagGraph gen_cluster(const GenSpec& spec);
/// Dispatches on spec.family.
BagGraph generate(const GenSpec& spec);
/// `count` graphs with seeds seed, seed + 1, ...
std::vector<BagGraph> gen_batch(const GenSpec& spec, std::size_t count);

}  // namespace bagrisk
