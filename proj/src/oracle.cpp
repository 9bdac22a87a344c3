#include "bagrisk/oracle.hpp"

#include "bagrisk/cpt.hpp"
#include "bagrisk/errors.hpp"

namespace bagrisk {

std::vector<double> joint_oracle_all(const BagGraph& g, const EvidenceSet& evidence,
                                     std::size_t max_nodes) {
  validate_evidence(g, evidence);
  const std::size_t n = g.size();
  if (n > max_nodes) {
    throw BagError(ErrorCode::TooLarge, std::to_string(n) + " nodes exceeds enumeration cap " +
                                            std::to_string(max_nodes));
  }
  std::vector<Cpt> cpts;
  for (NodeId id = 0; id < n; ++id) cpts.push_back(node_cpt(g, id));

  std::uint64_t care = 0;
  std::uint64_t want = 0;
  for (const auto& [id, value] : evidence) {
    care |= std::uint64_t{1} << id;
    if (value) want |= std::uint64_t{1} << id;
  }

  // Bit i of `x` is the value of node i. Each assignment's probability is the
  // product of one entry per CPT (chain rule over the DAG).
  std::vector<double> mass_true(n, 0.0);
  double mass = 0.0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    if ((x & care) != want) continue;
    double p = 1.0;
    for (NodeId id = 0; id < n && p != 0.0; ++id) {
      const Cpt& cpt = cpts[id];
      std::size_t index = 0;
      for (NodeId v : cpt.scope) index = (index << 1) | ((x >> v) & 1u);
      p *= cpt.table[index];
    }
    if (p == 0.0) continue;
    mass += p;
    for (NodeId id = 0; id < n; ++id) {
      if ((x >> id) & 1u) mass_true[id] += p;
    }
  }
  if (!(mass > 0.0)) throw BagError(ErrorCode::ImpossibleEvidence, "evidence has probability 0");
  for (double& v : mass_true) v /= mass;
  return mass_true;
}

double joint_oracle(const BagGraph& g, NodeId query, const EvidenceSet& evidence,
                    std::size_t max_nodes) {
  if (!g.contains(query)) throw BagError(ErrorCode::UnknownNode, "node " + std::to_string(query));
  return joint_oracle_all(g, evidence, max_nodes)[query];
}

}  // namespace bagrisk
