#include "fixtures.hpp"

namespace testing_support {

using namespace bagrisk;

BagGraph figure2(double prior_a) {
  std::vector<BagNode> nodes;
  const char* labels = "ABCDEFG";
  for (NodeId id = 0; id < 7; ++id) nodes.push_back({id, std::string(1, labels[id]), GateType::Or, std::nullopt, 0.0});
  nodes[A].prior = prior_a;
  std::vector<BagEdge> edges{
      {A, B, 0.8}, {A, C, 0.1}, {A, D, 0.8}, {B, C, 0.9}, {C, E, 0.8}, {D, F, 0.9}, {E, F, 0.9}, {F, G, 0.1},
  };
  return build_graph(std::move(nodes), std::move(edges));
}

std::string data_path(const std::string& name) { return std::string(BAGRISK_DATA_DIR) + "/" + name; }

}  // namespace testing_support
