#pragma once

#include <string>

#include "bagrisk/graph.hpp"

namespace testing_support {

using bagrisk::NodeId;

// Figure 2 network; ids follow the letters.
enum Fig2 : NodeId { A = 0, B, C, D, E, F, G };

bagrisk::BagGraph figure2(double prior_a = 1.0);

// Path of a file under the repository's data/ directory.
std::string data_path(const std::string& name);

}  // namespace testing_support
