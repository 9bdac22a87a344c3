#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bagrisk/graph.hpp"

namespace bagrisk {

using Json = nlohmann::json;

// Graph document:
//   {"nodes":[{"id":0,"label":"A","gate":"OR","prior":1.0}, ...],
//    "edges":[{"parent":0,"child":1,"p":0.8}, ...]}
// Optional extras: node "ids_error", edge "bypass". A missing or null prior
// means "unset" (1.0 on initial nodes).
//
// Structural problems throw ParseError naming the offending field; semantic
// ones surface as the BagGraph::build error codes.
BagGraph graph_from_json(const Json& doc);
Json graph_to_json(const BagGraph& g);

BagGraph parse_graph(std::string_view text);
/// Deterministic text form: write(read(write(g))) == write(g) byte for byte.
std::string write_graph(const BagGraph& g);

BagGraph load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const BagGraph& g);

// Evidence document: {"evidence":{"<id>":true|false}}. Keys that are not
// integers are looked up as node labels.
EvidenceSet evidence_from_json(const Json& doc, const BagGraph& g);
Json evidence_to_json(const EvidenceSet& evidence);
EvidenceSet parse_evidence(std::string_view text, const BagGraph& g);
EvidenceSet load_evidence(const std::filesystem::path& path, const BagGraph& g);

}  // namespace bagrisk
