#include "bagrisk/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bagrisk/errors.hpp"

namespace bagrisk {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw BagError(ErrorCode::ParseError, where + ": " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

NodeId read_id(const Json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
      v.get<std::int64_t>() > std::int64_t{UINT32_MAX}) {
    fail(where, "expected a non-negative integer");
  }
  return static_cast<NodeId>(v.get<std::int64_t>());
}

double read_number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double read_probability(const Json& v, const std::string& where) {
  const double p = read_number(v, where);
  if (!is_probability(p)) throw BagError(ErrorCode::InvalidProbability, where + ": outside [0,1]");
  return p;
}

Json parse_text(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw BagError(ErrorCode::ParseError, std::string("malformed document: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BagError(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

BagGraph graph_from_json(const Json& doc) {
  if (!doc.is_object()) fail("document", "expected an object");
  const Json& jnodes = require(doc, "nodes", "document");
  if (!jnodes.is_array()) fail("nodes", "expected an array");
  std::vector<BagNode> nodes;
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const Json& jn = jnodes[i];
    if (!jn.is_object()) fail(where, "expected an object");
    BagNode node;
    node.id = read_id(require(jn, "id", where), where + ".id");
    if (const auto it = jn.find("label"); it != jn.end()) {
      if (!it->is_string()) fail(where + ".label", "expected a string");
      node.label = it->get<std::string>();
    }
    if (const auto it = jn.find("gate"); it != jn.end()) {
      if (!it->is_string()) fail(where + ".gate", "expected \"AND\" or \"OR\"");
      const auto gate = it->get<std::string>();
      if (gate == "AND") {
        node.gate = GateType::And;
      } else if (gate == "OR") {
        node.gate = GateType::Or;
      } else {
        fail(where + ".gate", "expected \"AND\" or \"OR\", got \"" + gate + "\"");
      }
    }
    if (const auto it = jn.find("prior"); it != jn.end() && !it->is_null()) {
      node.prior = read_probability(*it, where + ".prior");
    }
    if (const auto it = jn.find("ids_error"); it != jn.end()) {
      node.ids_error = read_probability(*it, where + ".ids_error");
    }
    nodes.push_back(std::move(node));
  }

  std::vector<BagEdge> edges;
  if (const auto it = doc.find("edges"); it != doc.end()) {
    if (!it->is_array()) fail("edges", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "edges[" + std::to_string(i) + "]";
      const Json& je = (*it)[i];
      if (!je.is_object()) fail(where, "expected an object");
      BagEdge edge;
      edge.parent = read_id(require(je, "parent", where), where + ".parent");
      edge.child = read_id(require(je, "child", where), where + ".child");
      edge.exploit_prob = read_probability(require(je, "p", where), where + ".p");
      if (const auto b = je.find("bypass"); b != je.end()) {
        if (!b->is_boolean()) fail(where + ".bypass", "expected a boolean");
        edge.bypass = b->get<bool>();
      }
      edges.push_back(edge);
    }
  }
  return BagGraph::build(std::move(nodes), std::move(edges));
}

Json graph_to_json(const BagGraph& g) {
  Json nodes = Json::array();
  for (const auto& n : g.nodes()) {
    Json jn = {{"id", n.id}, {"label", n.label}, {"gate", n.gate == GateType::And ? "AND" : "OR"}};
    jn["prior"] = n.prior ? Json(*n.prior) : Json(nullptr);
    if (n.ids_error != 0.0) jn["ids_error"] = n.ids_error;
    nodes.push_back(std::move(jn));
  }
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    Json je = {{"parent", e.parent}, {"child", e.child}, {"p", e.exploit_prob}};
    if (e.bypass) je["bypass"] = true;
    edges.push_back(std::move(je));
  }
  return Json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

BagGraph parse_graph(std::string_view text) { return graph_from_json(parse_text(text)); }

std::string write_graph(const BagGraph& g) { return graph_to_json(g).dump(2) + "\n"; }

BagGraph load_graph(const std::filesystem::path& path) { return parse_graph(read_file(path)); }

void save_graph(const std::filesystem::path& path, const BagGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BagError(ErrorCode::ParseError, "cannot write " + path.string());
  out << write_graph(g);
}

EvidenceSet evidence_from_json(const Json& doc, const BagGraph& g) {
  if (!doc.is_object()) fail("document", "expected an object");
  const Json& body = require(doc, "evidence", "document");
  if (!body.is_object()) fail("evidence", "expected an object");
  EvidenceSet evidence;
  for (const auto& [key, value] : body.items()) {
    const std::string where = "evidence." + key;
    if (!value.is_boolean()) fail(where, "expected true or false");
    NodeId id = 0;
    const auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    if (ec != std::errc{} || end != key.data() + key.size()) {
      const auto found = g.find_label(key);
      if (!found) throw BagError(ErrorCode::UnknownNode, where + ": no node with that id or label");
      id = *found;
    }
    if (!g.contains(id)) throw BagError(ErrorCode::UnknownNode, where + ": no node with that id");
    evidence[id] = value.get<bool>();
  }
  return evidence;
}

Json evidence_to_json(const EvidenceSet& evidence) {
  Json body = Json::object();
  for (const auto& [id, value] : evidence) body[std::to_string(id)] = value;
  return Json{{"evidence", std::move(body)}};
}

EvidenceSet parse_evidence(std::string_view text, const BagGraph& g) {
  return evidence_from_json(parse_text(text), g);
}

EvidenceSet load_evidence(const std::filesystem::path& path, const BagGraph& g) {
  return parse_evidence(read_file(path), g);
}

}  // namespace bagrisk
