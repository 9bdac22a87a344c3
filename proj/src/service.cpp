#include "bagrisk/service.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <mutex>

#include <httplib.h>

#include "bagrisk/errors.hpp"

namespace bagrisk {

namespace {

using Clock = std::chrono::steady_clock;

NodeId resolve_node(const BagGraph& g, const std::string& token) {
  NodeId id = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
  if (ec == std::errc{} && end == token.data() + token.size()) {
    if (g.contains(id)) return id;
  } else if (const auto found = g.find_label(token)) {
    return *found;
  }
  throw BagError(ErrorCode::UnknownNode, "no node \"" + token + "\"");
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownGraph:
    case ErrorCode::UnknownNode:
      return 404;
    case ErrorCode::ImpossibleEvidence:
      return 409;
    case ErrorCode::ZeroMass:
    case ErrorCode::TooLarge:
    case ErrorCode::NotATree:
    case ErrorCode::ResourceCap:
    case ErrorCode::VarNotInScope:
    case ErrorCode::InvalidFactor:
      return 500;
    default:
      return 400;
  }
}

RiskService::RiskService(Options options) : options_(std::move(options)) {
  if (options_.snapshot_dir) {
    std::filesystem::create_directories(*options_.snapshot_dir);
    restore();
  }
}

std::shared_ptr<RiskService::Session> RiskService::open_session(std::string id, BagGraph graph,
                                                                 const EvidenceSet& evidence) {
  auto s = std::make_shared<Session>();
  s->id = std::move(id);
  s->graph = std::move(graph);
  const auto start = Clock::now();
  JunctionTree::Options jt;
  jt.max_scope = options_.max_scope;
  s->engine = std::make_unique<JunctionTree>(s->graph, jt);
  s->baseline = s->engine->requery({});
  s->build_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  s->current = s->baseline;
  if (!evidence.empty()) {
    s->current = s->engine->requery(evidence);
    s->committed = evidence;
    s->last_requery_seconds = s->engine->metrics().requery_seconds;
  }
  return s;
}

Json RiskService::create_graph(const Json& document) {
  BagGraph graph = graph_from_json(document);
  const std::string id = "g" + std::to_string(next_id_++);
  auto session = open_session(id, std::move(graph), {});
  snapshot(*session);
  {
    std::unique_lock lock(registry_mutex_);
    sessions_[id] = session;
  }
  return Json{{"id", id}, {"nodes", session->graph.size()}};
}

std::shared_ptr<RiskService::Session> RiskService::find(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw BagError(ErrorCode::UnknownGraph, "no graph \"" + id + "\"");
  return it->second;
}

std::size_t RiskService::session_count() const {
  std::shared_lock lock(registry_mutex_);
  return sessions_.size();
}

Json RiskService::get_graph(const std::string& id) const {
  const auto s = find(id);
  std::shared_lock lock(s->mutex);
  Json body = graph_to_json(s->graph);
  body["id"] = s->id;
  body["evidence"] = evidence_to_json(s->committed)["evidence"];
  return body;
}

Json RiskService::marginals_body(const Session& s, const std::vector<double>& values,
                                 const EvidenceSet& evidence) const {
  Json marginals = Json::object();
  for (NodeId v = 0; v < s.graph.size(); ++v) {
    marginals[std::to_string(v)] = {{"label", s.graph.node(v).label},
                                    {"probability", values[v]},
                                    {"delta_vs_baseline", values[v] - s.baseline[v]}};
  }
  return Json{{"id", s.id}, {"evidence", evidence_to_json(evidence)["evidence"]}, {"marginals", marginals}};
}

Json RiskService::get_marginals(const std::string& id) const {
  const auto s = find(id);
  std::shared_lock lock(s->mutex);
  return marginals_body(*s, s->current, s->committed);
}

Json RiskService::commit(const std::string& id, const std::string& node, std::optional<bool> value) {
  const auto s = find(id);
  std::unique_lock lock(s->mutex);
  const NodeId v = resolve_node(s->graph, node);
  EvidenceSet next = s->committed;
  if (value) {
    next[v] = *value;
  } else {
    next.erase(v);
  }
  // On ImpossibleEvidence the engine restores its previous calibration and
  // the stored marginals are left untouched.
  s->current = s->engine->requery(next);
  s->committed = std::move(next);
  s->last_requery_seconds = s->engine->metrics().requery_seconds;
  snapshot(*s);
  return marginals_body(*s, s->current, s->committed);
}

Json RiskService::set_evidence(const std::string& id, const std::string& node, bool value) {
  return commit(id, node, value);
}

Json RiskService::clear_evidence(const std::string& id, const std::string& node) {
  return commit(id, node, std::nullopt);
}

Json RiskService::what_if(const std::string& id, const Json& evidence_document) const {
  const auto s = find(id);
  std::optional<JunctionTree> probe;
  EvidenceSet combined;
  {
    std::shared_lock lock(s->mutex);
    combined = s->committed;
    for (const auto& [v, value] : evidence_from_json(evidence_document, s->graph)) combined[v] = value;
    probe.emplace(*s->engine);
  }
  const auto values = probe->requery(combined);
  std::shared_lock lock(s->mutex);
  return marginals_body(*s, values, combined);
}

Json RiskService::get_metrics(const std::string& id) const {
  const auto s = find(id);
  std::shared_lock lock(s->mutex);
  const JtMetrics m = s->engine->metrics();
  const JtCounters& c = s->engine->counters();
  return Json{{"id", s->id},
              {"algorithm", "jt"},
              {"n", s->graph.size()},
              {"build_seconds", s->build_seconds},
              {"last_requery_seconds", s->last_requery_seconds},
              {"max_scope", m.max_scope},
              {"est_bytes", m.est_bytes},
              {"factor_count", m.factor_count},
              {"calibrations", c.calibrations},
              {"messages", c.messages}};
}

void RiskService::snapshot(const Session& s) const {
  if (!options_.snapshot_dir) return;
  const Json body{{"id", s.id}, {"graph", graph_to_json(s.graph)}, {"evidence", evidence_to_json(s.committed)}};
  const auto target = *options_.snapshot_dir / (s.id + ".json");
  auto temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary);
    out << body.dump(2) << '\n';
  }
  std::filesystem::rename(temp, target);
}

void RiskService::restore() {
  std::uint64_t highest = 0;
  for (const auto& entry : std::filesystem::directory_iterator(*options_.snapshot_dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    const Json body = Json::parse(in, nullptr, false);
    if (body.is_discarded() || !body.contains("id") || !body.contains("graph")) continue;
    const auto id = body["id"].get<std::string>();
    BagGraph graph = graph_from_json(body["graph"]);
    const EvidenceSet evidence =
        body.contains("evidence") ? evidence_from_json(body["evidence"], graph) : EvidenceSet{};
    sessions_[id] = open_session(id, std::move(graph), evidence);
    std::uint64_t number = 0;
    std::from_chars(id.data() + 1, id.data() + id.size(), number);
    highest = std::max(highest, number);
  }
  next_id_ = highest + 1;
}

void mount_routes(httplib::Server& server, RiskService& service) {
  using httplib::Request;
  using httplib::Response;

  auto handle = [](Response& res, auto&& body) {
    try {
      res.set_content(body().dump(), "application/json");
      res.status = 200;
    } catch (const BagError& e) {
      res.status = http_status(e.code());
      res.set_content(Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(Json{{"error", "Internal"}, {"message", e.what()}}.dump(), "application/json");
    }
  };
  auto parse_body = [](const Request& req) {
    Json doc = Json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) throw BagError(ErrorCode::ParseError, "request body is not valid JSON");
    return doc;
  };

  server.Post("/graphs", [&service, handle, parse_body](const Request& req, Response& res) {
    handle(res, [&] { return service.create_graph(parse_body(req)); });
  });
  server.Get(R"(/graphs/([^/]+))", [&service, handle](const Request& req, Response& res) {
    handle(res, [&] { return service.get_graph(req.matches[1]); });
  });
  server.Get(R"(/graphs/([^/]+)/marginals)", [&service, handle](const Request& req, Response& res) {
    handle(res, [&] { return service.get_marginals(req.matches[1]); });
  });
  server.Put(R"(/graphs/([^/]+)/evidence/([^/]+))",
             [&service, handle, parse_body](const Request& req, Response& res) {
               handle(res, [&] {
                 const Json doc = parse_body(req);
                 if (!doc.is_object() || !doc.contains("value") || !doc["value"].is_boolean()) {
                   throw BagError(ErrorCode::ParseError, "value: expected true or false");
                 }
                 return service.set_evidence(req.matches[1], req.matches[2], doc["value"].get<bool>());
               });
             });
  server.Delete(R"(/graphs/([^/]+)/evidence/([^/]+))", [&service, handle](const Request& req, Response& res) {
    handle(res, [&] { return service.clear_evidence(req.matches[1], req.matches[2]); });
  });
  server.Post(R"(/graphs/([^/]+)/whatif)", [&service, handle, parse_body](const Request& req, Response& res) {
    handle(res, [&] { return service.what_if(req.matches[1], parse_body(req)); });
  });
  server.Get(R"(/graphs/([^/]+)/metrics)", [&service, handle](const Request& req, Response& res) {
    handle(res, [&] { return service.get_metrics(req.matches[1]); });
  });
}

}  // namespace bagrisk
