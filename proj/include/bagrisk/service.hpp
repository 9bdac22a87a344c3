#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "bagrisk/errors.hpp"
#include "bagrisk/graph_io.hpp"
#include "bagrisk/jt.hpp"

namespace httplib {
class Server;
}

namespace bagrisk {

/// In-process session store behind the HTTP API. Every method returns the
/// response body and throws BagError on failure; http_status() maps codes.
///
/// Each session has one writer at a time (evidence commits); marginal reads
/// and what-if probes share the session lock.
class RiskService {
 public:
  struct Options {
    /// Sessions are written here on every commit and reloaded at startup.
    std::optional<std::filesystem::path> snapshot_dir;
    std::size_t max_scope = kDefaultMaxScope;
  };

  RiskService() : RiskService(Options{}) {}
  explicit RiskService(Options options);

  /// Returns {"id": ...}.
  Json create_graph(const Json& document);
  /// Graph document plus "id" and "evidence".
  Json get_graph(const std::string& id) const;
  /// {"id", "evidence", "marginals": {"<node>": {"label", "probability", "delta_vs_baseline"}}}
  Json get_marginals(const std::string& id) const;
  Json set_evidence(const std::string& id, const std::string& node, bool value);
  Json clear_evidence(const std::string& id, const std::string& node);
  /// Marginals under committed evidence overridden by `hypothetical`; nothing is committed.
  Json what_if(const std::string& id, const Json& evidence_document) const;
  Json get_metrics(const std::string& id) const;

  std::size_t session_count() const;

 private:
  struct Session {
    mutable std::shared_mutex mutex;
    std::string id;
    BagGraph graph;
    std::unique_ptr<JunctionTree> engine;
    EvidenceSet committed;
    std::vector<double> baseline;
    std::vector<double> current;
    double build_seconds = 0.0;
    double last_requery_seconds = 0.0;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> open_session(std::string id, BagGraph graph, const EvidenceSet& evidence);
  Json marginals_body(const Session& s, const std::vector<double>& values, const EvidenceSet& evidence) const;
  Json commit(const std::string& id, const std::string& node, std::optional<bool> value);
  void snapshot(const Session& s) const;
  void restore();

  Options options_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> next_id_{1};
};

/// 400 validation, 404 unknown graph/node, 409 impossible evidence, 500 otherwise.
int http_status(ErrorCode code);

/// Registers the REST routes on `server`.
void mount_routes(httplib::Server& server, RiskService& service);

}  // namespace bagrisk
