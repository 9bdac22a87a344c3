#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "bagrisk/errors.hpp"
#include "bagrisk/service.hpp"
#include "brute.hpp"
#include "fixtures.hpp"

using namespace bagrisk;
using namespace testing_support;

namespace {

Json figure2_document(double prior_a = 1.0) { return graph_to_json(figure2(prior_a)); }

double probability(const Json& body, NodeId v) { return body["marginals"][std::to_string(v)]["probability"]; }
double delta(const Json& body, NodeId v) { return body["marginals"][std::to_string(v)]["delta_vs_baseline"]; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BagError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a BagError";
  return ErrorCode::ParseError;
}

}  // namespace

TEST(RiskService, CreateAndReadMarginals) {
  RiskService service;
  const std::string id = service.create_graph(figure2_document())["id"];
  const std::string other = service.create_graph(figure2_document())["id"];
  EXPECT_NE(id, other);
  const Json body = service.get_marginals(id);
  const auto expected = brute_posteriors(figure2(), {});
  for (NodeId v = 0; v < 7; ++v) {
    EXPECT_NEAR(probability(body, v), expected[v], 1e-12);
    EXPECT_EQ(delta(body, v), 0.0);
  }
  const Json graph = service.get_graph(id);
  EXPECT_EQ(graph["nodes"].size(), 7u);
  EXPECT_EQ(graph["id"], id);
}

TEST(RiskService, EvidenceDeltas) {
  RiskService service;
  const std::string id = service.create_graph(figure2_document())["id"];
  const Json body = service.set_evidence(id, "4", true);
  const auto expected = brute_posteriors(figure2(), {{E, true}});
  for (NodeId v = 0; v < 7; ++v) EXPECT_NEAR(probability(body, v), expected[v], 1e-12);
  EXPECT_NEAR(delta(body, D), 0.0, 1e-12);
  EXPECT_GT(delta(body, B), 0.0);
  EXPECT_GT(delta(body, C), 0.0);
  // Idempotent.
  const Json again = service.set_evidence(id, "E", true);
  for (NodeId v = 0; v < 7; ++v) EXPECT_EQ(probability(again, v), probability(body, v));
  const Json cleared = service.clear_evidence(id, "4");
  for (NodeId v = 0; v < 7; ++v) EXPECT_NEAR(delta(cleared, v), 0.0, 1e-15);
}

TEST(RiskService, ImpossibleEvidenceRollsBack) {
  RiskService service;
  const std::string id = service.create_graph(figure2_document(0.5))["id"];
  service.set_evidence(id, "A", false);
  const std::string before = service.get_marginals(id).dump();
  EXPECT_EQ(code_of([&] { service.set_evidence(id, "D", true); }), ErrorCode::ImpossibleEvidence);
  EXPECT_EQ(service.get_marginals(id).dump(), before);
  EXPECT_EQ(service.get_graph(id)["evidence"].size(), 1u);
}

TEST(RiskService, WhatIfIsPure) {
  RiskService service;
  const std::string id = service.create_graph(figure2_document())["id"];
  service.set_evidence(id, "B", true);
  const std::string committed = service.get_marginals(id).dump();
  const Json none = service.what_if(id, Json{{"evidence", Json::object()}});
  EXPECT_EQ(none["marginals"].dump(), service.get_marginals(id)["marginals"].dump());
  const Json probe = service.what_if(id, Json{{"evidence", {{"5", true}}}});
  EXPECT_EQ(service.get_marginals(id).dump(), committed);
  // Same numbers as committing then clearing.
  const Json set = service.set_evidence(id, "5", true);
  for (NodeId v = 0; v < 7; ++v) EXPECT_EQ(probability(probe, v), probability(set, v));
  service.clear_evidence(id, "5");
  EXPECT_EQ(service.get_marginals(id).dump(), committed);
}

TEST(RiskService, Errors) {
  RiskService service;
  EXPECT_EQ(code_of([&] { service.get_marginals("nope"); }), ErrorCode::UnknownGraph);
  EXPECT_EQ(code_of([&] { service.create_graph(Json{{"nodes", 3}}); }), ErrorCode::ParseError);
  Json cyclic = figure2_document();
  cyclic["edges"].push_back({{"parent", 5}, {"child", 2}, {"p", 0.5}});
  EXPECT_EQ(code_of([&] { service.create_graph(cyclic); }), ErrorCode::CycleDetected);
  const std::string id = service.create_graph(figure2_document())["id"];
  EXPECT_EQ(code_of([&] { service.set_evidence(id, "Z", true); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code_of([&] { service.set_evidence(id, "17", true); }), ErrorCode::UnknownNode);
  EXPECT_EQ(http_status(ErrorCode::CycleDetected), 400);
  EXPECT_EQ(http_status(ErrorCode::InvalidProbability), 400);
  EXPECT_EQ(http_status(ErrorCode::UnknownGraph), 404);
  EXPECT_EQ(http_status(ErrorCode::UnknownNode), 404);
  EXPECT_EQ(http_status(ErrorCode::ImpossibleEvidence), 409);
}

TEST(RiskService, Metrics) {
  RiskService service;
  const std::string id = service.create_graph(figure2_document())["id"];
  service.set_evidence(id, "E", true);
  const Json m = service.get_metrics(id);
  EXPECT_GT(m["build_seconds"].get<double>(), 0.0);
  EXPECT_GE(m["last_requery_seconds"].get<double>(), 0.0);
  EXPECT_GE(m["max_scope"].get<int>(), 1);
  EXPECT_GT(m["est_bytes"].get<std::uint64_t>(), 0u);
}

TEST(RiskService, SnapshotsSurviveRestart) {
  const auto dir = std::filesystem::temp_directory_path() / "bagrisk_service_snapshots";
  std::filesystem::remove_all(dir);
  std::string id;
  std::string marginals;
  {
    RiskService service({dir, kDefaultMaxScope});
    id = service.create_graph(figure2_document())["id"];
    service.set_evidence(id, "E", true);
    marginals = service.get_marginals(id).dump();
  }
  RiskService restored({dir, kDefaultMaxScope});
  EXPECT_EQ(restored.session_count(), 1u);
  EXPECT_EQ(restored.get_marginals(id).dump(), marginals);
  const std::string fresh = restored.create_graph(figure2_document())["id"];
  EXPECT_NE(fresh, id);
  std::filesystem::remove_all(dir);
}

TEST(RiskService, ConcurrentReadersAndWriter) {
  RiskService service;
  const std::string id = service.create_graph(graph_to_json(random_bag(3, 12, 3)))["id"];
  std::atomic<bool> failed{false};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) {
        try {
          if (t == 0) {
            service.set_evidence(id, std::to_string(i % 12), i % 2 == 0);
            service.clear_evidence(id, std::to_string(i % 12));
          } else if (t == 1) {
            service.what_if(id, Json{{"evidence", {{std::to_string(i % 12), true}}}});
          } else {
            const Json body = service.get_marginals(id);
            if (body["marginals"].size() != 12) failed = true;
          }
        } catch (const BagError& e) {
          if (e.code() != ErrorCode::ImpossibleEvidence) failed = true;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_FALSE(failed);
}

class HttpApi : public ::testing::Test {
 protected:
  void SetUp() override {
    mount_routes(server_, service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  RiskService service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_F(HttpApi, FullRoundTrip) {
  auto cli = client();
  auto created = cli.Post("/graphs", figure2_document().dump(), "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 200);
  const std::string id = Json::parse(created->body)["id"];

  auto graph = cli.Get("/graphs/" + id);
  ASSERT_EQ(graph->status, 200);
  EXPECT_EQ(Json::parse(graph->body)["edges"].size(), 8u);

  auto marginals = cli.Get("/graphs/" + id + "/marginals");
  ASSERT_EQ(marginals->status, 200);
  EXPECT_NEAR(probability(Json::parse(marginals->body), C), 0.748, 1e-12);

  auto set = cli.Put("/graphs/" + id + "/evidence/4", R"({"value":true})", "application/json");
  ASSERT_EQ(set->status, 200);
  const Json after = Json::parse(set->body);
  EXPECT_NEAR(delta(after, D), 0.0, 1e-12);
  EXPECT_GT(delta(after, B), 0.0);

  auto whatif = cli.Post("/graphs/" + id + "/whatif", R"({"evidence":{"6":true}})", "application/json");
  ASSERT_EQ(whatif->status, 200);
  EXPECT_EQ(Json::parse(whatif->body)["evidence"].size(), 2u);

  auto metrics = cli.Get("/graphs/" + id + "/metrics");
  ASSERT_EQ(metrics->status, 200);
  EXPECT_TRUE(Json::parse(metrics->body).contains("est_bytes"));

  auto cleared = cli.Delete("/graphs/" + id + "/evidence/4");
  ASSERT_EQ(cleared->status, 200);
  EXPECT_NEAR(delta(Json::parse(cleared->body), B), 0.0, 1e-15);
}

TEST_F(HttpApi, StatusCodes) {
  auto cli = client();
  EXPECT_EQ(cli.Post("/graphs", "{oops", "application/json")->status, 400);
  Json bad = figure2_document();
  bad["edges"][0]["p"] = 1.5;
  auto invalid = cli.Post("/graphs", bad.dump(), "application/json");
  EXPECT_EQ(invalid->status, 400);
  EXPECT_NE(invalid->body.find("edges"), std::string::npos);
  EXPECT_EQ(cli.Get("/graphs/missing/marginals")->status, 404);

  const std::string id = Json::parse(cli.Post("/graphs", figure2_document(0.5).dump(), "application/json")->body)["id"];
  EXPECT_EQ(cli.Put("/graphs/" + id + "/evidence/99", R"({"value":true})", "application/json")->status, 404);
  EXPECT_EQ(cli.Put("/graphs/" + id + "/evidence/1", R"({"value":"yes"})", "application/json")->status, 400);
  ASSERT_EQ(cli.Put("/graphs/" + id + "/evidence/0", R"({"value":false})", "application/json")->status, 200);
  const std::string before = cli.Get("/graphs/" + id + "/marginals")->body;
  auto conflict = cli.Put("/graphs/" + id + "/evidence/3", R"({"value":true})", "application/json");
  EXPECT_EQ(conflict->status, 409);
  EXPECT_EQ(cli.Get("/graphs/" + id + "/marginals")->body, before);
  EXPECT_EQ(cli.Post("/graphs/" + id + "/whatif", R"({"evidence":{"3":true}})", "application/json")->status, 409);
}
