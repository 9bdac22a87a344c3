#include <gtest/gtest.h>

#include <algorithm>

#include "bagrisk/errors.hpp"
#include "bagrisk/graph_io.hpp"
#include "bagrisk/jt.hpp"
#include "brute.hpp"
#include "fixtures.hpp"

using namespace bagrisk;
using namespace testing_support;

namespace {

const OrderSpec kAlphabetical{Heuristic::MinWeight, 0, std::vector<NodeId>{A, B, C, D, E, F}};

}  // namespace

TEST(CliqueTree, ExampleNetworkAlphabeticalOrder) {
  const CliqueTree tree = build_clique_tree(figure2(), kAlphabetical);
  EXPECT_EQ(tree.initial_factor_count(), 6u);
  std::vector<std::vector<NodeId>> scopes;
  for (const auto& f : tree.factors()) scopes.push_back(f.scope);
  EXPECT_EQ(scopes, (std::vector<std::vector<NodeId>>{{A, B, C, D}, {C, D, E}, {D, E, F}, {F, G}}));
  std::vector<std::vector<NodeId>> clusters;
  for (const auto& c : tree.clusters()) clusters.push_back(c.scope);
  // Sepsets along the chain, then the two leaf clusters.
  EXPECT_EQ(clusters, (std::vector<std::vector<NodeId>>{{C, D}, {D, E}, {F}, {A, B}, {G}}));
  EXPECT_TRUE(tree.is_tree());
  EXPECT_TRUE(tree.running_intersection_holds());
  EXPECT_TRUE(tree.assignment_valid(figure2()));
  EXPECT_EQ(tree.max_factor_scope(), 4u);
  EXPECT_EQ(tree.estimated_bytes(), table_bytes(4) + 2 * table_bytes(3) + table_bytes(2));
}

TEST(CliqueTree, StructuralInvariantsOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const BagGraph g = random_bag(seed, 5 + seed % 25, 2 + seed % 3);
    for (Heuristic h : {Heuristic::MinWeight, Heuristic::Random, Heuristic::MinFill}) {
      const CliqueTree tree = build_clique_tree(g, OrderSpec{h, seed, std::nullopt});
      EXPECT_TRUE(tree.is_tree()) << "seed " << seed;
      EXPECT_TRUE(tree.running_intersection_holds()) << "seed " << seed;
      EXPECT_TRUE(tree.assignment_valid(g)) << "seed " << seed;
      for (std::size_t f = 0; f + 1 < tree.factors().size(); ++f) {
        for (std::size_t c : tree.factors()[f].clusters) {
          for (std::size_t other : tree.clusters()[c].factors) {
            if (other == f) continue;
            EXPECT_FALSE(scope_subset(tree.factors()[f].scope, tree.factors()[other].scope))
                << "redundant factor survived pruning";
          }
        }
      }
    }
  }
}

TEST(JunctionTree, Figure2PosteriorsMatchOracle) {
  for (double prior : {1.0, 0.7}) {
    const BagGraph g = figure2(prior);
    JunctionTree jt(g, {kAlphabetical, kDefaultMaxScope});
    for (const EvidenceSet& ev : {EvidenceSet{}, EvidenceSet{{E, true}}, EvidenceSet{{G, true}, {B, false}}}) {
      jt.calibrate(ev);
      const auto expected = brute_posteriors(g, ev);
      const auto got = jt.all_marginals();
      for (NodeId v = 0; v < g.size(); ++v) {
        EXPECT_NEAR(got[v], expected[v], 1e-12);
        EXPECT_NEAR(jt.marginal(v), expected[v], 1e-12);
      }
    }
  }
}

TEST(JunctionTree, ClusterBeliefsAreConsistent) {
  const BagGraph g = figure2();
  JunctionTree jt(g);
  jt.calibrate({{E, true}});
  const auto expected = brute_posteriors(g, {{E, true}});
  for (std::size_t c = 0; c < jt.tree().clusters().size(); ++c) {
    const Factor belief = jt.cluster_belief(c);
    EXPECT_NEAR(belief.sum(), 1.0, 1e-12);
    for (NodeId v : belief.scope()) {
      const std::vector<NodeId> one{v};
      EXPECT_NEAR(marginalize_onto(belief, one)[1], expected[v], 1e-12);
    }
  }
}

TEST(JunctionTree, RandomGraphsWithEvidence) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const BagGraph g = random_bag(seed, 6 + seed % 7, 2 + seed % 3, seed % 2 == 1);
    JunctionTree jt(g);
    for (std::size_t k = 0; k <= 2; ++k) {
      const EvidenceSet ev = random_evidence(seed * 7 + k, g, k);
      const auto got = jt.requery(ev);
      const auto expected = brute_posteriors(g, ev);
      for (NodeId v = 0; v < g.size(); ++v) EXPECT_NEAR(got[v], expected[v], 1e-9) << "seed " << seed;
    }
  }
}

TEST(JunctionTree, DisconnectedGraph) {
  std::vector<BagNode> nodes;
  for (NodeId v = 0; v < 6; ++v) nodes.push_back({v, "", GateType::Or, std::nullopt, 0.0});
  nodes[0].prior = 0.4;
  nodes[3].prior = 0.9;
  nodes[5].prior = 0.2;
  const BagGraph g = build_graph(nodes, {{0, 1, 0.5}, {1, 2, 0.7}, {3, 4, 0.9}});
  JunctionTree jt(g);
  EXPECT_TRUE(jt.tree().is_tree());
  const auto got = jt.requery({{4, true}});
  const auto expected = brute_posteriors(g, {{4, true}});
  for (NodeId v = 0; v < 6; ++v) EXPECT_NEAR(got[v], expected[v], 1e-12);
}

TEST(JunctionTree, RequeryReusesStructure) {
  const BagGraph g = load_graph(data_path("sme.json"));
  JunctionTree jt(g);
  jt.calibrate({});
  const auto before = jt.counters();
  jt.requery({{7, true}});
  jt.requery({{7, true}, {3, false}});
  jt.requery({});
  const auto after = jt.counters();
  EXPECT_EQ(after.ordering_runs, before.ordering_runs);
  EXPECT_EQ(after.tree_builds, before.tree_builds);
  EXPECT_EQ(after.calibrations, before.calibrations + 3);
  EXPECT_GT(after.messages, before.messages);
}

TEST(JunctionTree, ImpossibleEvidenceRestoresPreviousState) {
  const BagGraph g = figure2(0.5);
  JunctionTree jt(g);
  const auto baseline = jt.requery({{E, true}});
  try {
    jt.calibrate({{A, false}, {D, true}});
    FAIL();
  } catch (const BagError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImpossibleEvidence);
  }
  EXPECT_EQ(jt.evidence(), (EvidenceSet{{E, true}}));
  const auto after = jt.all_marginals();
  for (NodeId v = 0; v < g.size(); ++v) EXPECT_EQ(after[v], baseline[v]);
}

TEST(JunctionTree, Metrics) {
  JunctionTree jt(figure2(), {kAlphabetical, kDefaultMaxScope});
  jt.requery({});
  const JtMetrics m = jt.metrics();
  EXPECT_EQ(m.factor_count, 4u);
  EXPECT_EQ(m.max_scope, 4u);
  EXPECT_EQ(m.est_bytes, 128u + 64u + 64u + 32u);
  EXPECT_GE(m.build_seconds, 0.0);
  EXPECT_GE(m.requery_seconds, 0.0);
}

TEST(JunctionTree, ScopeCap) {
  try {
    JunctionTree jt(figure2(), {kAlphabetical, 3});
    FAIL();
  } catch (const BagError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScopeOverflow);
  }
}

TEST(JunctionTree, QueriesNeedCalibration) {
  JunctionTree jt(figure2());
  EXPECT_FALSE(jt.calibrated());
  EXPECT_THROW(jt.marginal(A), BagError);
  jt.calibrate({});
  EXPECT_THROW(jt.marginal(99), BagError);
}
