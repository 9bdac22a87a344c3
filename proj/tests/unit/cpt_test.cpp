#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "bagrisk/cpt.hpp"
#include "bagrisk/errors.hpp"
#include "brute.hpp"
#include "fixtures.hpp"

using namespace bagrisk;
using namespace testing_support;

namespace {

bool bit_identical(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// P(child = T | parents) straight from the AND / noisy-OR definitions.
double and_row(const std::vector<double>& p, std::uint64_t bits) {
  double prod = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!((bits >> (p.size() - 1 - j)) & 1u)) return 0.0;
    prod *= p[j];
  }
  return prod;
}

double or_row(const std::vector<double>& p, std::uint64_t bits) {
  double fail = 1.0;
  bool any = false;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if ((bits >> (p.size() - 1 - j)) & 1u) {
      any = true;
      fail *= 1.0 - p[j];
    }
  }
  return any ? 1.0 - fail : 0.0;
}

}  // namespace

TEST(Cpt, AndGateRows) {
  const std::vector<double> p{0.8, 0.9, 0.3};
  const Cpt cpt = build_and_cpt(p);
  ASSERT_EQ(cpt.table.size(), 16u);
  EXPECT_EQ(cpt.parent_count(), 3u);
  for (std::uint64_t bits = 0; bits < 8; ++bits) {
    EXPECT_DOUBLE_EQ(cpt.p_true(bits), and_row(p, bits));
    EXPECT_DOUBLE_EQ(cpt.table[bits << 1] + cpt.table[(bits << 1) | 1], 1.0);
  }
  EXPECT_EQ(cpt.p_true(0b110), 0.0);
  EXPECT_DOUBLE_EQ(cpt.p_true(0b111), 0.8 * 0.9 * 0.3);
}

TEST(Cpt, NoisyOrRows) {
  const std::vector<double> p{0.1, 0.9};
  const Cpt cpt = build_or_cpt(p);
  EXPECT_EQ(cpt.p_true(0b00), 0.0);
  EXPECT_DOUBLE_EQ(cpt.p_true(0b10), 0.1);
  EXPECT_DOUBLE_EQ(cpt.p_true(0b01), 0.9);
  EXPECT_DOUBLE_EQ(cpt.p_true(0b11), 1.0 - 0.9 * 0.1);
  for (std::uint64_t bits = 0; bits < 4; ++bits) EXPECT_DOUBLE_EQ(cpt.p_true(bits), or_row(p, bits));
}

TEST(Cpt, IdsErrorReducesBitExactlyAtZero) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(1 + seed % 5);
    for (double& x : p) x = u(rng);
    const Cpt a0 = build_and_cpt_ids(p, 0.0);
    const Cpt a = build_and_cpt(p);
    const Cpt o0 = build_or_cpt_ids(p, 0.0);
    const Cpt o = build_or_cpt(p);
    for (std::size_t i = 0; i < a.table.size(); ++i) {
      EXPECT_TRUE(bit_identical(a0.table[i], a.table[i]));
      EXPECT_TRUE(bit_identical(o0.table[i], o.table[i]));
    }
  }
}

TEST(Cpt, IdsErrorAtOneForcesChildTrue) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(1 + seed % 5);
    for (double& x : p) x = u(rng);
    for (const Cpt& cpt : {build_and_cpt_ids(p, 1.0), build_or_cpt_ids(p, 1.0)}) {
      for (std::uint64_t bits = 0; bits < (1u << p.size()); ++bits) {
        EXPECT_EQ(cpt.p_true(bits), 1.0);
        EXPECT_EQ(cpt.table[bits << 1], 0.0);
      }
    }
  }
}

TEST(Cpt, IdsErrorRows) {
  const std::vector<double> p{0.8, 0.5};
  const double pe = 0.05;
  const Cpt a = build_and_cpt_ids(p, pe);
  EXPECT_DOUBLE_EQ(a.p_true(0b00), pe);
  EXPECT_DOUBLE_EQ(a.p_true(0b10), pe);
  EXPECT_DOUBLE_EQ(a.p_true(0b11), 1.0 - (1.0 - pe) * (1.0 - 0.8 * 0.5));
  const Cpt o = build_or_cpt_ids(p, pe);
  EXPECT_DOUBLE_EQ(o.p_true(0b00), pe);
  EXPECT_DOUBLE_EQ(o.p_true(0b01), 1.0 - (1.0 - pe) * (1.0 - 0.5));
  EXPECT_DOUBLE_EQ(o.p_true(0b11), 1.0 - (1.0 - pe) * 0.2 * 0.5);
}

TEST(Cpt, RejectsBadInput) {
  EXPECT_THROW(build_or_cpt(std::vector<double>{}), BagError);
  EXPECT_THROW(build_and_cpt(std::vector<double>{1.1}), BagError);
  EXPECT_THROW(build_or_cpt_ids(std::vector<double>{0.5}, -0.1), BagError);
  EXPECT_THROW(prior_cpt(2.0), BagError);
}

TEST(Cpt, NodeCptMatchesGateDefinition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BagGraph g = augment_zero_day(random_bag(seed, 8, 3, true), 0.15);
    for (NodeId v = 0; v < g.size(); ++v) {
      const Cpt cpt = node_cpt(g, v);
      const auto parents = g.parents(v);
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << parents.size()); ++bits) {
        std::uint64_t assignment = 0;
        for (std::size_t j = 0; j < parents.size(); ++j) {
          if ((bits >> (parents.size() - 1 - j)) & 1u) assignment |= std::uint64_t{1} << parents[j];
        }
        EXPECT_NEAR(cpt.p_true(bits), gate_probability(g, v, assignment), 1e-15);
      }
    }
  }
}

TEST(Cpt, PriorAndFactorLayout) {
  const BagGraph g = figure2(0.7);
  const Factor prior = node_cpt(g, A).to_factor();
  EXPECT_EQ(prior.scope(), std::vector<NodeId>{A});
  EXPECT_DOUBLE_EQ(prior[1], 0.7);
  // p(C | A, B): canonical scope [A, B, C], A is the most significant bit.
  const Factor c = node_cpt(g, C).to_factor();
  EXPECT_EQ(c.scope(), (std::vector<NodeId>{A, B, C}));
  EXPECT_DOUBLE_EQ(c[0b101], 0.1);
  EXPECT_DOUBLE_EQ(c[0b011], 0.9);
  EXPECT_EQ(cpt_factors(g).size(), 7u);
}
