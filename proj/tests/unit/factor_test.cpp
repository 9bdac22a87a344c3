#include <gtest/gtest.h>

#include <random>

#include "bagrisk/errors.hpp"
#include "bagrisk/factor.hpp"

using namespace bagrisk;

namespace {

Factor random_factor(std::vector<NodeId> scope, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> table(std::size_t{1} << scope.size());
  for (double& x : table) x = u(rng);
  return Factor(std::move(scope), std::move(table));
}

// Entry of `f` at an assignment given as a map.
double at(const Factor& f, const std::map<NodeId, bool>& assignment) { return f.value(assignment); }

std::vector<std::map<NodeId, bool>> assignments(const std::vector<NodeId>& vars) {
  std::vector<std::map<NodeId, bool>> out;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << vars.size()); ++bits) {
    std::map<NodeId, bool> a;
    for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = (bits >> i) & 1u;
    out.push_back(a);
  }
  return out;
}

}  // namespace

TEST(Factor, DefaultIsUnit) {
  const Factor f;
  EXPECT_TRUE(f.scope().empty());
  EXPECT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], 1.0);
}

TEST(Factor, CanonicalizesScope) {
  // Scope given as [3, 1]: index = x3 * 2 + x1.
  const Factor f({3, 1}, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(f.scope(), (std::vector<NodeId>{1, 3}));
  EXPECT_EQ(at(f, {{3, false}, {1, true}}), 0.2);
  EXPECT_EQ(at(f, {{3, true}, {1, false}}), 0.3);
  EXPECT_EQ(f.bit_of(1), 1u);
  EXPECT_EQ(f.bit_of(3), 0u);
  EXPECT_THROW(f.bit_of(2), BagError);
}

TEST(Factor, RejectsMalformed) {
  EXPECT_THROW(Factor({0, 1}, {1.0, 2.0}), BagError);
  EXPECT_THROW(Factor({0, 0}, {1.0, 2.0, 3.0, 4.0}), BagError);
  EXPECT_THROW(Factor({0}, {-1.0, 2.0}), BagError);
}

TEST(Factor, ProductMatchesPointwiseDefinition) {
  const Factor a = random_factor({0, 2, 5}, 1);
  const Factor b = random_factor({2, 3}, 2);
  const Factor p = product(a, b);
  EXPECT_EQ(p.scope(), (std::vector<NodeId>{0, 2, 3, 5}));
  for (const auto& x : assignments(p.scope())) EXPECT_DOUBLE_EQ(at(p, x), at(a, x) * at(b, x));
  const Factor* many[] = {&a, &b, &b};
  const Factor q = product(std::span<const Factor* const>(many));
  for (const auto& x : assignments(q.scope())) EXPECT_DOUBLE_EQ(at(q, x), at(a, x) * at(b, x) * at(b, x));
}

TEST(Factor, ScopeOverflow) {
  const Factor a = Factor::ones({0, 1, 2});
  const Factor b = Factor::ones({3, 4});
  try {
    product(a, b, 4);
    FAIL();
  } catch (const BagError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScopeOverflow);
  }
  EXPECT_NO_THROW(product(a, b, 5));
}

TEST(Factor, SumMaxReduce) {
  const Factor f = random_factor({1, 4, 7}, 3);
  const Factor s = sum_out(f, 4);
  const Factor m = max_out(f, 4);
  EXPECT_EQ(s.scope(), (std::vector<NodeId>{1, 7}));
  for (const auto& x : assignments({1, 7})) {
    auto t = x;
    t[4] = true;
    auto u = x;
    u[4] = false;
    EXPECT_DOUBLE_EQ(at(s, x), at(f, t) + at(f, u));
    EXPECT_DOUBLE_EQ(at(m, x), std::max(at(f, t), at(f, u)));
  }
  const Factor r = reduce(f, 7, true);
  EXPECT_EQ(r.scope(), (std::vector<NodeId>{1, 4}));
  for (const auto& x : assignments({1, 4})) {
    auto t = x;
    t[7] = true;
    EXPECT_EQ(at(r, x), at(f, t));
  }
  EXPECT_THROW(sum_out(f, 2), BagError);
}

TEST(Factor, MarginalizeNormalizeMask) {
  const Factor f = random_factor({0, 1, 2, 3}, 4);
  const std::vector<NodeId> keep{1, 3};
  const Factor m = marginalize_onto(f, keep);
  const Factor expected = sum_out(sum_out(f, 0), 2);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m[i], expected[i], 1e-15);
  const Factor n = normalize(f);
  EXPECT_NEAR(n.sum(), 1.0, 1e-15);
  EXPECT_THROW(normalize(Factor({0}, {0.0, 0.0})), BagError);
  Factor masked = f;
  mask_evidence(masked, {{2, true}, {9, false}});
  for (const auto& x : assignments(f.scope())) {
    EXPECT_EQ(at(masked, x), x.at(2) ? at(f, x) : 0.0);
  }
}

TEST(Factor, MultiplyIntoAndSubIndex) {
  const Factor big = random_factor({0, 3, 4, 6, 8, 9, 10, 11, 12, 13}, 5);
  const Factor small = random_factor({4, 11}, 6);
  Factor a = big;
  multiply_into(a, small);
  Factor b = big;
  const SubIndex index(big.scope(), small.scope());
  multiply_into(b, small, index);
  const Factor c = product(big, small);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], c[i]);
    EXPECT_EQ(b[i], c[i]);
  }
}

TEST(Factor, ScopeSetHelpers) {
  const std::vector<NodeId> a{1, 3, 5};
  const std::vector<NodeId> b{3, 4, 5};
  EXPECT_EQ(scope_union(a, b), (std::vector<NodeId>{1, 3, 4, 5}));
  EXPECT_EQ(scope_intersection(a, b), (std::vector<NodeId>{3, 5}));
  EXPECT_EQ(scope_difference(a, b), (std::vector<NodeId>{1}));
  EXPECT_TRUE(scope_subset(std::vector<NodeId>{3, 5}, a));
  EXPECT_FALSE(scope_subset(b, a));
}

TEST(Factor, TableBytes) {
  EXPECT_EQ(table_bytes(0), 8u);
  EXPECT_EQ(table_bytes(14), 131072u);
  EXPECT_EQ(table_bytes(23), 67108864u);
  EXPECT_EQ(table_bytes(40), std::uint64_t{8192} * 1024 * 1024 * 1024);
}
