#include <gtest/gtest.h>

#include <cmath>

#include "dro/cost.hpp"
#include "oracles.hpp"

using namespace dro;

namespace {

const CostParams kNone;

}  // namespace

TEST(ExpectedCost, DiracPicksAtom) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}, {2.0}});
  const DecisionSpace s = DecisionSpace::interval(0.0, 2.0, 5);
  const auto cf = make_builtin_cost("squared", kNone, *g, s);
  EXPECT_DOUBLE_EQ(expected_cost(DiscreteDistribution::dirac(g, 2), cf, {0.5}), 2.25);
}

TEST(ExpectedCost, NewsvendorHandComputation) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}});
  const DecisionSpace s({{0.0}, {1.0}});
  const auto cf = make_builtin_cost("newsvendor", {{"b", 1.0}, {"c", 1.0}}, *g, s);
  EXPECT_DOUBLE_EQ(expected_cost(DiscreteDistribution::uniform(g), cf, {0.0}), 0.5);
}

TEST(ExpectedCost, ConstantCost) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}, {5.0}});
  const DecisionSpace s(std::vector<Decision>{{0.0}});
  const auto cf = make_builtin_cost("constant", {{"value", 7.0}}, *g, s);
  EXPECT_DOUBLE_EQ(expected_cost(DiscreteDistribution::uniform(g), cf, {0.0}), 7.0);
}

TEST(ExpectedCost, LinearInTheDistribution) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    auto g = SupportGrid::euclidean(oracle::random_line(rng, 5));
    const DecisionSpace s = DecisionSpace::interval(0.0, 1.0, 7);
    const auto cf = make_builtin_cost("huber", {{"delta", 0.3}}, *g, s);
    DiscreteDistribution a(g, oracle::random_weights(rng, 5)), b(g, oracle::random_weights(rng, 5));
    const double beta = rng.uniform();
    for (const auto& x : s.points())
      EXPECT_NEAR(expected_cost(mixture(beta, a, b), cf, x),
                  beta * expected_cost(a, cf, x) + (1 - beta) * expected_cost(b, cf, x), 1e-12);
  }
}

TEST(ExpectedCost, NonFiniteValueNamesDecisionAndAtom) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}});
  CostFunction cf{"log", [](const Decision& x, const Point& xi) { return std::log(xi[0] - x[0]); }, {}, {}, false};
  try {
    expected_cost(DiscreteDistribution::uniform(g), cf, {0.0});
    FAIL() << "expected an exception";
  } catch (const std::domain_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x = (0)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("atom 0"), std::string::npos) << msg;
  }
}

TEST(Builtins, UnknownNameAndParameter) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}});
  const DecisionSpace s(std::vector<Decision>{{0.0}});
  EXPECT_THROW(make_builtin_cost("hinge", kNone, *g, s), std::invalid_argument);
  EXPECT_THROW(make_builtin_cost("huber", {{"width", 1.0}}, *g, s), std::invalid_argument);
  EXPECT_THROW(make_builtin_cost("linreg", kNone, *g, s), std::invalid_argument);
}

TEST(Builtins, DeclaredLipschitzConstants) {
  auto g = SupportGrid::euclidean({{0.0}, {0.25}, {1.0}});
  const DecisionSpace s = DecisionSpace::interval(0.0, 1.0, 5);
  const auto abs = make_builtin_cost("absolute", kNone, *g, s);
  const auto sq = make_builtin_cost("squared", kNone, *g, s);
  const auto hub = make_builtin_cost("huber", {{"delta", 1.0}}, *g, s);
  for (const auto& x : s.points()) {
    EXPECT_EQ(abs.lip_in_xi(x), 1.0);
    EXPECT_EQ(hub.lip_in_xi(x), 1.0);
    double far = 0.0;
    for (const auto& a : g->atoms()) far = std::max(far, std::abs(x[0] - a[0]));
    EXPECT_DOUBLE_EQ(sq.lip_in_xi(x), 2.0 * far);
    EXPECT_LE(sq.lip_in_xi(x), 2.0);
  }
}

TEST(Builtins, LipschitzDataDominateFiniteDifferences) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    auto g = SupportGrid::euclidean(oracle::random_line(rng, 6));
    const DecisionSpace s = DecisionSpace::interval(-0.5, 1.5, 11);
    for (const auto& [name, params] : std::vector<std::pair<std::string, CostParams>>{
             {"absolute", {}}, {"squared", {}}, {"newsvendor", {{"b", 3.0}, {"c", 0.5}}}, {"huber", {{"delta", 0.2}}},
             {"constant", {{"value", 2.0}}}}) {
      const auto check = check_cost(make_builtin_cost(name, params, *g, s), *g, s);
      EXPECT_TRUE(check.ok()) << name << " " << check.worst_ratio_xi << " " << check.worst_ratio_x;
    }
  }
}

TEST(Builtins, LinearRegressionLoss) {
  auto g = SupportGrid::euclidean({{0.0, 1.0}, {1.0, 0.0}, {2.0, 3.0}, {-1.0, 0.5}});
  std::vector<Decision> pts;
  for (double w : {-1.0, 0.0, 0.5, 1.0})
    for (double b : {-0.5, 0.0, 0.5}) pts.push_back({w, b});
  const DecisionSpace s(pts);
  const auto cf = make_builtin_cost("linreg", kNone, *g, s);
  EXPECT_DOUBLE_EQ(cf({1.0, 0.5}, {2.0, 3.0}), 0.5);
  EXPECT_DOUBLE_EQ(cf.lip_in_xi({1.0, 0.0}), std::sqrt(2.0));
  EXPECT_TRUE(check_cost(cf, *g, s).ok());
}

TEST(Builtins, ScaledLipschitzFailsTheCheck) {
  auto g = SupportGrid::euclidean({{0.0}, {0.5}, {1.0}});
  const DecisionSpace s = DecisionSpace::interval(0.0, 1.0, 5);
  const auto cf = scale_lipschitz(make_builtin_cost("absolute", kNone, *g, s), 0.01);
  EXPECT_DOUBLE_EQ(cf.lip_in_xi({0.0}), 0.01);
  EXPECT_FALSE(check_cost(cf, *g, s).ok());
}

TEST(TableCost, ExactGridLipschitz) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}, {3.0}});
  const DecisionSpace s({{0.0}, {2.0}});
  const auto cf = table_cost(s, *g, {{0.0, 2.0, 3.0}, {1.0, 1.0, -1.0}});
  EXPECT_DOUBLE_EQ(cf({2.0}, {3.0}), -1.0);
  EXPECT_DOUBLE_EQ(cf.lip_in_xi({0.0}), 2.0);
  EXPECT_DOUBLE_EQ(cf.lip_in_xi({2.0}), 1.0);
  EXPECT_DOUBLE_EQ(cf.lip_in_x({3.0}), 2.0);
  EXPECT_FALSE(cf.nonneg);
  EXPECT_TRUE(check_cost(cf, *g, s).ok());
  EXPECT_THROW(cf({1.0}, {0.0}), std::invalid_argument);
}

TEST(DecisionSpace, IntervalEndpoints) {
  const auto s = DecisionSpace::interval(-2.0, 2.0, 17);
  EXPECT_EQ(s.size(), 17u);
  EXPECT_EQ(s[0][0], -2.0);
  EXPECT_EQ(s[16][0], 2.0);
  EXPECT_DOUBLE_EQ(s[8][0], 0.0);
  EXPECT_THROW(DecisionSpace::interval(1.0, 0.0, 3), std::invalid_argument);
  EXPECT_THROW(DecisionSpace(std::vector<Decision>{}), std::invalid_argument);
}
