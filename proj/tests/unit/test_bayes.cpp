#include <gtest/gtest.h>

#include <cmath>

#include "dro/bayes.hpp"
#include "dro/solver.hpp"

using namespace dro;

namespace {

const CostParams kNone;

}  // namespace

TEST(PriorSpec, Weights) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}});
  const auto p = DiscreteDistribution::uniform(g);
  EXPECT_DOUBLE_EQ(PriorSpec::with_alpha(p, 2.0).weight(8), 0.2);
  EXPECT_EQ(PriorSpec::with_beta(p, 0.3).weight(100), 0.3);
  EXPECT_EQ(PriorSpec::limit(p).weight(5), 1.0);
  EXPECT_THROW(PriorSpec::with_alpha(p, -1.0), std::invalid_argument);
  EXPECT_THROW(PriorSpec::with_beta(p, 1.5), std::invalid_argument);
  EXPECT_THROW(PriorSpec::with_alpha(p, 1.0).weight(0), std::invalid_argument);
}

TEST(Posterior, MixesPriorAndData) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}});
  const SampleSet data{g, {0, 0, 0, 0, 0, 0, 0, 0}, 0};
  const auto post = dp_posterior_mean(PriorSpec::with_alpha(DiscreteDistribution(g, {0.5, 0.5}), 2.0), data);
  EXPECT_NEAR(post[0], 0.9, 1e-15);
  EXPECT_NEAR(post[1], 0.1, 1e-15);
}

TEST(PriorFit, RecoversPriorFromItsRegularizer) {
  auto g = SupportGrid::euclidean({{0.0}, {0.5}, {1.0}});
  const DecisionSpace s = DecisionSpace::interval(-1.0, 2.0, 13);
  const auto cf = make_builtin_cost("squared", kNone, *g, s);
  const DiscreteDistribution prior(g, {0.2, 0.3, 0.5});
  const auto f = regularizer_from_prior(prior, cf);
  const auto fit = prior_from_regularizer(f, cf, s.points(), g);
  ASSERT_TRUE(fit.feasible);
  EXPECT_LE(fit.residual, 1e-8);
  for (const auto& x : s.points()) EXPECT_NEAR(expected_cost(*fit.prior, cf, x), f(x), 1e-8);
  // Squared loss on three points determines the weights through the first two moments.
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR((*fit.prior)[j], prior[j], 1e-8);
}

TEST(PriorFit, InfeasibleRegularizer) {
  auto g = SupportGrid::euclidean({{0.0}, {1.0}});
  const DecisionSpace s = DecisionSpace::interval(0.0, 1.0, 3);
  const auto cf = make_builtin_cost("absolute", kNone, *g, s);
  const Regularizer f{"too_big", [](const Decision&) { return 5.0; }};
  const auto fit = prior_from_regularizer(f, cf, s.points(), g);
  EXPECT_FALSE(fit.feasible);
  EXPECT_FALSE(fit.prior.has_value());
}

TEST(PriorFit, UniformOnPlusMinusOne) {
  auto g = SupportGrid::euclidean({{-1.0}, {1.0}});
  const DecisionSpace s = DecisionSpace::interval(-1.0, 1.0, 9);
  const auto cf = make_builtin_cost("squared", kNone, *g, s);
  const Regularizer f{"x2p1", [](const Decision& x) { return x[0] * x[0] + 1.0; }};
  const auto fit = prior_from_regularizer(f, cf, s.points(), g);
  ASSERT_TRUE(fit.feasible);
  EXPECT_NEAR((*fit.prior)[0], 0.5, 1e-9);
  EXPECT_NEAR((*fit.prior)[1], 0.5, 1e-9);
}

TEST(PriorFit, MaxEntropyPicksTheSpreadSolution) {
  // Absolute loss with f = 1 on {0, 1}: any w on {0, 0.5, 1} with w0 = w2 works
  // when constraints only sit at x = 0 and x = 1.
  auto g = SupportGrid::euclidean({{0.0}, {0.5}, {1.0}});
  const DecisionSpace s({{0.0}, {1.0}});
  const auto cf = make_builtin_cost("absolute", kNone, *g, s);
  const Regularizer f{"half", [](const Decision&) { return 0.5; }};
  PriorFitOptions opts;
  opts.max_entropy = true;
  const auto fit = prior_from_regularizer(f, cf, s.points(), g, opts);
  ASSERT_TRUE(fit.feasible);
  EXPECT_LE(fit.residual, 1e-8);
  EXPECT_NEAR((*fit.prior)[0], 1.0 / 3.0, 1e-4);
  EXPECT_NEAR((*fit.prior)[1], 1.0 / 3.0, 1e-4);
  EXPECT_NEAR((*fit.prior)[2], 1.0 / 3.0, 1e-4);
}

TEST(PriorFit, RegularizedSaaMatchesBayesWithFittedPrior) {
  auto g = SupportGrid::euclidean({{0.0}, {0.5}, {1.0}});
  const DecisionSpace s = DecisionSpace::interval(0.0, 1.0, 11);
  const auto cf = make_builtin_cost("squared", kNone, *g, s);
  const DiscreteDistribution prior(g, {0.6, 0.1, 0.3});
  const auto f = regularizer_from_prior(prior, cf);
  const SampleSet data{g, {2, 2, 1, 0, 2, 2}, 0};
  const double alpha = 3.0, n = 6.0;
  const auto a = solve_regularized_saa(empirical(data), cf, f, alpha / n, s);
  const auto b = solve_bayes_dp(PriorSpec::with_alpha(prior, alpha), data, cf, s);
  EXPECT_EQ(a.index, b.index);
  for (std::size_t k = 0; k < s.size(); ++k)
    EXPECT_NEAR(a.diagnostics.values[k] * n / (alpha + n), b.diagnostics.values[k], 1e-12);
}
