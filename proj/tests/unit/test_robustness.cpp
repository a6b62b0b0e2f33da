#include <gtest/gtest.h>

#include <cmath>

#include "dro/robustness.hpp"
#include "oracles.hpp"

using namespace dro;

namespace {

const CostParams kNone;

struct Line {
  GridPtr grid = SupportGrid::euclidean({{0.0}, {0.5}, {1.0}});
  DecisionSpace space = DecisionSpace::interval(0.0, 1.0, 5);
  DiscreteDistribution center{grid, {0.2, 0.5, 0.3}};
};

}  // namespace

TEST(AbsoluteMeasure, ZeroRadiusAtReference) {
  Line l;
  const auto cf = make_builtin_cost("absolute", kNone, *l.grid, l.space);
  const Decision x{0.5};
  const double ref = expected_cost(l.center, cf, x);
  const auto r = absolute_measure(x, ref, AmbiguityBall(l.center, 0.0, DivergenceKind::wasserstein()), cf);
  EXPECT_NEAR(r.measure, 0.0, 1e-12);
  EXPECT_EQ(r.kind, RobustnessKind::Absolute);
}

TEST(AbsoluteMeasure, LipschitzBoundOnWasserstein) {
  Line l;
  const auto cf = make_builtin_cost("absolute", kNone, *l.grid, l.space);
  for (double eps : {0.05, 0.1, 0.3}) {
    const Decision x{0.5};
    const double ref = expected_cost(l.center, cf, x);
    const auto r = absolute_measure(x, ref, AmbiguityBall(l.center, eps, DivergenceKind::wasserstein()), cf);
    EXPECT_LE(r.measure, eps + 1e-9);
    EXPECT_GT(r.measure, 0.0);
  }
}

TEST(RelativeMeasure, MismatchedReferenceIsInfinite) {
  Line l;
  const auto cf = make_builtin_cost("squared", kNone, *l.grid, l.space);
  const Decision x{0.25};
  const double ref = expected_cost(l.center, cf, x);
  EXPECT_TRUE(std::isinf(relative_measure(x, ref + 0.1, DivergenceKind::wasserstein(), l.center, cf).measure));
  EXPECT_TRUE(std::isfinite(relative_measure(x, ref, DivergenceKind::wasserstein(), l.center, cf).measure));
}

TEST(RelativeMeasure, ConstantCostIsZero) {
  Line l;
  const auto cf = make_builtin_cost("constant", {{"value", 2.0}}, *l.grid, l.space);
  for (auto kind : {DivergenceKind::wasserstein(), DivergenceKind::phi(PhiGenerator::KL),
                    DivergenceKind::phi(PhiGenerator::TV)})
    EXPECT_EQ(relative_measure(Decision{0.0}, 2.0, kind, l.center, cf).measure, 0.0);
}

TEST(RelativeMeasure, AbsoluteLossBoundedByOne) {
  Rng rng(41);
  for (int t = 0; t < 10; ++t) {
    auto g = SupportGrid::euclidean(oracle::random_line(rng, 4));
    const DecisionSpace s = DecisionSpace::interval(0.0, 1.0, 5);
    const auto cf = make_builtin_cost("absolute", kNone, *g, s);
    const DiscreteDistribution c(g, oracle::random_weights(rng, 4));
    const Decision x{rng.uniform()};
    const auto r = relative_measure(x, expected_cost(c, cf, x), DivergenceKind::wasserstein(), c, cf);
    EXPECT_LE(r.measure, 1.0 + 1e-9);
    EXPECT_LE(r.measure, r.upper + 1e-9);
  }
}

TEST(LocalMeasure, ConstantCostIsZero) {
  Line l;
  const auto cf = make_builtin_cost("constant", {{"value", 1.0}}, *l.grid, l.space);
  const auto r = local_measure(l.space, l.center, 1.0, cf, DivergenceKind::wasserstein(), SetVariant::Objective);
  EXPECT_EQ(r.measure, 0.0);
  EXPECT_EQ(r.sequence.size(), 9u);
}

TEST(LocalMeasure, AbsoluteLossAtMostOne) {
  Line l;
  const auto cf = make_builtin_cost("absolute", kNone, *l.grid, l.space);
  const double ref = solve_saa(l.center, cf, l.space).objective_value;
  const auto r = local_measure(l.space, l.center, ref, cf, DivergenceKind::wasserstein(), SetVariant::Objective);
  EXPECT_LE(r.measure, 1.0 + 1e-9);
  EXPECT_GE(r.measure, 0.0);
  for (std::size_t k = 1; k < r.radii.size(); ++k) EXPECT_LT(r.radii[k], r.radii[k - 1]);
}

TEST(SetRobustness, ModelSetIsExact) {
  Line l;
  const auto cf = make_builtin_cost("absolute", kNone, *l.grid, l.space);
  const std::vector<DiscreteDistribution> models = {DiscreteDistribution::dirac(l.grid, 0), l.center,
                                                    DiscreteDistribution::dirac(l.grid, 2)};
  const auto sol = set_robustness(l.center, models, cf, l.space, SetVariant::Solution);
  // Reference median is 0.5; the Diracs move it to 0 and 1.
  EXPECT_NEAR(sol.measure, 0.5, 1e-12);
  const auto obj = set_robustness(l.center, models, cf, l.space, SetVariant::Objective);
  EXPECT_NEAR(obj.measure, expected_cost(l.center, cf, Decision{0.5}), 1e-12);
  EXPECT_EQ(obj.evaluations, 3u);
}

TEST(SetRobustness, BallEstimateGrowsWithRadiusAndIsReproducible) {
  Line l;
  const auto cf = make_builtin_cost("squared", kNone, *l.grid, l.space);
  const auto a = set_robustness(AmbiguityBall(l.center, 0.0, DivergenceKind::wasserstein()), cf, l.space,
                                SetVariant::Objective, 50, 3);
  EXPECT_EQ(a.measure, 0.0);
  const auto b = set_robustness(AmbiguityBall(l.center, 0.4, DivergenceKind::wasserstein()), cf, l.space,
                                SetVariant::Objective, 50, 3);
  const auto c = set_robustness(AmbiguityBall(l.center, 0.4, DivergenceKind::wasserstein()), cf, l.space,
                                SetVariant::Objective, 50, 3);
  EXPECT_GT(b.measure, 0.0);
  EXPECT_EQ(b.measure, c.measure);
  ASSERT_TRUE(b.witness);
  EXPECT_TRUE(membership(AmbiguityBall(l.center, 0.4, DivergenceKind::wasserstein()), *b.witness));
}

TEST(Pac, HugeToleranceGivesCertainty) {
  Line l;
  const auto cf = make_builtin_cost("absolute", kNone, *l.grid, l.space);
  const DirichletPrior prior(l.center, 2.0);
  const Decision x{0.5};
  const auto r = pac_robustness(prior, cf, x, expected_cost(l.center, cf, x), 1e6, 2000, 5);
  EXPECT_EQ(*r.confidence, 1.0);
  EXPECT_GT(r.markov_bound, 0.99);
}

TEST(Pac, MarkovIsALowerBound) {
  Line l;
  const auto cf = make_builtin_cost("squared", kNone, *l.grid, l.space);
  const Decision x{0.25};
  const double ref = expected_cost(l.center, cf, x);
  for (double L : {0.05, 0.1, 0.3}) {
    const auto r = pac_robustness(DirichletPrior(l.center, 1.0), cf, x, ref, L, 20000, 9);
    EXPECT_LE(r.markov_bound, *r.confidence + 3.0 * r.confidence_stderr + 1e-12);
  }
}

TEST(Pac, ConcentrationRaisesConfidence) {
  Line l;
  const auto cf = make_builtin_cost("absolute", kNone, *l.grid, l.space);
  const Decision x{0.5};
  const double ref = expected_cost(l.center, cf, x);
  const auto lo = pac_robustness(DirichletPrior(l.center, 1.0), cf, x, ref, 0.05, 20000, 11);
  const auto hi = pac_robustness(DirichletPrior(l.center, 1000.0), cf, x, ref, 0.05, 20000, 11);
  EXPECT_GT(*hi.confidence, *lo.confidence);
  EXPECT_GT(*hi.confidence, 0.95);
  EXPECT_NEAR(hi.mc_mean, ref, 4.0 * hi.mc_mean_stderr + 1e-12);
}

TEST(Pac, IndependentOfWorkerCount) {
  Line l;
  const auto cf = make_builtin_cost("squared", kNone, *l.grid, l.space);
  const Decision x{0.75};
  const double ref = expected_cost(l.center, cf, x);
  const auto a = pac_robustness(DirichletPrior(l.center, 3.0), cf, x, ref, 0.1, 10000, 21, 1);
  const auto b = pac_robustness(DirichletPrior(l.center, 3.0), cf, x, ref, 0.1, 10000, 21, 3);
  EXPECT_EQ(*a.confidence, *b.confidence);
  EXPECT_EQ(a.mc_mean, b.mc_mean);
}

TEST(Pac, RejectsBadArguments) {
  Line l;
  const auto cf = make_builtin_cost("squared", kNone, *l.grid, l.space);
  const DirichletPrior prior(l.center, 1.0);
  EXPECT_THROW(pac_robustness(prior, cf, Decision{0.0}, 0.1, 0.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(pac_robustness(prior, cf, Decision{0.0}, -1.0, 1.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(DirichletPrior(l.center, -1.0), std::invalid_argument);
}

TEST(Dirichlet, MeanMatchesBase) {
  Line l;
  const DirichletPrior prior(l.center, 4.0);
  Rng rng(77);
  std::vector<double> mean(3, 0.0);
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    const auto w = prior.draw(rng);
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      mean[j] += w[j] / N;
      s += w[j];
    }
    ASSERT_NEAR(s, 1.0, 1e-12);
  }
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(mean[j], l.center[j], 0.01);
}

TEST(SetRobustness, BallAroundTwoAtomsSeesMixtures) {
  // Shifted-quadratic example: the two Diracs share optimal value 0, but
  // mixtures inside a ball reaching both have a positive optimal value.
  auto g = SupportGrid::euclidean({{-0.01}, {0.01}});
  const DecisionSpace s = DecisionSpace::interval(-2.0, 2.0, 17);
  const CostFunction moved{"moved", [](const Decision& x, const Point& xi) {
                             return xi[0] < 0.0 ? x[0] * x[0] : (x[0] + 1.0) * (x[0] + 1.0);
                           }};
  const AmbiguityBall ball(DiscreteDistribution::dirac(g, 0), 0.02, DivergenceKind::wasserstein());
  const auto obj = set_robustness(ball, moved, s, SetVariant::Objective, 200, 4);
  EXPECT_GT(obj.measure, 0.0);
  const auto sol = set_robustness(ball, moved, s, SetVariant::Solution, 200, 4);
  EXPECT_NEAR(sol.measure, 1.0, 1e-12);
}
