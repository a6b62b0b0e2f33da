#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dro/cost.hpp"
#include "dro/divergence.hpp"

namespace dro {

struct GapRecord {
  Decision x;
  double true_value = 0.0;     // E_P0 h(x)
  double nominal_value = 0.0;  // E_Pbar h(x)
  double gap = 0.0;
  double abs_gap = 0.0;
};

GapRecord measure_gap(const DiscreteDistribution& p0, const DiscreteDistribution& pbar, const CostFunction& cf,
                      const Decision& x);

enum class BoundKind { Uniform, AbsoluteNominal, AbsoluteDro, RelativeNominal, RelativeDro, MinmaxOneSided };

std::string to_string(BoundKind k);

struct BoundRecord {
  BoundKind kind = BoundKind::Uniform;
  Decision x_star;
  double gap = 0.0;
  double bound = 0.0;
  bool holds = true;
  bool degenerate = false;  // bound is +infinity
  nlohmann::json ingredients = nlohmann::json::object();
};

/// gap <= bound + 1e-9.
bool bound_holds(double gap, double bound);

/// L(x) * W_p(P0, Pbar) against |E_P0 h(x) - E_Pbar h(x)| for every x.
std::vector<std::pair<GapRecord, BoundRecord>> uniform_bound(const DiscreteDistribution& p0,
                                                             const DiscreteDistribution& pbar,
                                                             const CostFunction& cf, const DecisionSpace& space,
                                                             double order = 1.0);

/// Nominal-model bound ||xbar - x*|| E_P0 L(xi) + L* and DRO-model bound 2 L*,
/// with (x*, L*) from solve_absolute_dro. Requires P0 in the ball.
std::pair<BoundRecord, BoundRecord> absolute_bound(const DiscreteDistribution& p0, const AmbiguityBall& ball,
                                                   const CostFunction& cf, const DecisionSpace& space);

/// Nominal-model bound ||xbar - x*|| E_P0 L(xi) + L* Delta(P0, Pbar) and
/// DRO-model bound L* Delta(P0, P*), with (x*, L*, P*) from two-sided robust
/// satisficing. L* is the Lipschitz certificate of the satisficing solution.
std::pair<BoundRecord, BoundRecord> relative_bound(const DiscreteDistribution& p0, const DiscreteDistribution& pbar,
                                                   const CostFunction& cf, const DecisionSpace& space,
                                                   const DivergenceKind& kind);

/// E_P0 h(x*) <= min_x max_{P in ball} E_P h(x). Requires P0 in the ball.
BoundRecord minmax_one_sided_bound(const DiscreteDistribution& p0, const AmbiguityBall& ball,
                                   const CostFunction& cf, const DecisionSpace& space);

enum class Corollary { Uniform, Absolute, Relative };

std::string to_string(Corollary c);

struct ExpectedBoundsSpec {
  DiscreteDistribution p0;
  std::size_t n = 10;
  std::size_t replications = 30;
  std::uint64_t seed = 0;
  Corollary which = Corollary::Uniform;
  DivergenceKind kind = DivergenceKind::wasserstein(1.0);  // relative only
  bool nominal_is_truth = false;                           // Pbar := P0, no sampling
  unsigned workers = 1;
};

struct ExpectedBoundLine {
  BoundKind kind = BoundKind::Uniform;
  double mean_gap = 0.0;
  double mean_bound = 0.0;
  double sigma = 0.0;  // standard error of mean(gap - bound)
  std::size_t degenerate = 0;
  bool holds = true;   // mean_gap <= mean_bound + 3 sigma
};

struct ExpectedBoundsSummary {
  Corollary which = Corollary::Uniform;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::vector<ExpectedBoundLine> lines;
  std::vector<std::vector<BoundRecord>> records;  // per replication
  std::vector<std::uint64_t> seeds;              // per replication
};

/// Monte-Carlo means of gaps and bounds over freshly sampled empirical
/// nominal distributions. Balls for the absolute corollary have radius
/// W1(P0, Pbar) so the hypothesis holds by construction.
ExpectedBoundsSummary expected_bounds(const ExpectedBoundsSpec& spec, const CostFunction& cf,
                                      const DecisionSpace& space);

/// Shortest round-trip decimal form; "inf", "-inf", "nan" otherwise.
std::string format_number(double v);
std::string format_decision(const Decision& x);

std::string bound_csv_header();
std::string bound_csv_row(const BoundRecord& r, std::size_t n, std::uint64_t seed);

}  // namespace dro
