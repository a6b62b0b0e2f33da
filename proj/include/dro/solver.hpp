#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dro/bayes.hpp"
#include "dro/cost.hpp"
#include "dro/divergence.hpp"

namespace dro {

enum class Method { SAA, RegularizedSAA, BayesDP, MinmaxDRO, AbsoluteDRO, Satisficing };

std::string to_string(Method m);
Method parse_method(const std::string& name);

enum class Sided { One, Two };

struct SolverDiagnostics {
  std::size_t evaluations = 0;  // inner problems solved
  std::size_t ties = 0;         // decisions tied with the reported minimizer
  std::vector<double> values;   // per-decision objective, in space order
  double reference = 0.0;       // min_x E_center h(x), when used
  double measure_lower = 0.0;   // satisficing: radius-grid estimate of L*
  double measure_upper = 0.0;   // satisficing: Lipschitz certificate (+inf if none)
  double witness_radius = 0.0;  // satisficing: radius at which the witness binds
};

struct Solution {
  Method method = Method::SAA;
  std::size_t index = 0;
  Decision x_star;
  double objective_value = 0.0;
  std::optional<DiscreteDistribution> witness;
  std::optional<double> measure;
  SolverDiagnostics diagnostics;
};

/// Lowest index among values within 1e-12 * max(1, |min|) of the minimum.
/// +inf entries only win when every entry is +inf.
std::size_t argmin_index(std::span<const double> values, std::size_t* ties = nullptr);

/// Largest meaningful radius of a ball family around `center`: the grid
/// diameter for Wasserstein, the divergence range on the center's support
/// for phi-divergences.
double radius_scale(const DivergenceKind& kind, const DiscreteDistribution& center);

/// max(max_P E_P c - ref, ref - min_P E_P c) over the ball, with the binding
/// extremal distribution.
struct Deviation {
  double value = 0.0;
  double upper = 0.0;  // max-sense value
  double lower = 0.0;  // min-sense value
  DiscreteDistribution witness;
};
Deviation absolute_deviation(const AmbiguityBall& ball, std::span<const double> costs, double ref);

/// sup_P (dev(P) - slack) / Delta(P, center) for one decision, where dev is
/// E_P c - ref (one-sided) or |E_P c - ref| (two-sided). Lower estimate from
/// a log-spaced radius grid refined by golden-section search at the best
/// radius; `certificate` is a Lipschitz-based upper bound (+inf if none).
struct RatioEstimate {
  double lower = 0.0;
  double certificate = 0.0;
  double radius = 0.0;
  DiscreteDistribution witness;
  std::size_t evaluations = 0;
};
RatioEstimate fractional_sup(const DiscreteDistribution& center, std::span<const double> costs, double ref,
                             double slack, const DivergenceKind& kind, Sided sided,
                             std::optional<double> lipschitz_xi);

Solution solve_saa(const DiscreteDistribution& data, const CostFunction& cf, const DecisionSpace& space);

Solution solve_regularized_saa(const DiscreteDistribution& data, const CostFunction& cf, const Regularizer& f,
                               double lambda, const DecisionSpace& space);

/// SAA under dp_posterior_mean(spec, data).
Solution solve_bayes_dp(const PriorSpec& spec, const SampleSet& data, const CostFunction& cf,
                        const DecisionSpace& space);

/// min_x max_{P in ball} E_P h(x). measure = objective - min_x E_center h(x).
Solution solve_minmax_dro(const AmbiguityBall& ball, const CostFunction& cf, const DecisionSpace& space);

/// min_x max_{P in ball} |E_P h(x) - ref|, ref = min_x E_center h(x).
Solution solve_absolute_dro(const AmbiguityBall& ball, const CostFunction& cf, const DecisionSpace& space);

/// min_x sup_P (dev - delta) / Delta(P, center) over x with E_center h(x) <= ref + delta.
/// measure is the radius-grid estimate of L*; objective_value is E_center h(x*).
Solution solve_robust_satisficing(const DiscreteDistribution& center, const CostFunction& cf,
                                  const DecisionSpace& space, const DivergenceKind& kind, Sided sided,
                                  double delta = 0.0);

}  // namespace dro
