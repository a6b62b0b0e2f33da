#pragma once

#include <optional>
#include <vector>

#include "dro/cost.hpp"
#include "dro/support.hpp"

namespace dro {

/// Prior estimate with the rule that sets its mixture weight.
class PriorSpec {
 public:
  enum class Mode { Alpha, Beta, Limit };

  /// Weight alpha / (alpha + n); alpha >= 0.
  static PriorSpec with_alpha(DiscreteDistribution prior, double alpha);
  /// Fixed weight beta in [0, 1].
  static PriorSpec with_beta(DiscreteDistribution prior, double beta);
  /// alpha -> infinity: the prior alone.
  static PriorSpec limit(DiscreteDistribution prior);

  const DiscreteDistribution& prior() const { return prior_; }
  Mode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  /// Mixture weight on the prior for n observations.
  double weight(std::size_t n) const;

 private:
  PriorSpec(DiscreteDistribution prior, Mode mode, double alpha, double beta)
      : prior_(std::move(prior)), mode_(mode), alpha_(alpha), beta_(beta) {}

  DiscreteDistribution prior_;
  Mode mode_;
  double alpha_;
  double beta_;
};

/// weight * prior + (1 - weight) * empirical(data).
DiscreteDistribution dp_posterior_mean(const PriorSpec& spec, const SampleSet& data);

struct PriorFitOptions {
  bool max_entropy = false;
  int entropy_iterations = 200;
  double tolerance = 1e-8;
};

struct PriorFit {
  bool feasible = false;
  std::optional<DiscreteDistribution> prior;
  double residual = 0.0;  // max_k |sum_j w_j h(x_k, xi_j) - f(x_k)|
  std::size_t lp_iterations = 0;
};

/// Finds w >= 0, sum w = 1 with sum_j w_j h(x_k, xi_j) = f(x_k) at every
/// constraint decision. Infeasible systems return feasible = false; LP
/// breakdowns throw std::runtime_error.
PriorFit prior_from_regularizer(const Regularizer& f, const CostFunction& cf, const std::vector<Decision>& xs,
                                const GridPtr& grid, const PriorFitOptions& options = {});

/// f(x) = E_prior h(x, xi).
Regularizer regularizer_from_prior(const DiscreteDistribution& prior, const CostFunction& cf);

}  // namespace dro
