#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dro/cost.hpp"
#include "dro/divergence.hpp"
#include "dro/solver.hpp"

namespace dro {

enum class RobustnessKind { Absolute, Relative, Local, SolutionSet, ObjectiveSet, Pac };

std::string to_string(RobustnessKind k);

struct RobustnessReport {
  Decision x;
  RobustnessKind kind = RobustnessKind::Absolute;
  double measure = 0.0;  // may be +infinity
  std::optional<DiscreteDistribution> witness;
  double radius = 0.0;

  // relative: Lipschitz certificate; local: extrapolated limit.
  double upper = 0.0;
  // local: raw sequence at radii diam * 2^-k, k = 4..12.
  std::vector<double> radii;
  std::vector<double> sequence;
  bool converged = true;
  // set kinds: number of model evaluations.
  std::size_t evaluations = 0;
  // pac: Monte-Carlo probability and its binomial standard error, the
  // Markov lower bound, and the Monte-Carlo mean of E_P h with its standard error.
  std::optional<double> confidence;
  double confidence_stderr = 0.0;
  double markov_bound = 0.0;
  double mc_mean = 0.0;
  double mc_mean_stderr = 0.0;
};

class DirichletPrior {
 public:
  DirichletPrior(DiscreteDistribution base, double concentration);

  const DiscreteDistribution& base() const { return base_; }
  double concentration() const { return alpha_; }

  /// One Dirichlet(alpha * base) weight vector.
  std::vector<double> draw(Rng& rng) const;

 private:
  DiscreteDistribution base_;
  double alpha_;
};

/// max(max_P E_P h(x) - ref, ref - min_P E_P h(x)) over the ball.
RobustnessReport absolute_measure(const Decision& x, double ref, const AmbiguityBall& ball, const CostFunction& cf);

/// sup_P |E_P h(x) - ref| / Delta(P, center); +infinity unless E_center h(x) = ref within 1e-9.
RobustnessReport relative_measure(const Decision& x, double ref, const DivergenceKind& kind,
                                  const DiscreteDistribution& center, const CostFunction& cf);

enum class SetVariant { Solution, Objective };

/// Small-radius limit of min_x max_P |E_P h(x) - ref| / eps (objective) or
/// ||argmin_x max_P E_P h(x) - x0|| / eps (solution), x0 = argmin_x E_center h(x).
RobustnessReport local_measure(const DecisionSpace& space, const DiscreteDistribution& center, double ref,
                               const CostFunction& cf, const DivergenceKind& kind, SetVariant variant);

/// Lower estimate of the sup over the ball of the solution or optimal-value
/// distance to the center's problem.
RobustnessReport set_robustness(const AmbiguityBall& ball, const CostFunction& cf, const DecisionSpace& space,
                                SetVariant variant, std::size_t budget, std::uint64_t seed = 0);

/// Exact sup over an explicit finite model set.
RobustnessReport set_robustness(const DiscreteDistribution& reference, const std::vector<DiscreteDistribution>& models,
                                const CostFunction& cf, const DecisionSpace& space, SetVariant variant);

/// Probability under Dirichlet(alpha * base) that |E_P h(x) - ref| <= L,
/// with the Markov lower bound max(0, 1 - (E_base h(x) + ref) / L).
/// Draws are split into fixed chunks with derived seeds, so the result does
/// not depend on `workers`.
RobustnessReport pac_robustness(const DirichletPrior& prior, const CostFunction& cf, const Decision& x, double ref,
                                double L, std::size_t draws, std::uint64_t seed, unsigned workers = 1);

}  // namespace dro
