#pragma once

#include <span>
#include <string>
#include <vector>

#include "dro/support.hpp"

namespace dro {

enum class PhiGenerator { KL, Chi2, TV };

/// Which argument plays the reference role in F_phi(. || .).
enum class Orientation {
  Forward,  // F_phi(P || center)
  Reverse,  // F_phi(center || P)
};

struct DivergenceKind {
  enum class Family { Wasserstein, Phi };

  Family family = Family::Wasserstein;
  double order = 1.0;  // Wasserstein order p >= 1
  PhiGenerator generator = PhiGenerator::KL;
  Orientation orientation = Orientation::Forward;

  static DivergenceKind wasserstein(double p = 1.0);
  static DivergenceKind phi(PhiGenerator g, Orientation o = Orientation::Forward);

  bool is_wasserstein() const { return family == Family::Wasserstein; }
  std::string name() const;
};

double phi_value(PhiGenerator g, double t);
/// lim_{t -> inf} phi(t) / t; weights mass placed where the reference is zero.
double phi_recession(PhiGenerator g);
std::string to_string(PhiGenerator g);
PhiGenerator parse_generator(const std::string& name);

/// Coupling matrix over grid x grid, row-major.
struct TransportPlan {
  std::size_t m = 0;
  std::vector<double> coupling;
  double cost = 0.0;  // sum pi_ij d_ij^p

  double at(std::size_t i, std::size_t j) const { return coupling[i * m + j]; }
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

/// Exact optimal transport between two distributions on the same grid.
TransportResult optimal_transport(const DiscreteDistribution& a, const DiscreteDistribution& b,
                                  double p = 1.0);
double wasserstein(const DiscreteDistribution& a, const DiscreteDistribution& b, double p = 1.0);

/// sum_j b_j phi(a_j / b_j) with 0 phi(0/0) = 0; may return +infinity.
double phi_divergence(const DiscreteDistribution& a, const DiscreteDistribution& b, PhiGenerator g);

/// Delta(q, center) for the given kind, honoring the phi orientation flag.
double divergence(const DivergenceKind& kind, const DiscreteDistribution& q,
                  const DiscreteDistribution& center);

struct AmbiguityBall {
  AmbiguityBall(DiscreteDistribution center, double radius, DivergenceKind kind);

  DiscreteDistribution center;
  double radius;
  DivergenceKind kind;
};

enum class Extremum { Max, Min };

struct ExtremalResult {
  double value = 0.0;
  DiscreteDistribution witness;
};

/// Worst-case (Max) or best-case (Min) expectation of `costs` over the ball.
///
/// Wasserstein balls are solved exactly as a transport LP. KL balls use the
/// exponential-tilting dual; chi-squared balls the clipped-linear KKT family;
/// total variation the greedy mass transfer. Ties go to the lowest atom index.
ExtremalResult extremal_expectation(const AmbiguityBall& ball, std::span<const double> costs,
                                    Extremum sense);

bool membership(const AmbiguityBall& ball, const DiscreteDistribution& q);

}  // namespace dro
