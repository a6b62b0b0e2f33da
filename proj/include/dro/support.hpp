#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dro/rng.hpp"

namespace dro {

using Point = std::vector<double>;

/// Finite atom set with a ground metric.
///
/// Construction checks that the metric is symmetric, zero on the diagonal,
/// positive off it, and (for up to 200 atoms) satisfies the triangle
/// inequality. Grids are immutable and shared by pointer.
class SupportGrid {
 public:
  /// Euclidean distances between atoms.
  static std::shared_ptr<const SupportGrid> euclidean(std::vector<Point> atoms);
  /// Explicit distance matrix, row-major m x m.
  static std::shared_ptr<const SupportGrid> with_metric(
      std::vector<Point> atoms, std::vector<std::vector<double>> metric);

  std::size_t size() const { return atoms_.size(); }
  std::size_t dimension() const { return atoms_.front().size(); }
  const Point& atom(std::size_t i) const { return atoms_[i]; }
  const std::vector<Point>& atoms() const { return atoms_; }
  double distance(std::size_t i, std::size_t j) const { return metric_[i * size() + j]; }
  double diameter() const { return diameter_; }

  bool same_as(const SupportGrid& other) const;

 private:
  SupportGrid(std::vector<Point> atoms, std::vector<double> metric);

  std::vector<Point> atoms_;
  std::vector<double> metric_;
  double diameter_ = 0.0;
};

using GridPtr = std::shared_ptr<const SupportGrid>;

/// Probability vector over a SupportGrid.
class DiscreteDistribution {
 public:
  /// Renormalizes when |sum - 1| <= 1e-9; throws std::invalid_argument
  /// for negative weights, wrong length, or larger normalization error.
  DiscreteDistribution(GridPtr grid, std::vector<double> weights);

  static DiscreteDistribution dirac(GridPtr grid, std::size_t atom);
  static DiscreteDistribution uniform(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  /// Sum_j w_j v_j.
  double expectation(std::span<const double> values) const;

  bool same_grid(const DiscreteDistribution& other) const;

 private:
  GridPtr grid_;
  std::vector<double> weights_;
};

/// Atom indices of n i.i.d. draws.
struct SampleSet {
  GridPtr grid;
  std::vector<std::size_t> indices;
  std::uint64_t seed = 0;

  std::size_t size() const { return indices.size(); }
};

DiscreteDistribution empirical(const SampleSet& samples);

/// beta * a + (1 - beta) * b. Returns the operand itself at beta = 0 or 1.
DiscreteDistribution mixture(double beta, const DiscreteDistribution& a,
                             const DiscreteDistribution& b);

SampleSet sample(const DiscreteDistribution& dist, std::size_t n, std::uint64_t seed);
SampleSet sample(const DiscreteDistribution& dist, std::size_t n, Rng& rng);

/// Inverse-CDF categorical draw; atoms with zero weight are never returned.
std::size_t draw_categorical(std::span<const double> weights, Rng& rng);

/// Throws std::invalid_argument unless both distributions live on the same grid.
void require_same_grid(const DiscreteDistribution& a, const DiscreteDistribution& b);

}  // namespace dro
