#include "dro/support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dro {

namespace {

constexpr double kMetricTol = 1e-12;
constexpr std::size_t kTriangleCheckLimit = 200;

}  // namespace

SupportGrid::SupportGrid(std::vector<Point> atoms, std::vector<double> metric)
    : atoms_(std::move(atoms)), metric_(std::move(metric)) {
  const std::size_t m = atoms_.size();
  if (m == 0) throw std::invalid_argument("support grid needs at least one atom");
  const std::size_t dim = atoms_.front().size();
  for (const auto& a : atoms_) {
    if (a.size() != dim || dim == 0)
      throw std::invalid_argument("all atoms must share a nonzero dimension");
    for (double v : a)
      if (!std::isfinite(v)) throw std::invalid_argument("atom coordinates must be finite");
  }
  if (metric_.size() != m * m) throw std::invalid_argument("metric must be m x m");

  double scale = 0.0;
  for (double d : metric_) {
    if (!std::isfinite(d) || d < 0.0)
      throw std::invalid_argument("metric entries must be finite and nonnegative");
    scale = std::max(scale, d);
  }
  const double tol = kMetricTol * std::max(1.0, scale);
  for (std::size_t i = 0; i < m; ++i) {
    if (distance(i, i) != 0.0) throw std::invalid_argument("metric diagonal must be zero");
    for (std::size_t j = i + 1; j < m; ++j) {
      if (std::abs(distance(i, j) - distance(j, i)) > tol)
        throw std::invalid_argument("metric must be symmetric");
      if (atoms_[i] == atoms_[j])
        throw std::invalid_argument("atoms must be pairwise distinct (atoms " +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      if (distance(i, j) <= 0.0)
        throw std::invalid_argument("distinct atoms must have positive distance");
    }
  }
  if (m <= kTriangleCheckLimit) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
          if (distance(i, k) > distance(i, j) + distance(j, k) + tol)
            throw std::invalid_argument("metric violates the triangle inequality");
  }
  diameter_ = scale;
}

std::shared_ptr<const SupportGrid> SupportGrid::euclidean(std::vector<Point> atoms) {
  const std::size_t m = atoms.size();
  std::vector<double> metric(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (atoms[i].size() != atoms[j].size())
        throw std::invalid_argument("all atoms must share a nonzero dimension");
      double s = 0.0;
      for (std::size_t k = 0; k < atoms[i].size(); ++k) {
        const double d = atoms[i][k] - atoms[j][k];
        s += d * d;
      }
      metric[i * m + j] = metric[j * m + i] = std::sqrt(s);
    }
  }
  return std::shared_ptr<const SupportGrid>(new SupportGrid(std::move(atoms), std::move(metric)));
}

std::shared_ptr<const SupportGrid> SupportGrid::with_metric(
    std::vector<Point> atoms, std::vector<std::vector<double>> metric) {
  const std::size_t m = atoms.size();
  std::vector<double> flat;
  flat.reserve(m * m);
  if (metric.size() != m) throw std::invalid_argument("metric must be m x m");
  for (const auto& row : metric) {
    if (row.size() != m) throw std::invalid_argument("metric must be m x m");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return std::shared_ptr<const SupportGrid>(new SupportGrid(std::move(atoms), std::move(flat)));
}

bool SupportGrid::same_as(const SupportGrid& other) const {
  return this == &other || (atoms_ == other.atoms_ && metric_ == other.metric_);
}

DiscreteDistribution::DiscreteDistribution(GridPtr grid, std::vector<double> weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
  if (!grid_) throw std::invalid_argument("distribution needs a grid");
  if (weights_.size() != grid_->size())
    throw std::invalid_argument("weight vector length " + std::to_string(weights_.size()) +
                                " does not match grid size " + std::to_string(grid_->size()));
  double sum = 0.0;
  for (double& w : weights_) {
    if (!std::isfinite(w)) throw std::invalid_argument("weights must be finite");
    if (w < 0.0) {
      if (w < -1e-12) throw std::invalid_argument("weights must be nonnegative");
      w = 0.0;
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("weights sum to " + std::to_string(sum) + ", expected 1");
  if (sum != 1.0)
    for (double& w : weights_) w /= sum;
}

DiscreteDistribution DiscreteDistribution::dirac(GridPtr grid, std::size_t atom) {
  if (!grid || atom >= grid->size()) throw std::invalid_argument("dirac atom out of range");
  std::vector<double> w(grid->size(), 0.0);
  w[atom] = 1.0;
  return DiscreteDistribution(std::move(grid), std::move(w));
}

DiscreteDistribution DiscreteDistribution::uniform(GridPtr grid) {
  if (!grid) throw std::invalid_argument("distribution needs a grid");
  const std::size_t m = grid->size();
  return DiscreteDistribution(std::move(grid), std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

double DiscreteDistribution::expectation(std::span<const double> values) const {
  if (values.size() != weights_.size())
    throw std::invalid_argument("value vector length does not match distribution");
  double s = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j)
    if (weights_[j] != 0.0) s += weights_[j] * values[j];
  return s;
}

bool DiscreteDistribution::same_grid(const DiscreteDistribution& other) const {
  return grid_->same_as(*other.grid_);
}

void require_same_grid(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  if (!a.same_grid(b)) throw std::invalid_argument("distributions live on different grids");
}

DiscreteDistribution empirical(const SampleSet& samples) {
  if (samples.indices.empty()) throw std::invalid_argument("empirical: sample set is empty");
  if (!samples.grid) throw std::invalid_argument("empirical: sample set has no grid");
  std::vector<double> counts(samples.grid->size(), 0.0);
  for (std::size_t idx : samples.indices) {
    if (idx >= counts.size()) throw std::invalid_argument("empirical: sample index out of range");
    counts[idx] += 1.0;
  }
  const double n = static_cast<double>(samples.indices.size());
  for (double& c : counts) c /= n;
  return DiscreteDistribution(samples.grid, std::move(counts));
}

DiscreteDistribution mixture(double beta, const DiscreteDistribution& a,
                             const DiscreteDistribution& b) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("mixture weight must lie in [0, 1]");
  require_same_grid(a, b);
  if (beta == 0.0) return b;
  if (beta == 1.0) return a;
  std::vector<double> w(a.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = beta * a[j] + (1.0 - beta) * b[j];
  return DiscreteDistribution(a.grid(), std::move(w));
}

std::size_t draw_categorical(std::span<const double> weights, Rng& rng) {
  const double u = rng.uniform();
  double cdf = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    last_positive = j;
    cdf += weights[j];
    if (u < cdf) return j;
  }
  return last_positive;
}

SampleSet sample(const DiscreteDistribution& dist, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  SampleSet s;
  s.grid = dist.grid();
  s.indices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.indices.push_back(draw_categorical(dist.weights(), rng));
  return s;
}

SampleSet sample(const DiscreteDistribution& dist, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SampleSet s = sample(dist, n, rng);
  s.seed = seed;
  return s;
}

}  // namespace dro
