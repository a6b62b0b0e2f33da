#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dro/support.hpp"

namespace dro {

using Decision = Point;

/// Finite set of candidate decisions x in R^l.
class DecisionSpace {
 public:
  explicit DecisionSpace(std::vector<Decision> points);
  /// `count` evenly spaced points on [lo, hi], endpoints included.
  static DecisionSpace interval(double lo, double hi, std::size_t count);

  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return points_.front().size(); }
  const Decision& operator[](std::size_t k) const { return points_[k]; }
  const std::vector<Decision>& points() const { return points_; }

 private:
  std::vector<Decision> points_;
};

double norm_distance(const Decision& a, const Decision& b);

/// h(x, xi) with optional Lipschitz data.
struct CostFunction {
  std::string name;
  std::function<double(const Decision&, const Point&)> eval;
  /// L(x): Lipschitz constant of h(x, .) w.r.t. the grid metric.
  std::function<double(const Decision&)> lip_in_xi;
  /// L(xi): Lipschitz constant of h(., xi) w.r.t. the Euclidean norm on decisions.
  std::function<double(const Point&)> lip_in_x;
  bool nonneg = false;

  double operator()(const Decision& x, const Point& xi) const { return eval(x, xi); }
  bool has_lip_in_xi() const { return static_cast<bool>(lip_in_xi); }
  bool has_lip_in_x() const { return static_cast<bool>(lip_in_x); }
};

struct Regularizer {
  std::string name;
  std::function<double(const Decision&)> eval;

  double operator()(const Decision& x) const { return eval(x); }
};

/// h(x_k, xi_j) tabulated over decisions x atoms, row-major.
class CostTable {
 public:
  /// Throws std::domain_error naming (x, j) on a non-finite value.
  CostTable(const CostFunction& cf, const SupportGrid& grid, const DecisionSpace& space);

  std::size_t decisions() const { return rows_; }
  std::size_t atoms() const { return cols_; }
  std::span<const double> row(std::size_t k) const { return {values_.data() + k * cols_, cols_}; }
  double at(std::size_t k, std::size_t j) const { return values_[k * cols_ + j]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> values_;
};

/// sum_j w_j h(x, xi_j). Throws std::domain_error naming (x, j) on non-finite h.
double expected_cost(const DiscreteDistribution& dist, const CostFunction& cf, const Decision& x);

using CostParams = std::map<std::string, double>;

/// Built-in costs: absolute, squared, newsvendor(b, c), huber(delta), linreg,
/// constant(value). Grid-restricted Lipschitz constants use `grid`/`space`.
/// Throws std::invalid_argument for unknown names or parameters.
CostFunction make_builtin_cost(const std::string& name, const CostParams& params, const SupportGrid& grid,
                               const DecisionSpace& space);
std::vector<std::string> builtin_cost_names();

/// h given explicitly as a decisions x atoms matrix. Lipschitz data are the
/// exact grid-restricted difference quotients.
CostFunction table_cost(const DecisionSpace& space, const SupportGrid& grid,
                        std::vector<std::vector<double>> values);

/// Largest ratio observed/declared over all finite-difference pairs; a value
/// above 1 + 1e-9 means the declared constants are invalid on the grids.
struct LipschitzCheck {
  double worst_ratio_xi = 0.0;
  double worst_ratio_x = 0.0;
  bool nonneg_ok = true;

  bool ok() const { return worst_ratio_xi <= 1.0 + 1e-9 && worst_ratio_x <= 1.0 + 1e-9 && nonneg_ok; }
};
LipschitzCheck check_cost(const CostFunction& cf, const SupportGrid& grid, const DecisionSpace& space);

/// Multiplies every declared Lipschitz constant by `factor`.
CostFunction scale_lipschitz(CostFunction cf, double factor);

}  // namespace dro
