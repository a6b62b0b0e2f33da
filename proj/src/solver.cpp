#include "dro/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kRadii = 40;
constexpr int kGoldenSteps = 40;

std::vector<double> center_costs(const DiscreteDistribution& center, const CostTable& table) {
  std::vector<double> v(table.decisions());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = center.expectation(table.row(k));
  return v;
}

Solution finish(Method method, const DecisionSpace& space, std::vector<double> values) {
  Solution s;
  s.method = method;
  s.index = argmin_index(values, &s.diagnostics.ties);
  s.x_star = space[s.index];
  s.objective_value = values[s.index];
  s.diagnostics.evaluations = values.size();
  s.diagnostics.values = std::move(values);
  return s;
}

bool constant_on_support(const DiscreteDistribution& center, std::span<const double> c) {
  double lo = kInf, hi = -kInf;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (center[j] > 0.0) {
      lo = std::min(lo, c[j]);
      hi = std::max(hi, c[j]);
    }
  return hi - lo <= 1e-12 * std::max(1.0, std::abs(hi));
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::SAA: return "saa";
    case Method::RegularizedSAA: return "reg_saa";
    case Method::BayesDP: return "bayes_dp";
    case Method::MinmaxDRO: return "minmax_dro";
    case Method::AbsoluteDRO: return "abs_dro";
    case Method::Satisficing: return "satisficing";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::SAA, Method::RegularizedSAA, Method::BayesDP, Method::MinmaxDRO, Method::AbsoluteDRO,
                   Method::Satisficing})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::size_t argmin_index(std::span<const double> values, std::size_t* ties) {
  if (values.empty()) throw std::invalid_argument("argmin over an empty set");
  double best = kInf;
  for (double v : values) best = std::min(best, v);
  std::size_t index = 0, count = 0;
  bool found = false;
  const double tol = std::isfinite(best) ? 1e-12 * std::max(1.0, std::abs(best)) : 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const bool tied = std::isfinite(best) ? values[k] <= best + tol : true;
    if (!tied) continue;
    if (!found) index = k;
    found = true;
    ++count;
  }
  if (ties) *ties = count - 1;
  return index;
}

double radius_scale(const DivergenceKind& kind, const DiscreteDistribution& center) {
  if (kind.is_wasserstein()) return center.grid()->diameter();
  double pmin = 1.0;
  for (std::size_t j = 0; j < center.size(); ++j)
    if (center[j] > 0.0) pmin = std::min(pmin, center[j]);
  switch (kind.generator) {
    case PhiGenerator::KL: return -std::log(pmin);
    case PhiGenerator::Chi2: return 1.0 / pmin - 1.0;
    case PhiGenerator::TV: return 1.0;
  }
  return 1.0;
}

Deviation absolute_deviation(const AmbiguityBall& ball, std::span<const double> costs, double ref) {
  ExtremalResult hi = extremal_expectation(ball, costs, Extremum::Max);
  ExtremalResult lo = extremal_expectation(ball, costs, Extremum::Min);
  const double up = hi.value - ref, down = ref - lo.value;
  const bool upper_binds = up >= down;
  return Deviation{std::max(up, down), hi.value, lo.value, upper_binds ? std::move(hi.witness) : std::move(lo.witness)};
}

RatioEstimate fractional_sup(const DiscreteDistribution& center, std::span<const double> costs, double ref,
                             double slack, const DivergenceKind& kind, Sided sided,
                             std::optional<double> lipschitz_xi) {
  const double base = center.expectation(costs);
  const double base_dev = (sided == Sided::One ? base - ref : std::abs(base - ref)) - slack;
  RatioEstimate out{0.0, kInf, 0.0, center, 0};
  if (base_dev > 1e-9 * std::max(1.0, std::abs(ref))) {
    out.lower = kInf;
    return out;
  }

  if (!kind.is_wasserstein() && kind.generator != PhiGenerator::TV) {
    if (constant_on_support(center, costs)) {
      out.certificate = 0.0;
      return out;
    }
    if (base_dev >= -1e-9 * std::max(1.0, std::abs(ref))) {
      out.lower = kInf;
      return out;
    }
  }
  if (kind.is_wasserstein() && lipschitz_xi) out.certificate = *lipschitz_xi;
  if (kind.generator == PhiGenerator::TV && !kind.is_wasserstein()) {
    const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
    out.certificate = *hi - *lo;
  }

  const double scale = radius_scale(kind, center);
  if (!(scale > 0.0)) {
    out.certificate = std::max(out.certificate == kInf ? 0.0 : out.certificate, 0.0);
    return out;
  }

  double best = -kInf, best_radius = 0.0;
  std::optional<DiscreteDistribution> best_witness;
  auto ratio = [&](double eps) {
    const AmbiguityBall ball(center, eps, kind);
    double dev;
    DiscreteDistribution w = center;
    if (sided == Sided::One) {
      ExtremalResult r = extremal_expectation(ball, costs, Extremum::Max);
      dev = r.value - ref - slack;
      w = std::move(r.witness);
    } else {
      Deviation d = absolute_deviation(ball, costs, ref);
      dev = d.value - slack;
      w = std::move(d.witness);
    }
    ++out.evaluations;
    const double g = dev / eps;
    if (g > best) {
      best = g;
      best_radius = eps;
      best_witness = std::move(w);
    }
    return g;
  };

  std::vector<double> radii(kRadii), g(kRadii);
  for (std::size_t k = 0; k < kRadii; ++k) {
    radii[k] = scale * std::pow(10.0, -4.0 + 4.0 * static_cast<double>(k) / static_cast<double>(kRadii - 1));
    g[k] = ratio(radii[k]);
  }
  const std::size_t kb = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
  double a = std::log(radii[kb == 0 ? 0 : kb - 1]);
  double b = std::log(radii[std::min(kb + 1, kRadii - 1)]);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = ratio(std::exp(c)), gd = ratio(std::exp(d));
  for (int it = 0; it < kGoldenSteps; ++it) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - phi * (b - a);
      gc = ratio(std::exp(c));
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + phi * (b - a);
      gd = ratio(std::exp(d));
    }
  }

  out.lower = std::max(best, 0.0);
  out.radius = best_radius;
  if (best_witness) out.witness = std::move(*best_witness);
  if (out.certificate < out.lower) out.certificate = out.lower;
  return out;
}

Solution solve_saa(const DiscreteDistribution& data, const CostFunction& cf, const DecisionSpace& space) {
  std::vector<double> values(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) values[k] = expected_cost(data, cf, space[k]);
  return finish(Method::SAA, space, std::move(values));
}

Solution solve_regularized_saa(const DiscreteDistribution& data, const CostFunction& cf, const Regularizer& f,
                               double lambda, const DecisionSpace& space) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("regularization weight must be >= 0");
  std::vector<double> values(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    const double fx = f(space[k]);
    if (!std::isfinite(fx)) throw std::domain_error("regularizer is not finite at decision " + std::to_string(k));
    values[k] = expected_cost(data, cf, space[k]) + (lambda == 0.0 ? 0.0 : lambda * fx);
  }
  return finish(Method::RegularizedSAA, space, std::move(values));
}

Solution solve_bayes_dp(const PriorSpec& spec, const SampleSet& data, const CostFunction& cf,
                        const DecisionSpace& space) {
  Solution s = solve_saa(dp_posterior_mean(spec, data), cf, space);
  s.method = Method::BayesDP;
  return s;
}

Solution solve_minmax_dro(const AmbiguityBall& ball, const CostFunction& cf, const DecisionSpace& space) {
  if (!(ball.radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
  const CostTable table(cf, *ball.center.grid(), space);
  std::vector<double> values(space.size());
  std::vector<DiscreteDistribution> witnesses;
  witnesses.reserve(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    ExtremalResult r = extremal_expectation(ball, table.row(k), Extremum::Max);
    values[k] = r.value;
    witnesses.push_back(std::move(r.witness));
  }
  const std::vector<double> nominal = center_costs(ball.center, table);
  const double ref = nominal[argmin_index(nominal)];
  Solution s = finish(Method::MinmaxDRO, space, std::move(values));
  s.witness = witnesses[s.index];
  s.measure = s.objective_value - ref;
  s.diagnostics.reference = ref;
  return s;
}

Solution solve_absolute_dro(const AmbiguityBall& ball, const CostFunction& cf, const DecisionSpace& space) {
  if (!(ball.radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
  const CostTable table(cf, *ball.center.grid(), space);
  const std::vector<double> nominal = center_costs(ball.center, table);
  const double ref = nominal[argmin_index(nominal)];
  std::vector<double> values(space.size());
  std::vector<DiscreteDistribution> witnesses;
  witnesses.reserve(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    Deviation d = absolute_deviation(ball, table.row(k), ref);
    values[k] = d.value;
    witnesses.push_back(std::move(d.witness));
  }
  Solution s = finish(Method::AbsoluteDRO, space, std::move(values));
  s.diagnostics.evaluations *= 2;
  s.witness = witnesses[s.index];
  s.measure = s.objective_value;
  s.diagnostics.reference = ref;
  return s;
}

Solution solve_robust_satisficing(const DiscreteDistribution& center, const CostFunction& cf,
                                  const DecisionSpace& space, const DivergenceKind& kind, Sided sided,
                                  double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("target slack must be >= 0");
  const CostTable table(cf, *center.grid(), space);
  const std::vector<double> nominal = center_costs(center, table);
  const double ref = nominal[argmin_index(nominal)];
  const double target = ref + delta;
  const double tol = 1e-12 * std::max(1.0, std::abs(target));

  std::vector<double> values(space.size(), kInf);
  std::vector<std::optional<RatioEstimate>> estimates(space.size());
  std::size_t first_feasible = space.size(), evaluations = 0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    if (nominal[k] > target + tol) continue;
    if (first_feasible == space.size()) first_feasible = k;
    std::optional<double> lip;
    if (cf.has_lip_in_xi()) lip = cf.lip_in_xi(space[k]);
    estimates[k] = fractional_sup(center, table.row(k), ref, delta, kind, sided, lip);
    values[k] = estimates[k]->lower;
    evaluations += estimates[k]->evaluations;
  }
  if (first_feasible == space.size()) throw std::logic_error("robust satisficing: empty feasible set");

  Solution s;
  s.method = Method::Satisficing;
  std::size_t ties = 0;
  s.index = argmin_index(values, &ties);
  if (!std::isfinite(values[s.index])) {
    s.index = first_feasible;
    ties = 0;
    for (std::size_t k = 0; k < values.size(); ++k) ties += estimates[k] ? 1 : 0;
    --ties;
  }
  const RatioEstimate& est = *estimates[s.index];
  s.x_star = space[s.index];
  s.objective_value = nominal[s.index];
  s.measure = est.lower;
  s.witness = est.witness;
  s.diagnostics.evaluations = evaluations;
  s.diagnostics.ties = ties;
  s.diagnostics.values = std::move(values);
  s.diagnostics.reference = ref;
  s.diagnostics.measure_lower = est.lower;
  s.diagnostics.measure_upper = est.certificate;
  s.diagnostics.witness_radius = est.radius;
  return s;
}

}  // namespace dro
