#include "dro/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dro/lp.hpp"

namespace dro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMembershipTol = 1e-10;

double ground_cost(const SupportGrid& g, std::size_t i, std::size_t j, double p) {
  const double d = g.distance(i, j);
  return p == 1.0 ? d : std::pow(d, p);
}

void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("Wasserstein order must be finite and >= 1");
}

void check_costs(std::span<const double> costs, std::size_t m) {
  if (costs.size() != m) throw std::invalid_argument("cost vector length does not match grid");
  for (double c : costs)
    if (!std::isfinite(c)) throw std::invalid_argument("extremal_expectation: non-finite cost");
}

std::runtime_error lp_failure(const char* what, const lp::Result& r) {
  std::ostringstream os;
  os << what << ": LP terminated with status " << lp::to_string(r.status) << " after " << r.iterations
     << " iterations (phase-one infeasibility " << r.infeasibility << ")";
  return std::runtime_error(os.str());
}

DiscreteDistribution clean_distribution(const GridPtr& grid, std::vector<double> w) {
  double sum = 0.0;
  for (double& v : w) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return DiscreteDistribution(grid, std::move(w));
}

// Center restricted to the maximal-cost atoms in its support, renormalized.
struct TopMass {
  double cmax = -kInf;
  double mass = 0.0;
};

TopMass top_mass(std::span<const double> p, std::span<const double> c) {
  TopMass t;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) t.cmax = std::max(t.cmax, c[j]);
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0 && c[j] == t.cmax) t.mass += p[j];
  return t;
}

std::vector<double> restrict_to_top(std::span<const double> p, std::span<const double> c, const TopMass& t) {
  std::vector<double> q(p.size(), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0 && c[j] == t.cmax) q[j] = p[j] / t.mass;
  return q;
}

ExtremalResult wasserstein_max(const AmbiguityBall& ball, std::span<const double> c) {
  const auto& grid = *ball.center.grid();
  const std::size_t m = grid.size();
  const double p = ball.kind.order;
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < m; ++j)
    if (ball.center[j] > 0.0) support.push_back(j);
  const std::size_t ms = support.size();

  // Variables pi(i, jj), i over all atoms, jj over center support; i-major.
  lp::Problem prob;
  prob.objective.assign(m * ms, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t jj = 0; jj < ms; ++jj) prob.objective[i * ms + jj] = -c[i];
  for (std::size_t jj = 0; jj < ms; ++jj) {
    std::vector<double> row(m * ms, 0.0);
    for (std::size_t i = 0; i < m; ++i) row[i * ms + jj] = 1.0;
    prob.add(std::move(row), lp::Sense::Equal, ball.center[support[jj]]);
  }
  std::vector<double> budget(m * ms, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t jj = 0; jj < ms; ++jj) budget[i * ms + jj] = ground_cost(grid, i, support[jj], p);
  prob.add(std::move(budget), lp::Sense::LessEqual, std::pow(ball.radius, p));

  const lp::Result r = lp::solve(prob);
  if (r.status != lp::Status::Optimal) throw lp_failure("worst-case Wasserstein expectation", r);

  std::vector<double> q(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t jj = 0; jj < ms; ++jj) q[i] += r.x[i * ms + jj];
  DiscreteDistribution witness = clean_distribution(ball.center.grid(), std::move(q));
  const double value = witness.expectation(c);
  return {value, std::move(witness)};
}

double kl_of_tilt(std::span<const double> p, std::span<const double> c, double cmax, double lambda,
                  std::vector<double>* q_out) {
  double z = 0.0, ez = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    const double e = p[j] * std::exp((c[j] - cmax) / lambda);
    z += e;
    ez += e * (c[j] - cmax);
  }
  if (q_out) {
    q_out->assign(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.0) (*q_out)[j] = p[j] * std::exp((c[j] - cmax) / lambda) / z;
  }
  return std::max(0.0, ez / z / lambda - std::log(z));
}

double kl_dual(std::span<const double> p, std::span<const double> c, double cmax, double lambda, double eps) {
  double z = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) z += p[j] * std::exp((c[j] - cmax) / lambda);
  return lambda * eps + cmax + lambda * std::log(z);
}

ExtremalResult kl_max(const AmbiguityBall& ball, std::span<const double> c) {
  const auto p = ball.center.weights();
  const double eps = ball.radius;
  const TopMass top = top_mass(p, c);
  double cmin = kInf;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) cmin = std::min(cmin, c[j]);

  if (cmin == top.cmax) return {ball.center.expectation(c), ball.center};
  if (-std::log(top.mass) <= eps) {
    DiscreteDistribution w(ball.center.grid(), restrict_to_top(p, c, top));
    return {top.cmax, std::move(w)};
  }

  // KL(q_lambda || p) decreases from -log(top mass) to 0 as lambda grows; the
  // dual derivative is eps - KL(q_lambda || p).
  const double span = top.cmax - cmin;
  double lo = span, hi = span;
  while (kl_of_tilt(p, c, top.cmax, lo, nullptr) <= eps && lo > 1e-300) lo *= 0.5;
  while (kl_of_tilt(p, c, top.cmax, hi, nullptr) > eps) hi *= 2.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    if (kl_of_tilt(p, c, top.cmax, mid, nullptr) > eps)
      lo = mid;
    else
      hi = mid;
  }
  std::vector<double> q;
  kl_of_tilt(p, c, top.cmax, hi, &q);
  DiscreteDistribution witness = clean_distribution(ball.center.grid(), std::move(q));
  return {kl_dual(p, c, top.cmax, hi, eps), std::move(witness)};
}

double chi2_of_threshold(std::span<const double> p, std::span<const double> c, double theta,
                         std::vector<double>* q_out) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    const double v = std::max(0.0, c[j] - theta);
    s += p[j] * v;
    s2 += p[j] * v * v;
  }
  if (q_out) {
    q_out->assign(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.0) (*q_out)[j] = p[j] * std::max(0.0, c[j] - theta) / s;
  }
  return std::max(0.0, s2 / (s * s) - 1.0);
}

ExtremalResult chi2_max(const AmbiguityBall& ball, std::span<const double> c) {
  const auto p = ball.center.weights();
  const double eps = ball.radius;
  const TopMass top = top_mass(p, c);
  double cmin = kInf;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) cmin = std::min(cmin, c[j]);

  if (cmin == top.cmax) return {ball.center.expectation(c), ball.center};
  if (1.0 / top.mass - 1.0 <= eps) {
    DiscreteDistribution w(ball.center.grid(), restrict_to_top(p, c, top));
    return {top.cmax, std::move(w)};
  }
  // q_theta proportional to p (c - theta)_+; chi2 grows with theta.
  const double span = top.cmax - cmin;
  double lo = cmin - span, hi = top.cmax;
  while (chi2_of_threshold(p, c, lo, nullptr) > eps) lo -= 2.0 * (hi - lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (chi2_of_threshold(p, c, mid, nullptr) > eps)
      hi = mid;
    else
      lo = mid;
  }
  std::vector<double> q;
  chi2_of_threshold(p, c, lo, &q);
  DiscreteDistribution witness = clean_distribution(ball.center.grid(), std::move(q));
  const double value = witness.expectation(c);
  return {value, std::move(witness)};
}

ExtremalResult tv_max(const AmbiguityBall& ball, std::span<const double> c) {
  const std::size_t m = c.size();
  std::vector<double> q(ball.center.weights().begin(), ball.center.weights().end());
  std::size_t top = 0;
  for (std::size_t j = 1; j < m; ++j)
    if (c[j] > c[top]) top = j;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
  double budget = ball.radius;
  for (std::size_t j : order) {
    if (budget <= 0.0 || c[j] >= c[top]) break;
    const double moved = std::min(budget, q[j]);
    q[j] -= moved;
    q[top] += moved;
    budget -= moved;
  }
  DiscreteDistribution witness = clean_distribution(ball.center.grid(), std::move(q));
  const double value = witness.expectation(c);
  return {value, std::move(witness)};
}

}  // namespace

DivergenceKind DivergenceKind::wasserstein(double p) {
  check_order(p);
  DivergenceKind k;
  k.family = Family::Wasserstein;
  k.order = p;
  return k;
}

DivergenceKind DivergenceKind::phi(PhiGenerator g, Orientation o) {
  DivergenceKind k;
  k.family = Family::Phi;
  k.generator = g;
  k.orientation = o;
  return k;
}

std::string DivergenceKind::name() const {
  if (is_wasserstein()) {
    std::ostringstream os;
    os << "wasserstein-" << order;
    return os.str();
  }
  return to_string(generator) + (orientation == Orientation::Reverse ? "-reverse" : "");
}

double phi_value(PhiGenerator g, double t) {
  switch (g) {
    case PhiGenerator::KL: return t == 0.0 ? 1.0 : t * std::log(t) - t + 1.0;
    case PhiGenerator::Chi2: return (t - 1.0) * (t - 1.0);
    case PhiGenerator::TV: return 0.5 * std::abs(t - 1.0);
  }
  return kInf;
}

double phi_recession(PhiGenerator g) {
  return g == PhiGenerator::TV ? 0.5 : kInf;
}

std::string to_string(PhiGenerator g) {
  switch (g) {
    case PhiGenerator::KL: return "kl";
    case PhiGenerator::Chi2: return "chi2";
    case PhiGenerator::TV: return "tv";
  }
  return "unknown";
}

PhiGenerator parse_generator(const std::string& name) {
  if (name == "kl") return PhiGenerator::KL;
  if (name == "chi2") return PhiGenerator::Chi2;
  if (name == "tv") return PhiGenerator::TV;
  throw std::invalid_argument("unknown phi generator '" + name + "' (expected kl, chi2 or tv)");
}

TransportResult optimal_transport(const DiscreteDistribution& a, const DiscreteDistribution& b, double p) {
  check_order(p);
  require_same_grid(a, b);
  const auto& grid = *a.grid();
  const std::size_t m = grid.size();
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i] > 0.0) rows.push_back(i);
    if (b[i] > 0.0) cols.push_back(i);
  }
  const std::size_t r = rows.size(), s = cols.size();

  TransportResult out;
  out.plan.m = m;
  out.plan.coupling.assign(m * m, 0.0);

  if (r == 1 || s == 1) {
    // Only one feasible coupling.
    for (std::size_t i : rows)
      for (std::size_t j : cols) out.plan.coupling[i * m + j] = (r == 1) ? b[j] : a[i];
  } else {
    lp::Problem prob;
    prob.objective.assign(r * s, 0.0);
    for (std::size_t ii = 0; ii < r; ++ii)
      for (std::size_t jj = 0; jj < s; ++jj) prob.objective[ii * s + jj] = ground_cost(grid, rows[ii], cols[jj], p);
    for (std::size_t ii = 0; ii < r; ++ii) {
      std::vector<double> row(r * s, 0.0);
      for (std::size_t jj = 0; jj < s; ++jj) row[ii * s + jj] = 1.0;
      prob.add(std::move(row), lp::Sense::Equal, a[rows[ii]]);
    }
    // The last column constraint is implied by the others.
    for (std::size_t jj = 0; jj + 1 < s; ++jj) {
      std::vector<double> row(r * s, 0.0);
      for (std::size_t ii = 0; ii < r; ++ii) row[ii * s + jj] = 1.0;
      prob.add(std::move(row), lp::Sense::Equal, b[cols[jj]]);
    }
    const lp::Result res = lp::solve(prob);
    if (res.status != lp::Status::Optimal) throw lp_failure("optimal transport", res);
    for (std::size_t ii = 0; ii < r; ++ii)
      for (std::size_t jj = 0; jj < s; ++jj) out.plan.coupling[rows[ii] * m + cols[jj]] = res.x[ii * s + jj];
  }

  double cost = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (out.plan.coupling[i * m + j] != 0.0) cost += out.plan.coupling[i * m + j] * ground_cost(grid, i, j, p);
  out.plan.cost = std::max(0.0, cost);
  out.distance = p == 1.0 ? out.plan.cost : std::pow(out.plan.cost, 1.0 / p);
  return out;
}

double wasserstein(const DiscreteDistribution& a, const DiscreteDistribution& b, double p) {
  return optimal_transport(a, b, p).distance;
}

double phi_divergence(const DiscreteDistribution& a, const DiscreteDistribution& b, PhiGenerator g) {
  require_same_grid(a, b);
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double aj = a[j], bj = b[j];
    if (bj == 0.0) {
      if (aj == 0.0) continue;
      const double r = phi_recession(g);
      if (std::isinf(r)) return kInf;
      total += aj * r;
      continue;
    }
    if (g == PhiGenerator::KL) {
      if (aj > 0.0) total += aj * std::log(aj / bj);
    } else {
      total += bj * phi_value(g, aj / bj);
    }
  }
  return std::max(0.0, total);
}

double divergence(const DivergenceKind& kind, const DiscreteDistribution& q, const DiscreteDistribution& center) {
  if (kind.is_wasserstein()) return wasserstein(q, center, kind.order);
  return kind.orientation == Orientation::Forward ? phi_divergence(q, center, kind.generator)
                                                  : phi_divergence(center, q, kind.generator);
}

AmbiguityBall::AmbiguityBall(DiscreteDistribution c, double r, DivergenceKind k)
    : center(std::move(c)), radius(r), kind(k) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball radius must be finite and >= 0");
  if (kind.is_wasserstein()) check_order(kind.order);
}

ExtremalResult extremal_expectation(const AmbiguityBall& ball, std::span<const double> costs, Extremum sense) {
  check_costs(costs, ball.center.size());
  if (!ball.kind.is_wasserstein() && ball.kind.orientation == Orientation::Reverse)
    throw std::invalid_argument("extremal_expectation: reverse-oriented phi balls are not supported");
  if (ball.radius == 0.0) return {ball.center.expectation(costs), ball.center};

  std::vector<double> c(costs.begin(), costs.end());
  if (sense == Extremum::Min)
    for (double& v : c) v = -v;

  ExtremalResult r = [&] {
    if (ball.kind.is_wasserstein()) return wasserstein_max(ball, c);
    switch (ball.kind.generator) {
      case PhiGenerator::KL: return kl_max(ball, c);
      case PhiGenerator::Chi2: return chi2_max(ball, c);
      case PhiGenerator::TV: return tv_max(ball, c);
    }
    throw std::logic_error("unhandled divergence kind");
  }();
  if (sense == Extremum::Min) r.value = -r.value;
  return r;
}

bool membership(const AmbiguityBall& ball, const DiscreteDistribution& q) {
  require_same_grid(ball.center, q);
  return divergence(ball.kind, q, ball.center) <= ball.radius + kMembershipTol;
}

}  // namespace dro
