#include "dro/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace dro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 4096;

std::vector<double> cost_row(const CostFunction& cf, const SupportGrid& grid, const Decision& x) {
  std::vector<double> c(grid.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    c[j] = cf(x, grid.atom(j));
    if (!std::isfinite(c[j])) throw std::domain_error("cost is not finite at atom " + std::to_string(j));
  }
  return c;
}

struct ModelEvaluator {
  const CostTable& table;
  const DecisionSpace& space;
  std::size_t ref_index;
  double ref_value;
  SetVariant variant;

  double operator()(const DiscreteDistribution& p) const {
    std::vector<double> v(table.decisions());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = p.expectation(table.row(k));
    const std::size_t idx = argmin_index(v);
    if (variant == SetVariant::Solution) return norm_distance(space[idx], space[ref_index]);
    return std::abs(v[idx] - ref_value);
  }
};

}  // namespace

std::string to_string(RobustnessKind k) {
  switch (k) {
    case RobustnessKind::Absolute: return "absolute";
    case RobustnessKind::Relative: return "relative";
    case RobustnessKind::Local: return "local";
    case RobustnessKind::SolutionSet: return "solution_set";
    case RobustnessKind::ObjectiveSet: return "objective_set";
    case RobustnessKind::Pac: return "pac";
  }
  return "unknown";
}

DirichletPrior::DirichletPrior(DiscreteDistribution base, double concentration)
    : base_(std::move(base)), alpha_(concentration) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw std::invalid_argument("Dirichlet concentration must be > 0");
}

std::vector<double> DirichletPrior::draw(Rng& rng) const {
  std::vector<double> w(base_.size(), 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (base_[j] == 0.0) continue;
    w[j] = rng.gamma(alpha_ * base_[j]);
    sum += w[j];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(w.begin(), w.end(), 0.0);
    w[draw_categorical(base_.weights(), rng)] = 1.0;
    return w;
  }
  for (double& v : w) v /= sum;
  return w;
}

RobustnessReport absolute_measure(const Decision& x, double ref, const AmbiguityBall& ball, const CostFunction& cf) {
  const std::vector<double> c = cost_row(cf, *ball.center.grid(), x);
  Deviation d = absolute_deviation(ball, c, ref);
  RobustnessReport r;
  r.x = x;
  r.kind = RobustnessKind::Absolute;
  r.measure = d.value;
  r.witness = std::move(d.witness);
  r.radius = ball.radius;
  r.upper = d.value;
  return r;
}

RobustnessReport relative_measure(const Decision& x, double ref, const DivergenceKind& kind,
                                  const DiscreteDistribution& center, const CostFunction& cf) {
  const std::vector<double> c = cost_row(cf, *center.grid(), x);
  RobustnessReport r;
  r.x = x;
  r.kind = RobustnessKind::Relative;
  if (std::abs(center.expectation(c) - ref) > 1e-9 * std::max(1.0, std::abs(ref))) {
    r.measure = kInf;
    r.upper = kInf;
    return r;
  }
  std::optional<double> lip;
  if (cf.has_lip_in_xi()) lip = cf.lip_in_xi(x);
  RatioEstimate est = fractional_sup(center, c, ref, 0.0, kind, Sided::Two, lip);
  r.measure = est.lower;
  r.upper = est.certificate;
  r.radius = est.radius;
  r.witness = std::move(est.witness);
  r.evaluations = est.evaluations;
  return r;
}

RobustnessReport local_measure(const DecisionSpace& space, const DiscreteDistribution& center, double ref,
                               const CostFunction& cf, const DivergenceKind& kind, SetVariant variant) {
  const CostTable table(cf, *center.grid(), space);
  std::vector<double> nominal(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) nominal[k] = center.expectation(table.row(k));
  const std::size_t x0 = argmin_index(nominal);
  const double scale = radius_scale(kind, center);

  RobustnessReport r;
  r.kind = RobustnessKind::Local;
  r.x = space[x0];
  for (int k = 4; k <= 12; ++k) {
    const double eps = scale * std::ldexp(1.0, -k);
    r.radii.push_back(eps);
    if (!(eps > 0.0)) {
      r.sequence.push_back(0.0);
      continue;
    }
    const AmbiguityBall ball(center, eps, kind);
    std::vector<double> v(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      v[i] = variant == SetVariant::Objective ? absolute_deviation(ball, table.row(i), ref).value
                                              : extremal_expectation(ball, table.row(i), Extremum::Max).value;
    }
    const std::size_t best = argmin_index(v);
    r.x = space[best];
    r.sequence.push_back(variant == SetVariant::Objective ? v[best] / eps
                                                          : norm_distance(space[best], space[x0]) / eps);
  }
  const double last = r.sequence.back(), prev = r.sequence[r.sequence.size() - 2];
  r.upper = 2.0 * last - prev;
  r.measure = std::max(0.0, r.upper);
  const double change = std::abs(last - prev);
  r.converged = change <= 1e-12 || change <= 0.1 * std::max(std::abs(last), std::abs(prev));
  r.radius = r.radii.back();
  r.evaluations = r.radii.size() * space.size();
  return r;
}

RobustnessReport set_robustness(const AmbiguityBall& ball, const CostFunction& cf, const DecisionSpace& space,
                                SetVariant variant, std::size_t budget, std::uint64_t seed) {
  if (budget == 0) throw std::invalid_argument("set_robustness needs a sampling budget >= 1");
  const GridPtr& grid = ball.center.grid();
  const CostTable table(cf, *grid, space);
  std::vector<double> nominal(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) nominal[k] = ball.center.expectation(table.row(k));
  const std::size_t x0 = argmin_index(nominal);
  const ModelEvaluator eval{table, space, x0, nominal[x0], variant};

  RobustnessReport r;
  r.kind = variant == SetVariant::Solution ? RobustnessKind::SolutionSet : RobustnessKind::ObjectiveSet;
  r.x = space[x0];
  r.radius = ball.radius;
  r.witness = ball.center;
  r.measure = eval(ball.center);
  r.evaluations = 1;
  auto consider = [&](const DiscreteDistribution& p) {
    const double v = eval(p);
    ++r.evaluations;
    if (v > r.measure) {
      r.measure = v;
      r.witness = p;
    }
  };
  if (ball.radius > 0.0) {
    for (std::size_t k = 0; k < space.size(); ++k) {
      consider(extremal_expectation(ball, table.row(k), Extremum::Max).witness);
      consider(extremal_expectation(ball, table.row(k), Extremum::Min).witness);
    }
    Rng rng(seed);
    const std::size_t m = grid->size();
    for (std::size_t b = 0; b < budget; ++b) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m));
      double t = rng.uniform_open();
      for (int attempt = 0; attempt < 30; ++attempt, t *= 0.5) {
        const DiscreteDistribution q = mixture(1.0 - t, ball.center, DiscreteDistribution::dirac(grid, std::min(j, m - 1)));
        if (membership(ball, q)) {
          consider(q);
          break;
        }
      }
    }
  }
  r.upper = r.measure;
  return r;
}

RobustnessReport set_robustness(const DiscreteDistribution& reference, const std::vector<DiscreteDistribution>& models,
                                const CostFunction& cf, const DecisionSpace& space, SetVariant variant) {
  const CostTable table(cf, *reference.grid(), space);
  std::vector<double> nominal(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) nominal[k] = reference.expectation(table.row(k));
  const std::size_t x0 = argmin_index(nominal);
  const ModelEvaluator eval{table, space, x0, nominal[x0], variant};

  RobustnessReport r;
  r.kind = variant == SetVariant::Solution ? RobustnessKind::SolutionSet : RobustnessKind::ObjectiveSet;
  r.x = space[x0];
  r.measure = 0.0;
  for (const auto& p : models) {
    require_same_grid(reference, p);
    const double v = eval(p);
    ++r.evaluations;
    if (v > r.measure || !r.witness) {
      r.measure = std::max(r.measure, v);
      r.witness = p;
    }
  }
  r.upper = r.measure;
  return r;
}

RobustnessReport pac_robustness(const DirichletPrior& prior, const CostFunction& cf, const Decision& x, double ref,
                                double L, std::size_t draws, std::uint64_t seed, unsigned workers) {
  if (!cf.nonneg) throw std::invalid_argument("PAC robustness requires a cost declared non-negative");
  if (!(L > 0.0)) throw std::invalid_argument("PAC robustness needs L > 0");
  if (!(ref >= 0.0)) throw std::invalid_argument("PAC robustness needs a non-negative reference value");
  if (draws == 0) throw std::invalid_argument("PAC robustness needs at least one Monte-Carlo draw");
  const std::vector<double> c = cost_row(cf, *prior.base().grid(), x);
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] < 0.0)
      throw std::domain_error("PAC robustness requires a non-negative cost, but h(x, xi_" + std::to_string(j) +
                              ") < 0");

  struct Tally {
    std::size_t hits = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  std::vector<Tally> tallies(chunks);
  auto run_chunk = [&](std::size_t chunk) {
    Rng rng(derive_seed(seed, chunk));
    const std::size_t count = std::min(kChunk, draws - chunk * kChunk);
    Tally t;
    for (std::size_t i = 0; i < count; ++i) {
      const std::vector<double> w = prior.draw(rng);
      double v = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) v += w[j] * c[j];
      if (std::abs(v - ref) <= L) ++t.hits;
      t.sum += v;
      t.sum_sq += v * v;
    }
    tallies[chunk] = t;
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  if (n_workers == 1) {
    for (std::size_t k = 0; k < chunks; ++k) run_chunk(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < chunks; k += n_workers) run_chunk(k);
      });
    for (auto& t : pool) t.join();
  }
  Tally total;
  for (const auto& t : tallies) {
    total.hits += t.hits;
    total.sum += t.sum;
    total.sum_sq += t.sum_sq;
  }
  const double n = static_cast<double>(draws);
  const double p = static_cast<double>(total.hits) / n;
  const double mean = total.sum / n;
  const double var = draws > 1 ? std::max(0.0, (total.sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;

  RobustnessReport r;
  r.x = x;
  r.kind = RobustnessKind::Pac;
  r.measure = L;
  r.confidence = p;
  r.confidence_stderr = std::sqrt(p * (1.0 - p) / n);
  r.markov_bound = std::max(0.0, 1.0 - (prior.base().expectation(c) + ref) / L);
  r.mc_mean = mean;
  r.mc_mean_stderr = std::sqrt(var / n);
  r.evaluations = draws;
  return r;
}

}  // namespace dro
