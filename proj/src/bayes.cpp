#include "dro/bayes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dro/lp.hpp"

namespace dro {

namespace {

struct MomentSystem {
  std::vector<std::vector<double>> h;  // constraint decision x atom
  std::vector<double> f;
};

double residual(const MomentSystem& sys, std::span<const double> w) {
  double r = 0.0;
  for (std::size_t k = 0; k < sys.h.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * sys.h[k][j];
    r = std::max(r, std::abs(s - sys.f[k]));
  }
  double total = 0.0;
  for (double v : w) total += v;
  return std::max(r, std::abs(total - 1.0));
}

lp::Problem feasibility_problem(const MomentSystem& sys, std::size_t m) {
  lp::Problem p;
  p.objective.assign(m, 0.0);
  p.add(std::vector<double>(m, 1.0), lp::Sense::Equal, 1.0);
  for (std::size_t k = 0; k < sys.h.size(); ++k) p.add(sys.h[k], lp::Sense::Equal, sys.f[k]);
  return p;
}

std::runtime_error lp_breakdown(const lp::Result& r) {
  std::ostringstream os;
  os << "prior_from_regularizer: LP failed with status " << lp::to_string(r.status) << " after " << r.iterations
     << " iterations";
  return std::runtime_error(os.str());
}

std::vector<double> clamp(std::vector<double> w) {
  double s = 0.0;
  for (double& v : w) {
    if (v < 0.0) v = 0.0;
    s += v;
  }
  for (double& v : w) v /= s;
  return w;
}

double entropy(const std::vector<double>& w) {
  double e = 0.0;
  for (double v : w)
    if (v > 0.0) e -= v * std::log(v);
  return e;
}

// Projected-gradient entropy ascent on {w : A w = A w0} restricted to the
// coordinates that some feasible point can make positive.
std::vector<double> max_entropy(const MomentSystem& sys, std::vector<double> w, const std::vector<bool>& free,
                                int iterations) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (free[j]) idx.push_back(j);
  const std::size_t n = idx.size();
  if (n < 2) return w;
  Eigen::MatrixXd A(sys.h.size() + 1, n);
  for (std::size_t c = 0; c < n; ++c) {
    A(0, c) = 1.0;
    for (std::size_t k = 0; k < sys.h.size(); ++k) A(k + 1, c) = sys.h[k][idx[c]];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * (sv.size() ? sv(0) : 1.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
  if (static_cast<std::size_t>(rank) >= n) return w;
  const Eigen::MatrixXd N = svd.matrixV().rightCols(static_cast<Eigen::Index>(n) - rank);

  Eigen::VectorXd x(n);
  for (std::size_t c = 0; c < n; ++c) x(c) = w[idx[c]];
  auto H = [](const Eigen::VectorXd& v) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v(i) > 0.0) e -= v(i) * std::log(v(i));
    return e;
  };
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd g(n);
    for (std::size_t c = 0; c < n; ++c) g(c) = -(std::log(x(c)) + 1.0);
    const Eigen::VectorXd d = N * (N.transpose() * g);
    const double slope = g.dot(d);
    if (d.norm() < 1e-12 || slope <= 1e-16) break;
    double t = 1.0;
    for (std::size_t c = 0; c < n; ++c)
      if (d(c) < 0.0) t = std::min(t, 0.99 * x(c) / -d(c));
    const double h0 = H(x);
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      const Eigen::VectorXd y = x + t * d;
      if (y.minCoeff() > 0.0 && H(y) >= h0 + 1e-4 * t * slope) {
        x = y;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  for (std::size_t c = 0; c < n; ++c) w[idx[c]] = x(c);
  return w;
}

}  // namespace

PriorSpec PriorSpec::with_alpha(DiscreteDistribution prior, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("concentration alpha must be finite and >= 0");
  return PriorSpec(std::move(prior), Mode::Alpha, alpha, 0.0);
}

PriorSpec PriorSpec::with_beta(DiscreteDistribution prior, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("mixture weight beta must lie in [0, 1]");
  return PriorSpec(std::move(prior), Mode::Beta, 0.0, beta);
}

PriorSpec PriorSpec::limit(DiscreteDistribution prior) {
  return PriorSpec(std::move(prior), Mode::Limit, std::numeric_limits<double>::infinity(), 1.0);
}

double PriorSpec::weight(std::size_t n) const {
  switch (mode_) {
    case Mode::Alpha:
      if (n == 0) throw std::invalid_argument("posterior mean with the alpha rule needs at least one observation");
      return alpha_ / (alpha_ + static_cast<double>(n));
    case Mode::Beta: return beta_;
    case Mode::Limit: return 1.0;
  }
  return 0.0;
}

DiscreteDistribution dp_posterior_mean(const PriorSpec& spec, const SampleSet& data) {
  const double w = spec.weight(data.size());
  if (w == 1.0) return spec.prior();
  if (data.size() == 0) throw std::invalid_argument("posterior mean needs data unless the prior weight is 1");
  return mixture(w, spec.prior(), empirical(data));
}

PriorFit prior_from_regularizer(const Regularizer& f, const CostFunction& cf, const std::vector<Decision>& xs,
                                const GridPtr& grid, const PriorFitOptions& options) {
  if (xs.empty()) throw std::invalid_argument("prior_from_regularizer needs at least one constraint decision");
  const std::size_t m = grid->size();
  MomentSystem sys;
  for (const auto& x : xs) {
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = cf(x, grid->atom(j));
      if (!std::isfinite(row[j])) throw std::domain_error("cost is not finite at a constraint decision");
    }
    sys.h.push_back(std::move(row));
    const double fx = f(x);
    if (!std::isfinite(fx)) throw std::domain_error("regularizer is not finite at a constraint decision");
    sys.f.push_back(fx);
  }

  lp::Problem problem = feasibility_problem(sys, m);
  const lp::Result r = lp::solve(problem);
  PriorFit fit;
  fit.lp_iterations = r.iterations;
  if (r.status == lp::Status::Infeasible) return fit;
  if (r.status != lp::Status::Optimal) throw lp_breakdown(r);

  std::vector<double> w = clamp(r.x);
  if (options.max_entropy) {
    std::vector<double> avg(m, 0.0);
    std::vector<bool> free(m, false);
    std::size_t count = 0;
    for (std::size_t j = 0; j < m; ++j) {
      lp::Problem pj = problem;
      pj.objective[j] = -1.0;
      const lp::Result rj = lp::solve(pj);
      fit.lp_iterations += rj.iterations;
      if (rj.status != lp::Status::Optimal) throw lp_breakdown(rj);
      if (rj.x[j] <= 1e-12) continue;
      const std::vector<double> v = clamp(rj.x);
      for (std::size_t i = 0; i < m; ++i) avg[i] += v[i];
      ++count;
    }
    for (std::size_t j = 0; j < m; ++j) {
      avg[j] /= static_cast<double>(count);
      free[j] = avg[j] > 0.0;
    }
    std::vector<double> refined = max_entropy(sys, avg, free, options.entropy_iterations);
    refined = clamp(std::move(refined));
    if (residual(sys, refined) <= options.tolerance && entropy(refined) >= entropy(w)) w = std::move(refined);
  }

  fit.residual = residual(sys, w);
  if (fit.residual > options.tolerance) {
    std::ostringstream os;
    os << "prior_from_regularizer: LP solution misses the moment equations by " << fit.residual;
    throw std::runtime_error(os.str());
  }
  fit.feasible = true;
  fit.prior = DiscreteDistribution(grid, std::move(w));
  return fit;
}

Regularizer regularizer_from_prior(const DiscreteDistribution& prior, const CostFunction& cf) {
  return Regularizer{"prior:" + cf.name,
                     [prior, cf](const Decision& x) { return expected_cost(prior, cf, x); }};
}

}  // namespace dro
