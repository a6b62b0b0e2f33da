#include "dro/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dro::lp {

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& cost(std::size_t c) { return at(rows_, c); }
  double& value() { return at(rows_, cols_); }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

struct Standardized {
  // Equality form A x = b, b >= 0, with slack/surplus/artificial columns.
  std::size_t structural = 0;
  std::size_t total = 0;
  std::vector<std::vector<double>> a;  // rows x total
  std::vector<double> b;
  std::vector<std::size_t> basis;
  std::vector<bool> artificial;
};

Standardized standardize(const Problem& p) {
  Standardized s;
  s.structural = p.num_vars();
  const std::size_t m = p.rows.size();

  std::vector<Sense> senses(m);
  std::size_t extra = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = p.rows[i];
    if (row.coeffs.size() != s.structural)
      throw std::invalid_argument("lp: constraint width does not match objective");
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("lp: non-finite right-hand side");
    Sense sense = row.sense;
    if (row.rhs < 0.0 && sense != Sense::Equal)
      sense = (sense == Sense::LessEqual) ? Sense::GreaterEqual : Sense::LessEqual;
    senses[i] = sense;
    extra += (sense == Sense::GreaterEqual) ? 2 : 1;
  }
  s.total = s.structural + extra;
  s.a.assign(m, std::vector<double>(s.total, 0.0));
  s.b.assign(m, 0.0);
  s.basis.assign(m, 0);
  s.artificial.assign(s.total, false);

  std::size_t next = s.structural;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = p.rows[i];
    const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < s.structural; ++j) s.a[i][j] = sign * row.coeffs[j];
    s.b[i] = sign * row.rhs;
    switch (senses[i]) {
      case Sense::LessEqual:
        s.a[i][next] = 1.0;
        s.basis[i] = next;
        next += 1;
        break;
      case Sense::GreaterEqual:
        s.a[i][next] = -1.0;
        s.a[i][next + 1] = 1.0;
        s.artificial[next + 1] = true;
        s.basis[i] = next + 1;
        next += 2;
        break;
      case Sense::Equal:
        s.a[i][next] = 1.0;
        s.artificial[next] = true;
        s.basis[i] = next;
        next += 1;
        break;
    }
  }
  return s;
}

class Simplex {
 public:
  Simplex(Tableau& t, std::vector<std::size_t>& basis, const Options& o, std::size_t& iterations)
      : t_(t), basis_(basis), o_(o), iterations_(iterations) {}

  /// Returns Optimal, Unbounded or IterationLimit. `allowed` masks entering columns.
  Status run(const std::vector<bool>& allowed) {
    std::size_t degenerate_run = 0;
    for (;;) {
      if (iterations_ >= o_.max_iterations) return Status::IterationLimit;
      const bool bland = degenerate_run > 50;
      std::size_t enter = t_.cols();
      double best = -o_.optimality_tol;
      for (std::size_t c = 0; c < t_.cols(); ++c) {
        if (!allowed[c]) continue;
        const double rc = t_.cost(c);
        if (rc < best) {
          enter = c;
          if (bland) break;
          best = rc;
        }
      }
      if (enter == t_.cols()) return Status::Optimal;

      std::size_t leave = t_.rows();
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < t_.rows(); ++r) {
        const double a = t_.at(r, enter);
        if (a <= o_.pivot_tol) continue;
        const double q = std::max(0.0, t_.rhs(r)) / a;
        if (leave == t_.rows() || q < ratio - 1e-12) {
          leave = r;
          ratio = q;
        } else if (q <= ratio + 1e-12 && basis_[r] < basis_[leave]) {
          leave = r;
          ratio = std::min(ratio, q);
        }
      }
      if (leave == t_.rows()) return Status::Unbounded;
      degenerate_run = (ratio <= 1e-14) ? degenerate_run + 1 : 0;
      t_.pivot(leave, enter);
      basis_[leave] = enter;
      ++iterations_;
    }
  }

 private:
  Tableau& t_;
  std::vector<std::size_t>& basis_;
  const Options& o_;
  std::size_t& iterations_;
};

void load_costs(Tableau& t, const std::vector<double>& c, const std::vector<std::size_t>& basis) {
  for (std::size_t j = 0; j < t.cols(); ++j) t.cost(j) = c[j];
  t.value() = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double cb = c[basis[r]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= t.cols(); ++j) t.at(t.rows(), j) -= cb * t.at(r, j);
  }
}

}  // namespace

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

Result solve(const Problem& problem, const Options& options) {
  for (double c : problem.objective)
    if (!std::isfinite(c)) throw std::invalid_argument("lp: non-finite objective coefficient");

  Standardized s = standardize(problem);
  const std::size_t m = s.a.size();
  const std::size_t n = s.total;
  Result result;

  Tableau t(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = s.a[i][j];
    t.rhs(i) = s.b[i];
  }
  std::vector<std::size_t> basis = s.basis;
  Simplex simplex(t, basis, options, result.iterations);

  // Phase one.
  std::vector<double> phase1(n, 0.0);
  bool any_artificial = false;
  for (std::size_t j = 0; j < n; ++j)
    if (s.artificial[j]) {
      phase1[j] = 1.0;
      any_artificial = true;
    }
  if (any_artificial) {
    load_costs(t, phase1, basis);
    std::vector<bool> allowed(n, true);
    const Status st = simplex.run(allowed);
    if (st == Status::IterationLimit) {
      result.status = st;
      return result;
    }
    result.infeasibility = -t.value();
    if (result.infeasibility > options.feasibility_tol) {
      result.status = Status::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (!s.artificial[basis[r]]) continue;
      std::size_t best = n;
      double mag = options.pivot_tol;
      for (std::size_t j = 0; j < n; ++j) {
        if (s.artificial[j]) continue;
        if (std::abs(t.at(r, j)) > mag) {
          mag = std::abs(t.at(r, j));
          best = j;
        }
      }
      if (best < n) {
        t.pivot(r, best);
        basis[r] = best;
      }
      // Otherwise the row is redundant; its artificial stays basic at zero.
    }
  }

  // Phase two.
  std::vector<double> c(n, 0.0);
  std::copy(problem.objective.begin(), problem.objective.end(), c.begin());
  load_costs(t, c, basis);
  std::vector<bool> allowed(n, true);
  for (std::size_t j = 0; j < n; ++j)
    if (s.artificial[j]) allowed[j] = false;
  const Status st = simplex.run(allowed);
  if (st != Status::Optimal) {
    result.status = st;
    return result;
  }

  // Re-solve B x_B = b from the original rows for an accurate vertex.
  std::vector<double> x(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) x[basis[r]] = std::max(0.0, t.rhs(r));
  if (m > 0) {
    std::vector<std::size_t> live_rows;
    for (std::size_t r = 0; r < m; ++r)
      if (!s.artificial[basis[r]]) live_rows.push_back(r);
    // Rows still held by an artificial are redundant; drop them together with that column.
    const std::size_t k = live_rows.size();
    if (k > 0) {
      Eigen::MatrixXd bmat(m, k);
      Eigen::VectorXd rhs(m);
      for (std::size_t i = 0; i < m; ++i) {
        rhs(static_cast<Eigen::Index>(i)) = s.b[i];
        for (std::size_t q = 0; q < k; ++q)
          bmat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = s.a[i][basis[live_rows[q]]];
      }
      const Eigen::VectorXd xb = bmat.colPivHouseholderQr().solve(rhs);
      bool ok = xb.allFinite();
      for (std::size_t q = 0; q < k && ok; ++q)
        if (xb(static_cast<Eigen::Index>(q)) < -options.feasibility_tol) ok = false;
      if (ok) {
        double refined_res = (bmat * xb - rhs).cwiseAbs().maxCoeff();
        Eigen::VectorXd xt(k);
        for (std::size_t q = 0; q < k; ++q) xt(static_cast<Eigen::Index>(q)) = x[basis[live_rows[q]]];
        double tableau_res = (bmat * xt - rhs).cwiseAbs().maxCoeff();
        if (refined_res <= tableau_res)
          for (std::size_t q = 0; q < k; ++q)
            x[basis[live_rows[q]]] = std::max(0.0, xb(static_cast<Eigen::Index>(q)));
      }
    }
  }

  result.status = Status::Optimal;
  result.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s.structural));
  double obj = 0.0;
  for (std::size_t j = 0; j < s.structural; ++j) obj += problem.objective[j] * result.x[j];
  result.objective = obj;
  return result;
}

}  // namespace dro::lp
