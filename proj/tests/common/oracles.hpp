#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of them call the library's LP engine or extremal routines.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "dro/rng.hpp"
#include "dro/support.hpp"

namespace oracle {

inline std::vector<double> random_weights(dro::Rng& rng, std::size_t m, double zero_prob = 0.0) {
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& v : w) {
    v = rng.uniform() < zero_prob ? 0.0 : rng.uniform() + 1e-3;
    s += v;
  }
  if (s == 0.0) {
    w[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : w) v /= s;
  return w;
}

/// Sorted, distinct scalar atoms in [0, 1].
inline std::vector<dro::Point> random_line(dro::Rng& rng, std::size_t m) {
  std::vector<double> a;
  while (a.size() < m) {
    const double v = std::round(rng.uniform() * 1000.0) / 1000.0;
    if (std::find(a.begin(), a.end(), v) == a.end()) a.push_back(v);
  }
  std::sort(a.begin(), a.end());
  std::vector<dro::Point> pts;
  for (double v : a) pts.push_back({v});
  return pts;
}

/// 1-D W1 through cumulative distribution functions.
inline double w1_line(const std::vector<double>& atoms, const std::vector<double>& a, const std::vector<double>& b) {
  double fa = 0.0, fb = 0.0, d = 0.0;
  for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
    fa += a[k];
    fb += b[k];
    d += (atoms[k + 1] - atoms[k]) * std::abs(fa - fb);
  }
  return d;
}

/// Exact optimal transport cost by enumerating every basic solution of the
/// transportation polytope (2m - 1 cells out of m^2).
inline double transport_bruteforce(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<std::vector<double>>& cost) {
  const std::size_t m = a.size(), cells = m * m, basis = 2 * m - 1;
  Eigen::MatrixXd A(2 * m, cells);
  A.setZero();
  Eigen::VectorXd rhs(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs(i) = a[i];
    rhs(m + i) = b[i];
    for (std::size_t j = 0; j < m; ++j) {
      A(i, i * m + j) = 1.0;
      A(m + j, i * m + j) = 1.0;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(cells, false);
  std::fill(pick.begin(), pick.begin() + basis, true);
  do {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < cells; ++c)
      if (pick[c]) cols.push_back(c);
    Eigen::MatrixXd B(2 * m, basis);
    for (std::size_t k = 0; k < basis; ++k) B.col(k) = A.col(cols[k]);
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(B);
    if (qr.rank() < static_cast<Eigen::Index>(basis)) continue;
    const Eigen::VectorXd x = qr.solve(rhs);
    if ((B * x - rhs).cwiseAbs().maxCoeff() > 1e-10 || x.minCoeff() < -1e-12) continue;
    double c = 0.0;
    for (std::size_t k = 0; k < basis; ++k) c += x(k) * cost[cols[k] / m][cols[k] % m];
    best = std::min(best, c);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

/// Exact max (or min) of E_q c over {q : W1(q, center) <= eps} for scalar
/// sorted atoms, by vertex enumeration in CDF coordinates F_1..F_{m-1}.
/// The feasible set is cut out by the simplex ordering planes and the 2^(m-1)
/// sign patterns of sum_k g_k |F_k - C_k| <= eps.
inline double line_extremal(const std::vector<double>& atoms, const std::vector<double>& center,
                            const std::vector<double>& c, double eps, bool maximize) {
  const std::size_t m = atoms.size(), d = m - 1;
  std::vector<double> C(d), g(d);
  double run = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    run += center[k];
    C[k] = run;
    g[k] = atoms[k + 1] - atoms[k];
  }
  struct Plane {
    Eigen::VectorXd n;
    double b;  // n . F <= b
  };
  std::vector<Plane> planes;
  for (std::size_t k = 0; k <= d; ++k) {  // F_{k-1} <= F_k with F_0 = 0, F_m = 1
    Eigen::VectorXd n = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    double b = 0.0;
    if (k < d) n(static_cast<Eigen::Index>(k)) = -1.0;
    else b = 1.0;
    if (k > 0) n(static_cast<Eigen::Index>(k - 1)) = 1.0;
    planes.push_back({n, b});
  }
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    Eigen::VectorXd n(static_cast<Eigen::Index>(d));
    double b = eps;
    for (std::size_t k = 0; k < d; ++k) {
      const double s = (mask >> k) & 1 ? 1.0 : -1.0;
      n(static_cast<Eigen::Index>(k)) = s * g[k];
      b += s * g[k] * C[k];
    }
    planes.push_back({n, b});
  }
  // E_q c = c_m + sum_k (c_k - c_{k+1}) F_k
  auto value = [&](const Eigen::VectorXd& F) {
    double v = c[m - 1];
    for (std::size_t k = 0; k < d; ++k) v += (c[k] - c[k + 1]) * F(static_cast<Eigen::Index>(k));
    return v;
  };
  double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  const std::size_t P = planes.size();
  std::vector<bool> pick(P, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(d), true);
  do {
    Eigen::MatrixXd N(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(d));
    Eigen::Index r = 0;
    for (std::size_t p = 0; p < P; ++p)
      if (pick[p]) {
        N.row(r) = planes[p].n.transpose();
        rhs(r) = planes[p].b;
        ++r;
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
    if (lu.rank() < static_cast<Eigen::Index>(d)) continue;
    const Eigen::VectorXd F = lu.solve(rhs);
    bool feasible = true;
    for (const auto& pl : planes) feasible = feasible && pl.n.dot(F) <= pl.b + 1e-11;
    if (!feasible) continue;
    const double v = value(F);
    best = maximize ? std::max(best, v) : std::min(best, v);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

/// min over lambda > 0 of lambda eps + lambda log E_p exp(c / lambda), by
/// golden-section search in log lambda.
inline double kl_dual(const std::vector<double>& p, const std::vector<double>& c, double eps) {
  double cmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) cmax = std::max(cmax, c[j]);
  auto f = [&](double loglam) {
    const double lam = std::exp(loglam);
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.0) s += p[j] * std::exp((c[j] - cmax) / lam);
    return lam * eps + cmax + lam * std::log(s);
  };
  double a = std::log(1e-12), b = std::log(1e8);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a), f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 300; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, cmax});
}

inline double kl(const std::vector<double>& q, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] > 0.0) s += q[j] * std::log(q[j] / p[j]);
  return s;
}

/// sup over simplex-grid points P != center (resolution 1/N) of
/// dev(P) / W1(P, center), dev = |E_P c - ref| (two-sided) or E_P c - ref.
inline double fractional_grid(const std::vector<double>& atoms, const std::vector<double>& center,
                              const std::vector<double>& c, double ref, int N, bool two_sided) {
  double best = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) {
      const std::vector<double> q = {i / double(N), j / double(N), (N - i - j) / double(N)};
      const double w = w1_line(atoms, q, center);
      if (w < 1e-12) continue;
      const double e = q[0] * c[0] + q[1] * c[1] + q[2] * c[2] - ref;
      best = std::max(best, (two_sided ? std::abs(e) : e) / w);
    }
  return best;
}

}  // namespace oracle
