#include "dro/cost.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace dro {

namespace {

std::string describe(const Decision& x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

[[noreturn]] void non_finite(const Decision& x, std::size_t j) {
  throw std::domain_error("cost is not finite at x = " + describe(x) + ", atom " + std::to_string(j));
}

double param(const CostParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const CostParams& params, std::initializer_list<const char*> known, const std::string& cost) {
  for (const auto& [key, value] : params) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw std::invalid_argument("cost '" + cost + "' has no parameter '" + key + "'");
  }
}

void require_scalar(const SupportGrid& grid, const DecisionSpace& space, const std::string& cost) {
  if (grid.dimension() != 1 || space.dimension() != 1)
    throw std::invalid_argument("cost '" + cost + "' needs scalar atoms and scalar decisions");
}

double max_abs_diff_to_atoms(double x, const SupportGrid& grid) {
  double m = 0.0;
  for (const auto& a : grid.atoms()) m = std::max(m, std::abs(x - a[0]));
  return m;
}

double max_abs_diff_to_decisions(double xi, const DecisionSpace& space) {
  double m = 0.0;
  for (const auto& x : space.points()) m = std::max(m, std::abs(x[0] - xi));
  return m;
}

}  // namespace

DecisionSpace::DecisionSpace(std::vector<Decision> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("decision space is empty");
  const std::size_t dim = points_.front().size();
  for (const auto& p : points_) {
    if (p.size() != dim || dim == 0) throw std::invalid_argument("decisions must share a nonzero dimension");
    for (double v : p)
      if (!std::isfinite(v)) throw std::invalid_argument("decisions must be finite");
  }
}

DecisionSpace DecisionSpace::interval(double lo, double hi, std::size_t count) {
  if (count == 0 || !(lo <= hi)) throw std::invalid_argument("interval decision space needs lo <= hi and count >= 1");
  std::vector<Decision> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    pts.push_back({k + 1 == count ? hi : lo + t * (hi - lo)});
  }
  return DecisionSpace(std::move(pts));
}

double norm_distance(const Decision& a, const Decision& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

CostTable::CostTable(const CostFunction& cf, const SupportGrid& grid, const DecisionSpace& space)
    : rows_(space.size()), cols_(grid.size()), values_(rows_ * cols_) {
  for (std::size_t k = 0; k < rows_; ++k)
    for (std::size_t j = 0; j < cols_; ++j) {
      const double v = cf(space[k], grid.atom(j));
      if (!std::isfinite(v)) non_finite(space[k], j);
      values_[k * cols_ + j] = v;
    }
}

double expected_cost(const DiscreteDistribution& dist, const CostFunction& cf, const Decision& x) {
  const auto& grid = *dist.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double v = cf(x, grid.atom(j));
    if (!std::isfinite(v)) non_finite(x, j);
    if (dist[j] != 0.0) s += dist[j] * v;
  }
  return s;
}

std::vector<std::string> builtin_cost_names() {
  return {"absolute", "squared", "newsvendor", "huber", "linreg", "constant"};
}

CostFunction make_builtin_cost(const std::string& name, const CostParams& params, const SupportGrid& grid,
                               const DecisionSpace& space) {
  CostFunction cf;
  cf.name = name;
  if (name == "absolute") {
    reject_unknown(params, {}, name);
    require_scalar(grid, space, name);
    cf.eval = [](const Decision& x, const Point& xi) { return std::abs(x[0] - xi[0]); };
    cf.lip_in_xi = [](const Decision&) { return 1.0; };
    cf.lip_in_x = [](const Point&) { return 1.0; };
    cf.nonneg = true;
  } else if (name == "squared") {
    reject_unknown(params, {}, name);
    require_scalar(grid, space, name);
    cf.eval = [](const Decision& x, const Point& xi) { return (x[0] - xi[0]) * (x[0] - xi[0]); };
    auto g = std::make_shared<const SupportGrid>(grid);
    auto s = std::make_shared<const DecisionSpace>(space);
    cf.lip_in_xi = [g](const Decision& x) { return 2.0 * max_abs_diff_to_atoms(x[0], *g); };
    cf.lip_in_x = [s](const Point& xi) { return 2.0 * max_abs_diff_to_decisions(xi[0], *s); };
    cf.nonneg = true;
  } else if (name == "newsvendor") {
    reject_unknown(params, {"b", "c"}, name);
    require_scalar(grid, space, name);
    const double b = param(params, "b", 1.0), c = param(params, "c", 1.0);
    if (!(b >= 0.0 && c >= 0.0)) throw std::invalid_argument("newsvendor costs b, c must be >= 0");
    cf.eval = [b, c](const Decision& x, const Point& xi) {
      return b * std::max(xi[0] - x[0], 0.0) + c * std::max(x[0] - xi[0], 0.0);
    };
    const double lip = std::max(b, c);
    cf.lip_in_xi = [lip](const Decision&) { return lip; };
    cf.lip_in_x = [lip](const Point&) { return lip; };
    cf.nonneg = true;
  } else if (name == "huber") {
    reject_unknown(params, {"delta"}, name);
    require_scalar(grid, space, name);
    const double delta = param(params, "delta", 1.0);
    if (!(delta > 0.0)) throw std::invalid_argument("huber delta must be > 0");
    cf.eval = [delta](const Decision& x, const Point& xi) {
      const double r = std::abs(x[0] - xi[0]);
      return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
    };
    cf.lip_in_xi = [delta](const Decision&) { return delta; };
    cf.lip_in_x = [delta](const Point&) { return delta; };
    cf.nonneg = true;
  } else if (name == "linreg") {
    reject_unknown(params, {}, name);
    if (grid.dimension() != 2 || space.dimension() != 2)
      throw std::invalid_argument("cost 'linreg' needs atoms (feature, response) and decisions (slope, intercept)");
    cf.eval = [](const Decision& x, const Point& xi) { return std::abs(xi[1] - x[0] * xi[0] - x[1]); };
    cf.lip_in_xi = [](const Decision& x) { return std::sqrt(x[0] * x[0] + 1.0); };
    cf.lip_in_x = [](const Point& xi) { return std::sqrt(xi[0] * xi[0] + 1.0); };
    cf.nonneg = true;
  } else if (name == "constant") {
    reject_unknown(params, {"value"}, name);
    const double value = param(params, "value", 0.0);
    cf.eval = [value](const Decision&, const Point&) { return value; };
    cf.lip_in_xi = [](const Decision&) { return 0.0; };
    cf.lip_in_x = [](const Point&) { return 0.0; };
    cf.nonneg = value >= 0.0;
  } else {
    throw std::invalid_argument("unknown cost '" + name + "'");
  }
  return cf;
}

CostFunction table_cost(const DecisionSpace& space, const SupportGrid& grid, std::vector<std::vector<double>> values) {
  if (values.size() != space.size()) throw std::invalid_argument("table cost needs one row per decision");
  for (const auto& row : values) {
    if (row.size() != grid.size()) throw std::invalid_argument("table cost needs one column per atom");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("table cost entries must be finite");
  }
  struct Data {
    std::vector<Decision> decisions;
    std::vector<Point> atoms;
    std::vector<std::vector<double>> h;
    std::vector<double> lip_xi;  // per decision
    std::vector<double> lip_x;   // per atom
  };
  auto d = std::make_shared<Data>();
  d->decisions = space.points();
  d->atoms = grid.atoms();
  d->h = std::move(values);
  const std::size_t K = space.size(), m = grid.size();
  d->lip_xi.assign(K, 0.0);
  d->lip_x.assign(m, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        d->lip_xi[k] = std::max(d->lip_xi[k], std::abs(d->h[k][i] - d->h[k][j]) / grid.distance(i, j));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = a + 1; b < K; ++b) {
        const double dist = norm_distance(space[a], space[b]);
        if (dist > 0.0) d->lip_x[j] = std::max(d->lip_x[j], std::abs(d->h[a][j] - d->h[b][j]) / dist);
      }
  bool nonneg = true;
  for (const auto& row : d->h)
    for (double v : row) nonneg = nonneg && v >= 0.0;

  auto find_decision = [d](const Decision& x) {
    for (std::size_t k = 0; k < d->decisions.size(); ++k)
      if (d->decisions[k] == x) return k;
    throw std::invalid_argument("table cost evaluated at a decision outside its table");
  };
  auto find_atom = [d](const Point& xi) {
    for (std::size_t j = 0; j < d->atoms.size(); ++j)
      if (d->atoms[j] == xi) return j;
    throw std::invalid_argument("table cost evaluated at a point outside its grid");
  };
  CostFunction cf;
  cf.name = "table";
  cf.eval = [d, find_decision, find_atom](const Decision& x, const Point& xi) {
    return d->h[find_decision(x)][find_atom(xi)];
  };
  cf.lip_in_xi = [d, find_decision](const Decision& x) { return d->lip_xi[find_decision(x)]; };
  cf.lip_in_x = [d, find_atom](const Point& xi) { return d->lip_x[find_atom(xi)]; };
  cf.nonneg = nonneg;
  return cf;
}

LipschitzCheck check_cost(const CostFunction& cf, const SupportGrid& grid, const DecisionSpace& space) {
  LipschitzCheck out;
  const CostTable table(cf, grid, space);
  auto ratio = [](double observed, double declared) {
    if (observed == 0.0) return 0.0;
    if (declared <= 0.0) return std::numeric_limits<double>::infinity();
    return observed / declared;
  };
  for (std::size_t k = 0; k < table.decisions(); ++k)
    for (std::size_t j = 0; j < table.atoms(); ++j)
      if (cf.nonneg && table.at(k, j) < 0.0) out.nonneg_ok = false;
  if (cf.has_lip_in_xi()) {
    for (std::size_t k = 0; k < table.decisions(); ++k) {
      const double lip = cf.lip_in_xi(space[k]);
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
          const double q = std::abs(table.at(k, i) - table.at(k, j)) / grid.distance(i, j);
          out.worst_ratio_xi = std::max(out.worst_ratio_xi, ratio(q, lip));
        }
    }
  }
  if (cf.has_lip_in_x()) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double lip = cf.lip_in_x(grid.atom(j));
      for (std::size_t a = 0; a < space.size(); ++a)
        for (std::size_t b = a + 1; b < space.size(); ++b) {
          const double dist = norm_distance(space[a], space[b]);
          if (dist == 0.0) continue;
          const double q = std::abs(table.at(a, j) - table.at(b, j)) / dist;
          out.worst_ratio_x = std::max(out.worst_ratio_x, ratio(q, lip));
        }
    }
  }
  return out;
}

CostFunction scale_lipschitz(CostFunction cf, double factor) {
  if (cf.lip_in_xi) {
    auto inner = cf.lip_in_xi;
    cf.lip_in_xi = [inner, factor](const Decision& x) { return factor * inner(x); };
  }
  if (cf.lip_in_x) {
    auto inner = cf.lip_in_x;
    cf.lip_in_x = [inner, factor](const Point& xi) { return factor * inner(xi); };
  }
  return cf;
}

}  // namespace dro
