#include "dro/genbound.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dro/solver.hpp"

namespace dro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double expected_lip_x(const DiscreteDistribution& p0, const CostFunction& cf) {
  const auto& grid = *p0.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (p0[j] != 0.0) s += p0[j] * cf.lip_in_x(grid.atom(j));
  return s;
}

// L * Delta with infinite factors dominating.
double scaled(double lip, double delta) {
  if (std::isinf(lip) || std::isinf(delta)) return kInf;
  return lip * delta;
}

void require_member(const AmbiguityBall& ball, const DiscreteDistribution& p0, const char* bound) {
  require_same_grid(ball.center, p0);
  if (!membership(ball, p0))
    throw std::invalid_argument(std::string(bound) +
                                " requires the true distribution to lie in the ambiguity ball (Delta(P0, center) = " +
                                format_number(divergence(ball.kind, p0, ball.center)) +
                                " > radius " + format_number(ball.radius) + ")");
}

BoundRecord make_record(BoundKind kind, const Decision& x, double gap, double bound, nlohmann::json ingredients) {
  BoundRecord r;
  r.kind = kind;
  r.x_star = x;
  r.gap = gap;
  r.bound = bound;
  r.degenerate = std::isinf(bound);
  r.holds = bound_holds(gap, bound);
  r.ingredients = std::move(ingredients);
  return r;
}

nlohmann::json to_json(const Decision& x) { return nlohmann::json(x); }

// Neumaier-compensated running sum.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

GapRecord measure_gap(const DiscreteDistribution& p0, const DiscreteDistribution& pbar, const CostFunction& cf,
                      const Decision& x) {
  GapRecord g;
  g.x = x;
  g.true_value = expected_cost(p0, cf, x);
  g.nominal_value = expected_cost(pbar, cf, x);
  g.gap = g.true_value - g.nominal_value;
  g.abs_gap = std::abs(g.gap);
  return g;
}

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::Uniform: return "uniform";
    case BoundKind::AbsoluteNominal: return "absolute_nominal";
    case BoundKind::AbsoluteDro: return "absolute_dro";
    case BoundKind::RelativeNominal: return "relative_nominal";
    case BoundKind::RelativeDro: return "relative_dro";
    case BoundKind::MinmaxOneSided: return "minmax_one_sided";
  }
  return "unknown";
}

std::string to_string(Corollary c) {
  switch (c) {
    case Corollary::Uniform: return "uniform";
    case Corollary::Absolute: return "absolute";
    case Corollary::Relative: return "relative";
  }
  return "unknown";
}

bool bound_holds(double gap, double bound) { return gap <= bound + 1e-9; }

std::vector<std::pair<GapRecord, BoundRecord>> uniform_bound(const DiscreteDistribution& p0,
                                                             const DiscreteDistribution& pbar,
                                                             const CostFunction& cf, const DecisionSpace& space,
                                                             double order) {
  if (!cf.has_lip_in_xi()) throw std::invalid_argument("uniform bound needs the Lipschitz constant of h(x, .)");
  require_same_grid(p0, pbar);
  const double w = wasserstein(p0, pbar, order);
  std::vector<std::pair<GapRecord, BoundRecord>> out;
  out.reserve(space.size());
  for (const auto& x : space.points()) {
    GapRecord g = measure_gap(p0, pbar, cf, x);
    const double lip = cf.lip_in_xi(x);
    nlohmann::json ing = {{"lipschitz_xi", lip}, {"distance", w}, {"order", order}};
    BoundRecord b = make_record(BoundKind::Uniform, x, g.abs_gap, scaled(lip, w), std::move(ing));
    out.emplace_back(std::move(g), std::move(b));
  }
  return out;
}

std::pair<BoundRecord, BoundRecord> absolute_bound(const DiscreteDistribution& p0, const AmbiguityBall& ball,
                                                   const CostFunction& cf, const DecisionSpace& space) {
  if (!cf.has_lip_in_x()) throw std::invalid_argument("absolute bound needs the Lipschitz constant of h(., xi)");
  require_member(ball, p0, "absolute bound");
  const Solution dro = solve_absolute_dro(ball, cf, space);
  const Solution nominal = solve_saa(ball.center, cf, space);
  const double L = *dro.measure;
  const double dist = norm_distance(nominal.x_star, dro.x_star);
  const double elip = expected_lip_x(p0, cf);

  const GapRecord g = measure_gap(p0, ball.center, cf, nominal.x_star);
  nlohmann::json ing1 = {{"x_bar", to_json(nominal.x_star)}, {"decision_distance", dist},
                         {"expected_lipschitz_x", elip},     {"L_star", L},
                         {"radius", ball.radius},            {"reference", dro.diagnostics.reference}};
  BoundRecord first = make_record(BoundKind::AbsoluteNominal, dro.x_star, g.abs_gap, dist * elip + L, std::move(ing1));

  const double truth = expected_cost(p0, cf, dro.x_star);
  const double worst = expected_cost(*dro.witness, cf, dro.x_star);
  nlohmann::json ing2 = {{"L_star", L}, {"true_value", truth}, {"witness_value", worst}, {"radius", ball.radius}};
  BoundRecord second = make_record(BoundKind::AbsoluteDro, dro.x_star, std::abs(truth - worst), 2.0 * L, std::move(ing2));
  return {std::move(first), std::move(second)};
}

std::pair<BoundRecord, BoundRecord> relative_bound(const DiscreteDistribution& p0, const DiscreteDistribution& pbar,
                                                   const CostFunction& cf, const DecisionSpace& space,
                                                   const DivergenceKind& kind) {
  if (!cf.has_lip_in_x()) throw std::invalid_argument("relative bound needs the Lipschitz constant of h(., xi)");
  require_same_grid(p0, pbar);
  const Solution rs = solve_robust_satisficing(pbar, cf, space, kind, Sided::Two, 0.0);
  const Solution nominal = solve_saa(pbar, cf, space);
  const double lower = rs.diagnostics.measure_lower;
  const double cert = rs.diagnostics.measure_upper;
  const double dist = norm_distance(nominal.x_star, rs.x_star);
  const double elip = expected_lip_x(p0, cf);
  const double d_nominal = divergence(kind, p0, pbar);
  const double d_witness = divergence(kind, p0, *rs.witness);

  const GapRecord g = measure_gap(p0, pbar, cf, nominal.x_star);
  const double bound1 = dist * elip + scaled(cert, d_nominal);
  const double bound1_lower = dist * elip + scaled(lower, d_nominal);
  nlohmann::json ing1 = {{"x_bar", to_json(nominal.x_star)},
                         {"decision_distance", dist},
                         {"expected_lipschitz_x", elip},
                         {"L_star_lower", lower},
                         {"L_star_certificate", cert},
                         {"divergence_true_nominal", d_nominal},
                         {"holds_with_lower_estimate", bound_holds(g.abs_gap, bound1_lower)}};
  BoundRecord first = make_record(BoundKind::RelativeNominal, rs.x_star, g.abs_gap, bound1, std::move(ing1));

  const double truth = expected_cost(p0, cf, rs.x_star);
  const double worst = expected_cost(*rs.witness, cf, rs.x_star);
  const double gap2 = std::abs(truth - worst);
  nlohmann::json ing2 = {{"L_star_lower", lower},
                         {"L_star_certificate", cert},
                         {"divergence_true_witness", d_witness},
                         {"witness_radius", rs.diagnostics.witness_radius},
                         {"true_value", truth},
                         {"witness_value", worst},
                         {"holds_with_lower_estimate", bound_holds(gap2, scaled(lower, d_witness))}};
  BoundRecord second = make_record(BoundKind::RelativeDro, rs.x_star, gap2, scaled(cert, d_witness), std::move(ing2));
  return {std::move(first), std::move(second)};
}

BoundRecord minmax_one_sided_bound(const DiscreteDistribution& p0, const AmbiguityBall& ball,
                                   const CostFunction& cf, const DecisionSpace& space) {
  require_member(ball, p0, "min-max one-sided bound");
  const Solution s = solve_minmax_dro(ball, cf, space);
  const double truth = expected_cost(p0, cf, s.x_star);
  nlohmann::json ing = {{"objective", s.objective_value}, {"radius", ball.radius}, {"true_value", truth}};
  return make_record(BoundKind::MinmaxOneSided, s.x_star, truth, s.objective_value, std::move(ing));
}

ExpectedBoundsSummary expected_bounds(const ExpectedBoundsSpec& spec, const CostFunction& cf,
                                      const DecisionSpace& space) {
  if (spec.replications < 30) throw std::invalid_argument("expected bounds need at least 30 replications");
  if (spec.n == 0 && !spec.nominal_is_truth) throw std::invalid_argument("expected bounds need n >= 1");
  ExpectedBoundsSummary out;
  out.which = spec.which;
  out.n = spec.n;
  out.replications = spec.replications;
  out.records.resize(spec.replications);
  out.seeds.resize(spec.replications);

  auto replicate = [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(spec.seed, spec.n, r);
    out.seeds[r] = seed;
    const DiscreteDistribution pbar = spec.nominal_is_truth ? spec.p0 : empirical(sample(spec.p0, spec.n, seed));
    std::vector<BoundRecord> recs;
    switch (spec.which) {
      case Corollary::Uniform: {
        const Solution xbar = solve_saa(pbar, cf, space);
        auto rows = uniform_bound(spec.p0, pbar, cf, DecisionSpace({xbar.x_star}));
        recs.push_back(std::move(rows.front().second));
        break;
      }
      case Corollary::Absolute: {
        const AmbiguityBall ball(pbar, wasserstein(spec.p0, pbar), DivergenceKind::wasserstein(1.0));
        auto [a, b] = absolute_bound(spec.p0, ball, cf, space);
        recs.push_back(std::move(a));
        recs.push_back(std::move(b));
        break;
      }
      case Corollary::Relative: {
        auto [a, b] = relative_bound(spec.p0, pbar, cf, space, spec.kind);
        recs.push_back(std::move(a));
        recs.push_back(std::move(b));
        break;
      }
    }
    out.records[r] = std::move(recs);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(spec.workers, static_cast<unsigned>(spec.replications)));
  if (workers == 1) {
    for (std::size_t r = 0; r < spec.replications; ++r) replicate(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < spec.replications; r += workers) replicate(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const std::size_t parts = out.records.front().size();
  for (std::size_t part = 0; part < parts; ++part) {
    ExpectedBoundLine line;
    line.kind = out.records.front()[part].kind;
    Accumulator gap, bound, diff;
    std::size_t finite = 0;
    for (const auto& recs : out.records) {
      const BoundRecord& b = recs[part];
      if (b.degenerate) {
        ++line.degenerate;
        continue;
      }
      ++finite;
      gap.add(b.gap);
      bound.add(b.bound);
      diff.add(b.gap - b.bound);
    }
    if (finite == 0) {
      line.mean_bound = kInf;
      out.lines.push_back(line);
      continue;
    }
    const double f = static_cast<double>(finite);
    line.mean_gap = gap.value() / f;
    line.mean_bound = bound.value() / f;
    const double mean_diff = diff.value() / f;
    Accumulator ss;
    for (const auto& recs : out.records)
      if (!recs[part].degenerate) {
        const double d = recs[part].gap - recs[part].bound - mean_diff;
        ss.add(d * d);
      }
    line.sigma = finite > 1 ? std::sqrt(ss.value() / (f - 1.0) / f) : 0.0;
    line.holds = line.mean_gap <= line.mean_bound + 3.0 * line.sigma + 1e-12;
    out.lines.push_back(line);
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_decision(const Decision& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ';';
    s += format_number(x[i]);
  }
  return s;
}

std::string bound_csv_header() { return "kind,n,seed,x_star,gap,bound,holds,ingredients_json"; }

std::string bound_csv_row(const BoundRecord& r, std::size_t n, std::uint64_t seed) {
  std::string ing = r.ingredients.dump();
  std::string quoted = "\"";
  for (char c : ing) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return to_string(r.kind) + "," + std::to_string(n) + "," + std::to_string(seed) + "," + format_decision(r.x_star) +
         "," + format_number(r.gap) + "," + format_number(r.bound) + "," + (r.holds ? "true" : "false") + "," + quoted;
}

}  // namespace dro
