#include "dro/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace dro {

using nlohmann::json;

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::string at(const std::string& pointer, const std::string& key) { return pointer + "/" + escape_token(key); }
std::string at(const std::string& pointer, std::size_t index) { return pointer + "/" + std::to_string(index); }

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw ConfigError(pointer.empty() ? "/" : pointer, message);
}

void require_object(const json& j, const std::string& p, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(p, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(at(p, key), "unknown key");
  }
}

const json& require_key(const json& j, const std::string& p, const char* key) {
  if (!j.contains(key)) fail(at(p, key), "required key is missing");
  return j.at(key);
}

double as_number(const json& j, const std::string& p) {
  if (!j.is_number()) fail(p, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(p, "expected a finite number");
  return v;
}

double as_nonneg(const json& j, const std::string& p) {
  const double v = as_number(j, p);
  if (v < 0.0) fail(p, "must be >= 0");
  return v;
}

std::uint64_t as_count(const json& j, const std::string& p, std::uint64_t min) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    fail(p, "expected a non-negative integer");
  const auto v = j.get<std::uint64_t>();
  if (v < min) fail(p, "must be >= " + std::to_string(min));
  return v;
}

std::string as_string(const json& j, const std::string& p) {
  if (!j.is_string()) fail(p, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_vector(const json& j, const std::string& p) {
  if (!j.is_array()) fail(p, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], at(p, i)));
  return v;
}

std::vector<std::vector<double>> as_matrix(const json& j, const std::string& p) {
  if (!j.is_array()) fail(p, "expected an array of arrays");
  std::vector<std::vector<double>> m;
  for (std::size_t i = 0; i < j.size(); ++i) m.push_back(as_vector(j[i], at(p, i)));
  return m;
}

// Points given as numbers (scalars) or arrays (vectors).
std::vector<Point> as_points(const json& j, const std::string& p) {
  if (!j.is_array() || j.empty()) fail(p, "expected a nonempty array of points");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_number()) pts.push_back({as_number(j[i], at(p, i))});
    else pts.push_back(as_vector(j[i], at(p, i)));
  }
  return pts;
}

std::optional<double> as_radius(const json& j, const std::string& p) {
  if (j.is_string()) {
    if (j.get<std::string>() != "cover") fail(p, "expected a number >= 0 or \"cover\"");
    return std::nullopt;
  }
  return as_nonneg(j, p);
}

json solution_diagnostics(const SolverDiagnostics& d) {
  json values = json::array();
  for (double v : d.values) values.push_back(number(v));
  return {{"evaluations", d.evaluations}, {"ties", d.ties}, {"values", values}, {"reference", number(d.reference)},
          {"measure_lower", number(d.measure_lower)}, {"measure_upper", number(d.measure_upper)},
          {"witness_radius", number(d.witness_radius)}};
}

const char* kBoundGroups[] = {"uniform", "absolute", "relative", "minmax_one_sided"};

ReplicationResult replicate(const ExperimentConfig& config, const CostFunction& cf, const RunOptions& options,
                            std::size_t n, std::size_t rep) {
  ReplicationResult out;
  out.n = n;
  out.replication = rep;
  out.seed = derive_seed(config.seed, n, rep);
  try {
    const SampleSet data = sample(config.p0(), n, out.seed);
    const DiscreteDistribution pbar = empirical(data);
    const DecisionSpace& space = config.decisions();
    if (options.solve_methods) {
      for (const auto& m : config.methods) {
        Solution s = run_method(m, config.p0(), data, cf, space);
        out.gaps.emplace_back(m.label, measure_gap(config.p0(), pbar, cf, s.x_star));
        out.solutions.emplace_back(m.label, std::move(s));
      }
    }
    if (options.compute_bounds) {
      const double radius = config.bound_epsilon ? *config.bound_epsilon : wasserstein(config.p0(), pbar);
      const AmbiguityBall ball(pbar, radius, DivergenceKind::wasserstein(1.0));
      const bool covered = membership(ball, config.p0());
      for (const auto& group : config.bounds) {
        if (group == "uniform") {
          const Solution xbar = solve_saa(pbar, cf, space);
          auto rows = uniform_bound(config.p0(), pbar, cf, DecisionSpace({xbar.x_star}));
          out.bounds.push_back(std::move(rows.front().second));
        } else if (group == "absolute") {
          if (!covered) {
            out.skipped_bounds += 2;
            continue;
          }
          auto [a, b] = absolute_bound(config.p0(), ball, cf, space);
          out.bounds.push_back(std::move(a));
          out.bounds.push_back(std::move(b));
        } else if (group == "relative") {
          auto [a, b] = relative_bound(config.p0(), pbar, cf, space, config.relative_divergence);
          out.bounds.push_back(std::move(a));
          out.bounds.push_back(std::move(b));
        } else if (group == "minmax_one_sided") {
          if (!covered) {
            ++out.skipped_bounds;
            continue;
          }
          out.bounds.push_back(minmax_one_sided_bound(config.p0(), ball, cf, space));
        }
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json to_json(const DiscreteDistribution& d) {
  json w = json::array();
  for (double v : d.weights()) w.push_back(v);
  return w;
}

json to_json(const Solution& s) {
  json j = {{"method", to_string(s.method)},
            {"index", s.index},
            {"x_star", s.x_star},
            {"objective_value", number(s.objective_value)},
            {"diagnostics", solution_diagnostics(s.diagnostics)}};
  j["witness"] = s.witness ? to_json(*s.witness) : json(nullptr);
  j["measure"] = s.measure ? number(*s.measure) : json(nullptr);
  return j;
}

json to_json(const RobustnessReport& r) {
  json j = {{"x", r.x},
            {"kind", to_string(r.kind)},
            {"measure", number(r.measure)},
            {"radius", number(r.radius)},
            {"upper", number(r.upper)},
            {"evaluations", r.evaluations}};
  j["witness"] = r.witness ? to_json(*r.witness) : json(nullptr);
  if (r.kind == RobustnessKind::Local) {
    json seq = json::array();
    for (double v : r.sequence) seq.push_back(number(v));
    j["radii"] = r.radii;
    j["sequence"] = seq;
    j["converged"] = r.converged;
  }
  if (r.confidence) {
    j["confidence"] = *r.confidence;
    j["confidence_stderr"] = r.confidence_stderr;
    j["markov_bound"] = r.markov_bound;
    j["mc_mean"] = r.mc_mean;
    j["mc_mean_stderr"] = r.mc_mean_stderr;
  }
  return j;
}

json to_json(const GapRecord& g) {
  return {{"x", g.x}, {"true_value", g.true_value}, {"nominal_value", g.nominal_value}, {"gap", g.gap},
          {"abs_gap", g.abs_gap}};
}

json to_json(const BoundRecord& b) {
  return {{"kind", to_string(b.kind)}, {"x_star", b.x_star},       {"gap", number(b.gap)},
          {"bound", number(b.bound)},   {"holds", b.holds},          {"degenerate", b.degenerate},
          {"ingredients", b.ingredients}};
}

std::string config_hash(const json& document) {
  const std::string canonical = document.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

GridPtr parse_grid(const json& j, const std::string& p) {
  require_object(j, p, {"atoms", "metric"});
  std::vector<Point> atoms = as_points(require_key(j, p, "atoms"), at(p, "atoms"));
  try {
    if (j.contains("metric")) return SupportGrid::with_metric(std::move(atoms), as_matrix(j["metric"], at(p, "metric")));
    return SupportGrid::euclidean(std::move(atoms));
  } catch (const std::invalid_argument& e) {
    fail(p, e.what());
  }
}

DiscreteDistribution parse_weights(const json& j, const GridPtr& grid, const std::string& p) {
  std::vector<double> w = as_vector(j, p);
  if (w.size() != grid->size()) fail(p, "expected " + std::to_string(grid->size()) + " weights");
  try {
    return DiscreteDistribution(grid, std::move(w));
  } catch (const std::invalid_argument& e) {
    fail(p, e.what());
  }
}

DiscreteDistribution parse_distribution(const json& j, const std::string& p) {
  require_object(j, p, {"atoms", "weights", "metric"});
  json g = {{"atoms", require_key(j, p, "atoms")}};
  if (j.contains("metric")) g["metric"] = j["metric"];
  return parse_weights(require_key(j, p, "weights"), parse_grid(g, p), at(p, "weights"));
}

DecisionSpace parse_decision_space(const json& j, const std::string& p) {
  require_object(j, p, {"points", "interval", "count"});
  try {
    if (j.contains("points")) {
      if (j.contains("interval") || j.contains("count")) fail(p, "give either points or interval with count");
      return DecisionSpace(as_points(j["points"], at(p, "points")));
    }
    const std::vector<double> iv = as_vector(require_key(j, p, "interval"), at(p, "interval"));
    if (iv.size() != 2 || !(iv[0] <= iv[1])) fail(at(p, "interval"), "expected [lo, hi] with lo <= hi");
    const auto count = as_count(require_key(j, p, "count"), at(p, "count"), 1);
    return DecisionSpace::interval(iv[0], iv[1], count);
  } catch (const std::invalid_argument& e) {
    fail(p, e.what());
  }
}

CostSpec parse_cost(const json& j, const std::string& p) {
  require_object(j, p, {"name", "params", "table", "lipschitz_scale"});
  CostSpec spec;
  spec.name = as_string(require_key(j, p, "name"), at(p, "name"));
  const auto names = builtin_cost_names();
  if (spec.name != "table" && std::find(names.begin(), names.end(), spec.name) == names.end())
    fail(at(p, "name"), "unknown cost '" + spec.name + "'");
  if (j.contains("params")) {
    const json& params = j["params"];
    if (!params.is_object()) fail(at(p, "params"), "expected an object");
    for (const auto& [key, value] : params.items())
      spec.params[key] = as_number(value, at(at(p, "params"), key));
  }
  if (j.contains("table")) {
    if (spec.name != "table") fail(at(p, "table"), "only the table cost takes a table");
    spec.table = as_matrix(j["table"], at(p, "table"));
  } else if (spec.name == "table") {
    fail(at(p, "table"), "required key is missing");
  }
  if (j.contains("lipschitz_scale")) {
    spec.lipschitz_scale = as_number(j["lipschitz_scale"], at(p, "lipschitz_scale"));
    if (!(spec.lipschitz_scale > 0.0)) fail(at(p, "lipschitz_scale"), "must be > 0");
  }
  return spec;
}

CostFunction build_cost(const CostSpec& spec, const SupportGrid& grid, const DecisionSpace& space) {
  CostFunction cf = spec.name == "table" ? table_cost(space, grid, spec.table)
                                         : make_builtin_cost(spec.name, spec.params, grid, space);
  if (spec.lipschitz_scale != 1.0) cf = scale_lipschitz(std::move(cf), spec.lipschitz_scale);
  return cf;
}

CostFunction ExperimentConfig::cost_function() const { return build_cost(cost, *grid, *space); }

DivergenceKind parse_divergence(const json& j, const std::string& p) {
  require_object(j, p, {"kind", "p", "orientation"});
  const std::string kind = as_string(require_key(j, p, "kind"), at(p, "kind"));
  if (kind == "wasserstein") {
    if (j.contains("orientation")) fail(at(p, "orientation"), "only phi-divergences have an orientation");
    const double order = j.contains("p") ? as_number(j["p"], at(p, "p")) : 1.0;
    if (!(order >= 1.0)) fail(at(p, "p"), "Wasserstein order must be >= 1");
    return DivergenceKind::wasserstein(order);
  }
  if (j.contains("p")) fail(at(p, "p"), "only Wasserstein distances have an order");
  Orientation o = Orientation::Forward;
  if (j.contains("orientation")) {
    const std::string s = as_string(j["orientation"], at(p, "orientation"));
    if (s == "reverse") o = Orientation::Reverse;
    else if (s != "forward") fail(at(p, "orientation"), "expected forward or reverse");
  }
  try {
    return DivergenceKind::phi(parse_generator(kind), o);
  } catch (const std::invalid_argument&) {
    fail(at(p, "kind"), "expected wasserstein, kl, chi2 or tv");
  }
}

MethodSpec parse_method_spec(const json& j, const std::string& p) {
  require_object(j, p, {"name", "label", "epsilon", "divergence", "alpha", "beta", "lambda", "delta", "sided", "prior",
                        "regularizer"});
  MethodSpec m;
  const std::string name = as_string(require_key(j, p, "name"), at(p, "name"));
  try {
    m.method = parse_method(name);
  } catch (const std::invalid_argument&) {
    fail(at(p, "name"), "unknown method '" + name + "' (expected saa, reg_saa, bayes_dp, minmax_dro, abs_dro or satisficing)");
  }
  m.label = j.contains("label") ? as_string(j["label"], at(p, "label")) : name;
  auto forbid = [&](const char* key) {
    if (j.contains(key)) fail(at(p, key), "not used by method '" + name + "'");
  };
  const bool uses_ball = m.method == Method::MinmaxDRO || m.method == Method::AbsoluteDRO;
  if (!uses_ball) forbid("epsilon");
  if (!uses_ball && m.method != Method::Satisficing) forbid("divergence");
  if (m.method != Method::BayesDP) {
    forbid("alpha");
    forbid("beta");
  }
  if (m.method != Method::RegularizedSAA) {
    forbid("lambda");
    forbid("regularizer");
  }
  if (m.method != Method::Satisficing) {
    forbid("delta");
    forbid("sided");
  }
  if (m.method != Method::BayesDP && m.method != Method::RegularizedSAA) forbid("prior");

  if (uses_ball) m.epsilon = as_radius(require_key(j, p, "epsilon"), at(p, "epsilon"));
  if (j.contains("divergence")) m.divergence = parse_divergence(j["divergence"], at(p, "divergence"));
  if (j.contains("alpha") && j.contains("beta")) fail(at(p, "beta"), "give either alpha or beta, not both");
  if (j.contains("alpha")) m.alpha = as_nonneg(j["alpha"], at(p, "alpha"));
  if (j.contains("beta")) {
    m.beta = as_number(j["beta"], at(p, "beta"));
    if (*m.beta < 0.0 || *m.beta > 1.0) fail(at(p, "beta"), "must lie in [0, 1]");
  }
  if (j.contains("lambda")) m.lambda = as_nonneg(j["lambda"], at(p, "lambda"));
  if (j.contains("delta")) m.delta = as_nonneg(j["delta"], at(p, "delta"));
  if (j.contains("sided")) {
    const std::string s = as_string(j["sided"], at(p, "sided"));
    if (s == "one") m.sided = Sided::One;
    else if (s != "two") fail(at(p, "sided"), "expected one or two");
  }
  if (j.contains("prior")) m.prior = as_vector(j["prior"], at(p, "prior"));
  if (j.contains("regularizer")) {
    const std::string r = as_string(j["regularizer"], at(p, "regularizer"));
    if (r == "squared_norm") m.squared_norm_regularizer = true;
    else if (r != "prior") fail(at(p, "regularizer"), "expected prior or squared_norm");
  }
  if (m.method == Method::RegularizedSAA && !m.squared_norm_regularizer && !m.prior)
    fail(at(p, "prior"), "the prior regularizer needs prior weights");
  return m;
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "", {"grid", "true_distribution", "cost", "decision_space", "methods", "bounds", "bound_epsilon",
                           "relative_divergence", "n_sweep", "replications", "seed", "output"});
  ExperimentConfig c;
  c.document = doc;
  c.grid = parse_grid(require_key(doc, "", "grid"), "/grid");
  c.truth = parse_weights(require_key(doc, "", "true_distribution"), c.grid, "/true_distribution");
  c.space = parse_decision_space(require_key(doc, "", "decision_space"), "/decision_space");
  c.cost = parse_cost(require_key(doc, "", "cost"), "/cost");
  try {
    (void)c.cost_function();
  } catch (const std::invalid_argument& e) {
    fail("/cost", e.what());
  }

  if (doc.contains("methods")) {
    const json& ms = doc["methods"];
    if (!ms.is_array()) fail("/methods", "expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      MethodSpec m = parse_method_spec(ms[i], at("/methods", i));
      const std::string p = at("/methods", i);
      if (m.prior && m.prior->size() != c.grid->size())
        fail(at(p, "prior"), "expected " + std::to_string(c.grid->size()) + " weights");
      if (m.prior) (void)parse_weights(ms[i]["prior"], c.grid, at(p, "prior"));
      for (const auto& other : c.methods)
        if (other.label == m.label) fail(at(p, "label"), "duplicate method label '" + m.label + "'");
      c.methods.push_back(std::move(m));
    }
  }
  if (doc.contains("bounds")) {
    const json& bs = doc["bounds"];
    if (!bs.is_array()) fail("/bounds", "expected an array");
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string b = as_string(bs[i], at("/bounds", i));
      bool known = false;
      for (const char* g : kBoundGroups) known = known || b == g;
      if (!known) fail(at("/bounds", i), "unknown bound '" + b + "' (expected uniform, absolute, relative or minmax_one_sided)");
      c.bounds.push_back(b);
    }
  } else {
    c.bounds.assign(std::begin(kBoundGroups), std::end(kBoundGroups));
  }
  if (doc.contains("bound_epsilon")) c.bound_epsilon = as_radius(doc["bound_epsilon"], "/bound_epsilon");
  if (doc.contains("relative_divergence"))
    c.relative_divergence = parse_divergence(doc["relative_divergence"], "/relative_divergence");
  if (!c.relative_divergence.is_wasserstein() && c.relative_divergence.orientation == Orientation::Reverse)
    fail("/relative_divergence/orientation", "reverse-oriented balls are not supported by the solvers");
  for (const auto& m : c.methods)
    if (!m.divergence.is_wasserstein() && m.divergence.orientation == Orientation::Reverse)
      fail("/methods", "reverse-oriented balls are not supported by the solvers");

  const json& sweep = require_key(doc, "", "n_sweep");
  if (!sweep.is_array() || sweep.empty()) fail("/n_sweep", "expected a nonempty array of sample sizes");
  for (std::size_t i = 0; i < sweep.size(); ++i) c.n_sweep.push_back(as_count(sweep[i], at("/n_sweep", i), 1));
  c.replications = doc.contains("replications") ? as_count(doc["replications"], "/replications", 1) : 1;
  c.seed = doc.contains("seed") ? as_count(doc["seed"], "/seed", 0) : 0;
  if (doc.contains("output")) {
    c.output = as_string(doc["output"], "/output");
    if (c.output.empty()) fail("/output", "must not be empty");
  }
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", path.string() + " is not valid JSON: " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

Solution run_method(const MethodSpec& spec, const DiscreteDistribution& truth, const SampleSet& data,
                    const CostFunction& cf, const DecisionSpace& space) {
  const DiscreteDistribution pbar = empirical(data);
  const GridPtr& grid = pbar.grid();
  auto prior = [&] {
    return spec.prior ? DiscreteDistribution(grid, *spec.prior) : DiscreteDistribution::uniform(grid);
  };
  auto radius = [&](const DivergenceKind& kind) { return spec.epsilon ? *spec.epsilon : divergence(kind, truth, pbar); };
  switch (spec.method) {
    case Method::SAA: return solve_saa(pbar, cf, space);
    case Method::RegularizedSAA: {
      Regularizer f = spec.squared_norm_regularizer
                          ? Regularizer{"squared_norm",
                                        [](const Decision& x) {
                                          double s = 0.0;
                                          for (double v : x) s += v * v;
                                          return s;
                                        }}
                          : regularizer_from_prior(prior(), cf);
      return solve_regularized_saa(pbar, cf, f, spec.lambda, space);
    }
    case Method::BayesDP: {
      const PriorSpec ps = spec.beta ? PriorSpec::with_beta(prior(), *spec.beta) : PriorSpec::with_alpha(prior(), spec.alpha);
      return solve_bayes_dp(ps, data, cf, space);
    }
    case Method::MinmaxDRO:
      return solve_minmax_dro(AmbiguityBall(pbar, radius(spec.divergence), spec.divergence), cf, space);
    case Method::AbsoluteDRO:
      return solve_absolute_dro(AmbiguityBall(pbar, radius(spec.divergence), spec.divergence), cf, space);
    case Method::Satisficing:
      return solve_robust_satisficing(pbar, cf, space, spec.divergence, spec.sided, spec.delta);
  }
  throw std::logic_error("unhandled method");
}

std::size_t RunRecord::bound_count() const {
  std::size_t n = 0;
  for (const auto& r : replications) n += r.bounds.size();
  return n;
}

std::size_t RunRecord::violations() const {
  std::size_t n = 0;
  for (const auto& r : replications)
    for (const auto& b : r.bounds) n += b.holds ? 0 : 1;
  return n;
}

std::size_t RunRecord::failures() const {
  std::size_t n = 0;
  for (const auto& r : replications) n += r.error ? 1 : 0;
  return n;
}

json RunRecord::to_json() const {
  json reps = json::array();
  std::size_t skipped = 0;
  for (const auto& r : replications) {
    json sols = json::object(), gaps = json::object(), bounds = json::array();
    for (const auto& [label, s] : r.solutions) sols[label] = dro::to_json(s);
    for (const auto& [label, g] : r.gaps) gaps[label] = dro::to_json(g);
    for (const auto& b : r.bounds) bounds.push_back(dro::to_json(b));
    json entry = {{"n", r.n},          {"replication", r.replication}, {"seed", r.seed},
                  {"solutions", sols}, {"gaps", gaps},                 {"bounds", bounds},
                  {"skipped_bounds", r.skipped_bounds}};
    entry["error"] = r.error ? json(*r.error) : json(nullptr);
    reps.push_back(std::move(entry));
    skipped += r.skipped_bounds;
  }
  return {{"config_hash", config_hash},
          {"version", version},
          {"rng", rng},
          {"wall_seconds", wall_seconds},
          {"bound_rows", bound_count()},
          {"violations", violations()},
          {"failed_replications", failures()},
          {"skipped_bounds", skipped},
          {"replications", reps}};
}

std::string RunRecord::bounds_csv() const {
  std::string out = bound_csv_header() + "\n";
  for (const auto& r : replications)
    for (const auto& b : r.bounds) out += bound_csv_row(b, r.n, r.seed) + "\n";
  return out;
}

RunRecord run(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const CostFunction cf = config.cost_function();
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t n : config.n_sweep)
    for (std::size_t r = 0; r < config.replications; ++r) tasks.emplace_back(n, r);

  RunRecord record;
  record.config_hash = config_hash(config.document);
  record.version = kVersion;
  record.rng = std::string(Rng::kAlgorithm);
  record.replications.resize(tasks.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(tasks.size())));
  auto work = [&](unsigned w) {
    for (std::size_t t = w; t < tasks.size(); t += jobs)
      record.replications[t] = replicate(config, cf, options, tasks[t].first, tasks[t].second);
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

std::filesystem::path output_directory(const ExperimentConfig& config) {
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return config.output;
}

std::vector<std::filesystem::path> write_outputs(const RunRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto csv = dir / "bounds.csv";
  const auto js = dir / "run.json";
  {
    std::ofstream out(csv, std::ios::binary);
    out << record.bounds_csv();
    if (!out) throw std::runtime_error("cannot write " + csv.string());
  }
  {
    std::ofstream out(js, std::ios::binary);
    out << record.to_json().dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + js.string());
  }
  return {csv, js};
}

std::string describe_plan(const ExperimentConfig& config, const RunOptions& options) {
  std::ostringstream os;
  os << "config hash: " << config_hash(config.document) << "\n";
  os << "grid: " << config.grid->size() << " atoms in dimension " << config.grid->dimension() << ", diameter "
     << format_number(config.grid->diameter()) << "\n";
  os << "decisions: " << config.decisions().size() << "\n";
  os << "cost: " << config.cost.name;
  if (config.cost.lipschitz_scale != 1.0) os << " (Lipschitz constants scaled by " << format_number(config.cost.lipschitz_scale) << ")";
  os << "\n";
  if (options.solve_methods) {
    os << "methods:";
    for (const auto& m : config.methods) os << " " << m.label;
    os << "\n";
  }
  if (options.compute_bounds) {
    os << "bounds:";
    for (const auto& b : config.bounds) os << " " << b;
    os << " (ball radius " << (config.bound_epsilon ? format_number(*config.bound_epsilon) : std::string("cover")) << ")\n";
  }
  os << "n sweep:";
  for (auto n : config.n_sweep) os << " " << n;
  os << "\nreplications: " << config.replications << ", seed " << config.seed << ", jobs " << options.jobs << "\n";
  const auto dir = output_directory(config);
  os << "outputs: " << (dir / "bounds.csv").string() << ", " << (dir / "run.json").string() << "\n";
  return os.str();
}

}  // namespace dro
