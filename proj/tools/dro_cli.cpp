// dro: command-line front end for the distributionally robust optimization library.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dro/experiment.hpp"

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kViolation = 2;

struct Problem {
  dro::GridPtr grid;
  std::optional<dro::DecisionSpace> space;
  std::optional<dro::CostFunction> cf;
  std::optional<dro::DiscreteDistribution> center;
  std::optional<dro::SampleSet> samples;
};

void reject_unknown(const json& doc, std::initializer_list<const char*> allowed) {
  if (!doc.is_object()) throw dro::ConfigError("/", "expected an object");
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw dro::ConfigError("/" + key, "unknown key");
  }
}

Problem parse_problem(const json& doc) {
  Problem p;
  if (!doc.contains("grid")) throw dro::ConfigError("/grid", "required key is missing");
  p.grid = dro::parse_grid(doc["grid"], "/grid");
  if (doc.contains("decision_space")) p.space = dro::parse_decision_space(doc["decision_space"], "/decision_space");
  if (doc.contains("cost")) {
    if (!p.space) throw dro::ConfigError("/decision_space", "required key is missing");
    try {
      p.cf = dro::build_cost(dro::parse_cost(doc["cost"], "/cost"), *p.grid, *p.space);
    } catch (const std::invalid_argument& e) {
      throw dro::ConfigError("/cost", e.what());
    }
  }
  if (doc.contains("samples")) {
    const json& s = doc["samples"];
    if (!s.is_array() || s.empty()) throw dro::ConfigError("/samples", "expected a nonempty array of atom indices");
    dro::SampleSet set{p.grid, {}, 0};
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_unsigned() || s[i].get<std::size_t>() >= p.grid->size())
        throw dro::ConfigError("/samples/" + std::to_string(i), "expected an atom index below " +
                                                                    std::to_string(p.grid->size()));
      set.indices.push_back(s[i].get<std::size_t>());
    }
    p.samples = std::move(set);
  }
  if (doc.contains("center")) p.center = dro::parse_weights(doc["center"], p.grid, "/center");
  else if (p.samples) p.center = dro::empirical(*p.samples);
  return p;
}

const dro::CostFunction& need_cost(const Problem& p) {
  if (!p.cf) throw dro::ConfigError("/cost", "required key is missing");
  return *p.cf;
}

const dro::DiscreteDistribution& need_center(const Problem& p) {
  if (!p.center) throw dro::ConfigError("/center", "give center weights or samples");
  return *p.center;
}

double number_at(const json& j, const std::string& key, const std::string& pointer, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw dro::ConfigError(pointer + "/" + key, "required key is missing");
  }
  if (!j[key].is_number()) throw dro::ConfigError(pointer + "/" + key, "expected a number");
  return j[key].get<double>();
}

dro::Decision decision_at(const json& j, const std::string& pointer) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw dro::ConfigError(pointer, "expected a number or an array of numbers");
  dro::Decision x;
  for (const auto& v : j) {
    if (!v.is_number()) throw dro::ConfigError(pointer, "expected an array of numbers");
    x.push_back(v.get<double>());
  }
  return x;
}

int cmd_solve(const std::string& file) {
  const json doc = dro::read_json_file(file);
  reject_unknown(doc, {"grid", "cost", "decision_space", "center", "samples", "method"});
  const Problem p = parse_problem(doc);
  if (!doc.contains("method")) throw dro::ConfigError("/method", "required key is missing");
  const dro::MethodSpec m = dro::parse_method_spec(doc["method"], "/method");
  const auto& cf = need_cost(p);
  const auto& center = need_center(p);
  const auto& space = *p.space;
  if (m.prior && m.prior->size() != p.grid->size())
    throw dro::ConfigError("/method/prior", "expected " + std::to_string(p.grid->size()) + " weights");
  auto prior = [&] {
    return m.prior ? dro::parse_weights(doc["method"]["prior"], p.grid, "/method/prior")
                   : dro::DiscreteDistribution::uniform(p.grid);
  };
  auto radius = [&] {
    if (!m.epsilon) throw dro::ConfigError("/method/epsilon", "the cover radius needs a true distribution; give a number");
    return *m.epsilon;
  };
  dro::Solution s;
  switch (m.method) {
    case dro::Method::SAA: s = dro::solve_saa(center, cf, space); break;
    case dro::Method::RegularizedSAA: {
      dro::Regularizer f = m.squared_norm_regularizer
                               ? dro::Regularizer{"squared_norm",
                                                  [](const dro::Decision& x) {
                                                    double t = 0.0;
                                                    for (double v : x) t += v * v;
                                                    return t;
                                                  }}
                               : dro::regularizer_from_prior(prior(), cf);
      s = dro::solve_regularized_saa(center, cf, f, m.lambda, space);
      break;
    }
    case dro::Method::BayesDP: {
      if (!p.samples) throw dro::ConfigError("/samples", "bayes_dp needs the observed samples");
      const auto spec = m.beta ? dro::PriorSpec::with_beta(prior(), *m.beta) : dro::PriorSpec::with_alpha(prior(), m.alpha);
      s = dro::solve_bayes_dp(spec, *p.samples, cf, space);
      break;
    }
    case dro::Method::MinmaxDRO:
      s = dro::solve_minmax_dro(dro::AmbiguityBall(center, radius(), m.divergence), cf, space);
      break;
    case dro::Method::AbsoluteDRO:
      s = dro::solve_absolute_dro(dro::AmbiguityBall(center, radius(), m.divergence), cf, space);
      break;
    case dro::Method::Satisficing:
      s = dro::solve_robust_satisficing(center, cf, space, m.divergence, m.sided, m.delta);
      break;
  }
  std::cout << dro::to_json(s).dump(2) << "\n";
  return kOk;
}

int cmd_measure(const std::string& file) {
  const json doc = dro::read_json_file(file);
  reject_unknown(doc, {"grid", "cost", "decision_space", "center", "samples", "measure"});
  const Problem p = parse_problem(doc);
  if (!doc.contains("measure") || !doc["measure"].is_object()) throw dro::ConfigError("/measure", "expected an object");
  const json& m = doc["measure"];
  reject_unknown(m, {"kind", "x", "ref", "epsilon", "divergence", "variant", "budget", "seed", "alpha", "L", "draws",
                     "models", "jobs"});
  const auto& cf = need_cost(p);
  const auto& center = need_center(p);
  const auto& space = *p.space;
  if (!m.contains("kind") || !m["kind"].is_string()) throw dro::ConfigError("/measure/kind", "expected a string");
  const std::string kind = m["kind"];
  const dro::DivergenceKind div =
      m.contains("divergence") ? dro::parse_divergence(m["divergence"], "/measure/divergence") : dro::DivergenceKind::wasserstein(1.0);
  const double ref_default = dro::solve_saa(center, cf, space).objective_value;
  const double ref = number_at(m, "ref", "/measure", ref_default);
  auto x = [&] {
    if (!m.contains("x")) throw dro::ConfigError("/measure/x", "required key is missing");
    return decision_at(m["x"], "/measure/x");
  };
  auto variant = [&] {
    const std::string v = m.value("variant", "objective");
    if (v == "objective") return dro::SetVariant::Objective;
    if (v == "solution") return dro::SetVariant::Solution;
    throw dro::ConfigError("/measure/variant", "expected objective or solution");
  };
  dro::RobustnessReport r;
  if (kind == "absolute") {
    const double eps = number_at(m, "epsilon", "/measure");
    r = dro::absolute_measure(x(), ref, dro::AmbiguityBall(center, eps, div), cf);
  } else if (kind == "relative") {
    r = dro::relative_measure(x(), ref, div, center, cf);
  } else if (kind == "local") {
    r = dro::local_measure(space, center, ref, cf, div, variant());
  } else if (kind == "set") {
    if (m.contains("models")) {
      std::vector<dro::DiscreteDistribution> models;
      for (std::size_t i = 0; i < m["models"].size(); ++i)
        models.push_back(dro::parse_weights(m["models"][i], p.grid, "/measure/models/" + std::to_string(i)));
      r = dro::set_robustness(center, models, cf, space, variant());
    } else {
      const double eps = number_at(m, "epsilon", "/measure");
      r = dro::set_robustness(dro::AmbiguityBall(center, eps, div), cf, space, variant(),
                              static_cast<std::size_t>(number_at(m, "budget", "/measure", 1000.0)),
                              static_cast<std::uint64_t>(number_at(m, "seed", "/measure", 0.0)));
    }
  } else if (kind == "pac") {
    const dro::DirichletPrior prior(center, number_at(m, "alpha", "/measure"));
    r = dro::pac_robustness(prior, cf, x(), ref, number_at(m, "L", "/measure"),
                            static_cast<std::size_t>(number_at(m, "draws", "/measure", 10000.0)),
                            static_cast<std::uint64_t>(number_at(m, "seed", "/measure", 0.0)),
                            static_cast<unsigned>(number_at(m, "jobs", "/measure", 1.0)));
  } else {
    throw dro::ConfigError("/measure/kind", "expected absolute, relative, local, set or pac");
  }
  std::cout << dro::to_json(r).dump(2) << "\n";
  return kOk;
}

int cmd_divergence(const std::string& kind, double order, const std::string& orientation, const std::string& a_file,
                   const std::string& b_file) {
  json spec = {{"kind", kind}};
  if (kind == "wasserstein") spec["p"] = order;
  else spec["orientation"] = orientation;
  const dro::DivergenceKind k = dro::parse_divergence(spec, "");
  const dro::DiscreteDistribution a = dro::parse_distribution(dro::read_json_file(a_file), "");
  const dro::DiscreteDistribution b = dro::parse_distribution(dro::read_json_file(b_file), "");
  if (!a.grid()->same_as(*b.grid())) throw dro::ConfigError("/atoms", "both distributions must share atoms and metric");
  const dro::DiscreteDistribution b_on_a(a.grid(), std::vector<double>(b.weights().begin(), b.weights().end()));
  std::cout << dro::format_number(dro::divergence(k, a, b_on_a)) << "\n";
  return kOk;
}

int cmd_prior_from_reg(const std::string& file, bool max_entropy) {
  const json doc = dro::read_json_file(file);
  reject_unknown(doc, {"grid", "cost", "decision_space", "regularizer"});
  const Problem p = parse_problem(doc);
  const auto& cf = need_cost(p);
  if (!doc.contains("regularizer")) throw dro::ConfigError("/regularizer", "required key is missing");
  const json& table = doc["regularizer"];
  std::vector<dro::Decision> xs;
  std::vector<double> fs;
  if (table.is_object()) {
    for (const auto& [key, value] : table.items()) {
      std::size_t used = 0;
      double xv;
      try {
        xv = std::stod(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size()) throw dro::ConfigError("/regularizer/" + key, "keys must be scalar decisions");
      if (!value.is_number()) throw dro::ConfigError("/regularizer/" + key, "expected a number");
      xs.push_back({xv});
      fs.push_back(value.get<double>());
    }
  } else if (table.is_array()) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      const std::string ptr = "/regularizer/" + std::to_string(i);
      reject_unknown(table[i], {"x", "f"});
      if (!table[i].contains("x")) throw dro::ConfigError(ptr + "/x", "required key is missing");
      xs.push_back(decision_at(table[i]["x"], ptr + "/x"));
      fs.push_back(number_at(table[i], "f", ptr));
    }
  } else {
    throw dro::ConfigError("/regularizer", "expected an object {x: f} or an array of {x, f}");
  }
  if (xs.empty()) throw dro::ConfigError("/regularizer", "needs at least one constraint decision");
  auto values = std::make_shared<std::vector<std::pair<dro::Decision, double>>>();
  for (std::size_t k = 0; k < xs.size(); ++k) values->emplace_back(xs[k], fs[k]);
  const dro::Regularizer f{"table", [values](const dro::Decision& x) {
                             for (const auto& [xk, fk] : *values)
                               if (xk == x) return fk;
                             return std::numeric_limits<double>::quiet_NaN();
                           }};
  dro::PriorFitOptions opts;
  opts.max_entropy = max_entropy;
  const dro::PriorFit fit = dro::prior_from_regularizer(f, cf, xs, p.grid, opts);
  json out = {{"feasible", fit.feasible}, {"lp_iterations", fit.lp_iterations}};
  if (fit.feasible) {
    out["prior"] = dro::to_json(*fit.prior);
    out["residual"] = fit.residual;
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int report_run(const dro::RunRecord& record) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  std::size_t skipped = 0;
  for (const auto& r : record.replications) {
    skipped += r.skipped_bounds;
    if (r.error) std::cerr << "replication n=" << r.n << " #" << r.replication << " failed: " << *r.error << "\n";
    for (const auto& b : r.bounds) {
      auto& t = tally[dro::to_string(b.kind)];
      ++t.first;
      if (!b.holds) ++t.second;
    }
  }
  for (const auto& [kind, t] : tally)
    std::cout << kind << ": " << t.first << " rows, " << t.second << " violations\n";
  if (skipped) std::cout << "skipped (true distribution outside the ball): " << skipped << "\n";
  if (record.failures()) return kInvalid;
  if (record.violations()) {
    std::cerr << "bound violated in " << record.violations() << " rows\n";
    return kViolation;
  }
  return kOk;
}

int cmd_run(const std::string& file, bool dry_run, unsigned jobs, const std::string& output) {
  const dro::ExperimentConfig config = dro::load_config(file);
  dro::RunOptions options;
  options.jobs = jobs;
  if (!output.empty()) setenv(dro::kOutputEnv, output.c_str(), 1);
  if (dry_run) {
    std::cout << dro::describe_plan(config, options);
    return kOk;
  }
  const dro::RunRecord record = dro::run(config, options);
  for (const auto& path : dro::write_outputs(record, dro::output_directory(config)))
    std::cout << "wrote " << path.string() << "\n";
  return report_run(record);
}

int cmd_verify(const std::string& file, unsigned jobs) {
  const dro::ExperimentConfig config = dro::load_config(file);
  dro::RunOptions options;
  options.jobs = jobs;
  options.solve_methods = false;
  return report_run(dro::run(config, options));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust optimization toolkit"};
  app.require_subcommand(1);

  std::string file, a_file, b_file, kind = "wasserstein", orientation = "forward", output;
  double order = 1.0;
  bool dry_run = false, max_entropy = false;
  unsigned jobs = 1;

  auto* solve = app.add_subcommand("solve", "Solve one decision problem and print the solution as JSON");
  solve->add_option("problem", file, "Problem JSON: grid, cost, decision_space, center or samples, method")
      ->required()->check(CLI::ExistingFile);

  auto* measure = app.add_subcommand("measure", "Compute a robustness measure and print the report as JSON");
  measure->add_option("problem", file, "Problem JSON: grid, cost, decision_space, center, measure")
      ->required()->check(CLI::ExistingFile);

  auto* div = app.add_subcommand("divergence", "Print the divergence between two distributions");
  div->add_option("--kind", kind, "wasserstein, kl, chi2 or tv")->capture_default_str();
  div->add_option("--p", order, "Wasserstein order p >= 1")->capture_default_str();
  div->add_option("--orientation", orientation, "phi-divergence orientation: forward or reverse")->capture_default_str();
  div->add_option("a", a_file, "First distribution JSON {atoms, weights[, metric]}")->required()->check(CLI::ExistingFile);
  div->add_option("b", b_file, "Second (reference) distribution JSON")->required()->check(CLI::ExistingFile);

  auto* pfr = app.add_subcommand("prior-from-reg", "Find a prior whose expected cost reproduces a regularizer table");
  pfr->add_option("problem", file, "JSON: grid, cost, decision_space, regularizer table")
      ->required()->check(CLI::ExistingFile);
  pfr->add_flag("--max-entropy", max_entropy, "Pick the maximum-entropy feasible prior");

  auto* verify = app.add_subcommand("verify-bounds", "Evaluate every configured bound; exit 2 if one fails");
  verify->add_option("config", file, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--jobs", jobs, "Worker threads for replications")->capture_default_str();

  auto* runc = app.add_subcommand("run", "Run an experiment and write bounds.csv and run.json");
  runc->add_option("config", file, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  runc->add_flag("--dry-run", dry_run, "Print the resolved plan and write nothing");
  runc->add_option("--jobs", jobs, "Worker threads for replications")->capture_default_str();
  runc->add_option("--output", output, std::string("Output directory (overrides the config and ") + dro::kOutputEnv + ")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*solve) return cmd_solve(file);
    if (*measure) return cmd_measure(file);
    if (*div) return cmd_divergence(kind, order, orientation, a_file, b_file);
    if (*pfr) return cmd_prior_from_reg(file, max_entropy);
    if (*verify) return cmd_verify(file, jobs);
    if (*runc) return cmd_run(file, dry_run, jobs, output);
  } catch (const dro::ConfigError& e) {
    std::cerr << "invalid input at " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
