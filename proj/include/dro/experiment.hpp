#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dro/bayes.hpp"
#include "dro/cost.hpp"
#include "dro/divergence.hpp"
#include "dro/genbound.hpp"
#include "dro/robustness.hpp"
#include "dro/solver.hpp"

namespace dro {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputEnv = "DRO_OUTPUT_DIR";

/// Validation failure located by a JSON pointer into the offending document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct CostSpec {
  std::string name;
  CostParams params;
  std::vector<std::vector<double>> table;
  double lipschitz_scale = 1.0;
};

struct MethodSpec {
  Method method = Method::SAA;
  std::string label;
  std::optional<double> epsilon;  // empty: cover radius Delta(P0, Pbar)
  DivergenceKind divergence = DivergenceKind::wasserstein(1.0);
  double alpha = 1.0;
  std::optional<double> beta;
  double lambda = 0.0;
  double delta = 0.0;
  Sided sided = Sided::Two;
  std::optional<std::vector<double>> prior;  // bayes_dp prior / reg_saa prior regularizer weights
  bool squared_norm_regularizer = false;
};

struct ExperimentConfig {
  nlohmann::json document;
  GridPtr grid;
  std::optional<DiscreteDistribution> truth;
  CostSpec cost;
  std::optional<DecisionSpace> space;
  std::vector<MethodSpec> methods;
  std::vector<std::string> bounds;
  std::optional<double> bound_epsilon;  // empty: cover radius
  DivergenceKind relative_divergence = DivergenceKind::wasserstein(1.0);
  std::vector<std::size_t> n_sweep;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::string output = "results";

  CostFunction cost_function() const;
  const DiscreteDistribution& p0() const { return *truth; }
  const DecisionSpace& decisions() const { return *space; }
};

/// Throws ConfigError with a JSON pointer on any violation; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// FNV-1a 64 over the canonical (sorted-key, compact) serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& document);

// Shared pieces of the problem documents read by the CLI.
GridPtr parse_grid(const nlohmann::json& j, const std::string& pointer);
DiscreteDistribution parse_weights(const nlohmann::json& j, const GridPtr& grid, const std::string& pointer);
DecisionSpace parse_decision_space(const nlohmann::json& j, const std::string& pointer);
CostSpec parse_cost(const nlohmann::json& j, const std::string& pointer);
CostFunction build_cost(const CostSpec& spec, const SupportGrid& grid, const DecisionSpace& space);
MethodSpec parse_method_spec(const nlohmann::json& j, const std::string& pointer);
DivergenceKind parse_divergence(const nlohmann::json& j, const std::string& pointer);
/// {"atoms": [...], "weights": [...], "metric"?: [[...]]}.
DiscreteDistribution parse_distribution(const nlohmann::json& j, const std::string& pointer);

nlohmann::json to_json(const DiscreteDistribution& d);
nlohmann::json to_json(const Solution& s);
nlohmann::json to_json(const RobustnessReport& r);
nlohmann::json to_json(const GapRecord& g);
nlohmann::json to_json(const BoundRecord& b);
/// Finite numbers as numbers, others as "inf" / "-inf" / "nan".
nlohmann::json number(double v);

/// Solves one method on a nominal distribution built from `data`.
Solution run_method(const MethodSpec& spec, const DiscreteDistribution& truth, const SampleSet& data,
                    const CostFunction& cf, const DecisionSpace& space);

struct ReplicationResult {
  std::size_t n = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Solution>> solutions;
  std::vector<std::pair<std::string, GapRecord>> gaps;
  std::vector<BoundRecord> bounds;
  std::size_t skipped_bounds = 0;  // hypothesis P0 in the ball failed
  std::optional<std::string> error;
};

struct RunRecord {
  std::string config_hash;
  std::string version;
  std::string rng;
  double wall_seconds = 0.0;
  std::vector<ReplicationResult> replications;

  std::size_t bound_count() const;
  std::size_t violations() const;
  std::size_t failures() const;
  nlohmann::json to_json() const;
  std::string bounds_csv() const;
};

struct RunOptions {
  unsigned jobs = 1;
  bool solve_methods = true;
  bool compute_bounds = true;
};

RunRecord run(const ExperimentConfig& config, const RunOptions& options = {});

/// Output directory: the environment override if set, else the config's `output`.
std::filesystem::path output_directory(const ExperimentConfig& config);
/// Writes bounds.csv and run.json; returns the paths written.
std::vector<std::filesystem::path> write_outputs(const RunRecord& record, const std::filesystem::path& dir);

/// Human-readable resolved plan for --dry-run.
std::string describe_plan(const ExperimentConfig& config, const RunOptions& options);

}  // namespace dro
