#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dro/experiment.hpp"

using namespace dro;
using nlohmann::json;

namespace {

json smoke() { return read_json_file(std::filesystem::path(DRO_TEST_DATA) / "smoke.json"); }

std::string pointer_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "";
}

std::string message_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool unknown_key(const json& doc) { return message_of(doc).find("unknown key") != std::string::npos; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParsesSmoke) {
  const auto cfg = parse_config(smoke());
  EXPECT_EQ(cfg.grid->size(), 3u);
  EXPECT_EQ(cfg.decisions().size(), 5u);
  EXPECT_EQ(cfg.methods.size(), 6u);
  EXPECT_EQ(cfg.methods[2].method, Method::BayesDP);
  EXPECT_FALSE(cfg.methods[4].epsilon.has_value());
  EXPECT_EQ(*cfg.methods[3].epsilon, 0.1);
  EXPECT_EQ(cfg.n_sweep, (std::vector<std::size_t>{10, 30}));
  EXPECT_EQ(cfg.seed, 7u);
}

TEST(Config, ErrorsCarryPointers) {
  auto doc = smoke();
  doc["methods"][3]["epsilon"] = -0.5;
  EXPECT_EQ(pointer_of(doc), "/methods/3/epsilon");

  doc = smoke();
  doc["replication"] = 2;
  EXPECT_EQ(pointer_of(doc), "/replication");

  doc = smoke();
  doc["true_distribution"] = json::array({0.5, 0.5});
  EXPECT_EQ(pointer_of(doc), "/true_distribution");

  doc = smoke();
  doc["methods"][0]["lambda"] = 1.0;
  EXPECT_EQ(pointer_of(doc), "/methods/0/lambda");

  doc = smoke();
  doc["cost"]["name"] = "hinge";
  EXPECT_EQ(pointer_of(doc), "/cost/name");

  doc = smoke();
  doc.erase("grid");
  EXPECT_EQ(pointer_of(doc), "/grid");
}

TEST(Config, HashIgnoresKeyOrder) {
  const auto a = smoke();
  const json b = json::parse(R"({"seed": 7, "output": "results/smoke", "replications": 3, "n_sweep": [10, 30],
    "methods": [{"name": "saa"}, {"prior": [0.3, 0.4, 0.3], "lambda": 0.5, "name": "reg_saa"},
                {"alpha": 2.0, "name": "bayes_dp"}, {"epsilon": 0.1, "name": "minmax_dro"},
                {"epsilon": "cover", "name": "abs_dro"}, {"delta": 0.0, "name": "satisficing"}],
    "decision_space": {"count": 5, "interval": [0.0, 1.0]}, "cost": {"name": "absolute"},
    "true_distribution": [0.2, 0.5, 0.3], "grid": {"atoms": [0.0, 0.5, 1.0]}})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  auto c = a;
  c["seed"] = 8;
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Run, ReproducibleAndJobIndependent) {
  const auto cfg = parse_config(smoke());
  const auto a = run(cfg);
  RunOptions opts;
  opts.jobs = 3;
  const auto b = run(cfg, opts);
  EXPECT_EQ(a.bounds_csv(), b.bounds_csv());
  EXPECT_EQ(a.replications.size(), 6u);
  EXPECT_EQ(a.failures(), 0u);
  EXPECT_EQ(a.violations(), 0u);
  EXPECT_GT(a.bound_count(), 0u);
  EXPECT_EQ(a.to_json()["config_hash"], config_hash(cfg.document));
}

TEST(Run, WritesOutputsAndHonorsEnvironment) {
  const auto dir = std::filesystem::temp_directory_path() / "dro_experiment_test";
  std::filesystem::remove_all(dir);
  const auto cfg = parse_config(smoke());
  ::setenv(kOutputEnv, dir.c_str(), 1);
  EXPECT_EQ(output_directory(cfg), dir);
  ::unsetenv(kOutputEnv);
  EXPECT_EQ(output_directory(cfg), std::filesystem::path("results/smoke"));

  const auto rec = run(cfg);
  const auto paths = write_outputs(rec, dir);
  ASSERT_EQ(paths.size(), 2u);
  const std::string csv = slurp(dir / "bounds.csv");
  EXPECT_EQ(csv, rec.bounds_csv());
  EXPECT_EQ(csv.rfind(bound_csv_header(), 0), 0u);
  const auto j = json::parse(slurp(dir / "run.json"));
  EXPECT_EQ(j["version"], kVersion);
  std::filesystem::remove_all(dir);
}

TEST(Json, NonFiniteNumbersBecomeStrings) {
  EXPECT_EQ(number(std::numeric_limits<double>::infinity()), json("inf"));
  EXPECT_EQ(number(1.5), json(1.5));
}

TEST(Plan, DescribesTheSweep) {
  const auto cfg = parse_config(smoke());
  const std::string plan = describe_plan(cfg, {});
  EXPECT_NE(plan.find("satisficing"), std::string::npos);
  EXPECT_NE(plan.find("30"), std::string::npos);
}

TEST(Schema, KeySetsMatchTheParser) {
  const auto schema = read_json_file(std::filesystem::path(DRO_SCHEMA_DIR) / "experiment_config.schema.json");
  const auto base = smoke();
  for (const auto& [key, _] : schema["properties"].items()) {
    auto doc = base;
    doc[key] = nullptr;
    EXPECT_FALSE(unknown_key(doc)) << key;
  }
  for (const auto& [key, _] : schema["$defs"]["method"]["properties"].items()) {
    auto doc = base;
    doc["methods"][0][key] = nullptr;
    EXPECT_FALSE(unknown_key(doc)) << key;
  }
  for (const auto& [key, _] : schema["properties"]["cost"]["properties"].items()) {
    auto doc = base;
    doc["cost"][key] = nullptr;
    EXPECT_FALSE(unknown_key(doc)) << key;
  }
  auto doc = base;
  doc["extra"] = 1;
  EXPECT_TRUE(unknown_key(doc));
  doc = base;
  doc["methods"][0]["extra"] = 1;
  EXPECT_TRUE(unknown_key(doc));
  for (const auto& name : builtin_cost_names()) {
    const auto& names = schema["properties"]["cost"]["properties"]["name"]["enum"];
    EXPECT_NE(std::find(names.begin(), names.end(), json(name)), names.end()) << name;
  }
}
