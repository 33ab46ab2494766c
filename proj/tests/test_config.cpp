#include <gtest/gtest.h>

#include <filesystem>

#include "perctrap/harness/config.hpp"

using namespace perctrap;
using namespace perctrap::harness;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(PERCTRAP_SOURCE_DIR) / "configs";

ConfigError parse_error(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ConfigError("none");
}

}  // namespace

TEST(Config, DefaultsFileMatchesBuiltInDefaults) {
  const RunConfig from_file = load_config((kConfigs / "defaults.yaml").string());
  EXPECT_EQ(canonical_text(from_file), canonical_text(RunConfig{}));
}

TEST(Config, EmptyFileGivesDefaults) {
  EXPECT_EQ(canonical_text(parse_config_string("")), canonical_text(RunConfig{}));
}

TEST(Config, ShippedConfigsParse) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 5u);
}

TEST(Config, ReadsEveryField) {
  const RunConfig cfg = parse_config_string(R"(
run_id: abc
dim: 2
p: 0.2
lambda: 1.5
ell: [0.6, 0.8]
beta: 0.7
cluster_cap: 5000
seed: 123
subcritical_guard: 0.5
max_steps: 1000
max_time: 50.5
replicas: 3
grid_t0: 1
grid_ratio: 3
grid_count: 4
beta_list: [0, 0.5]
estimators: [msd, range]
trap_eps: 0.1
write_trajectories: true
xi: 0.4
theory_samples: 20000
sweep_p: [0.1, 0.2]
sweep_lambda: []
sweep_beta: [1]
sweep_budget: 99
)");
  EXPECT_EQ(cfg.run_id, "abc");
  EXPECT_EQ(cfg.params.dim, 2);
  EXPECT_DOUBLE_EQ(cfg.params.p, 0.2);
  EXPECT_DOUBLE_EQ(cfg.params.lambda, 1.5);
  EXPECT_DOUBLE_EQ(cfg.params.ell[1], 0.8);
  EXPECT_DOUBLE_EQ(cfg.params.beta, 0.7);
  EXPECT_EQ(cfg.params.cluster_cap, 5000u);
  EXPECT_EQ(cfg.params.seed, 123u);
  EXPECT_EQ(cfg.params.guard_override, 0.5);
  EXPECT_EQ(cfg.max_steps, 1000u);
  EXPECT_EQ(cfg.max_time, 50.5);
  EXPECT_EQ(cfg.replicas, 3u);
  EXPECT_EQ(cfg.grid_count, 4u);
  EXPECT_EQ(cfg.beta_list, (std::vector<double>{0, 0.5}));
  EXPECT_EQ(cfg.effective_betas(), (std::vector<double>{0, 0.5}));
  EXPECT_EQ(cfg.estimators, (std::vector<std::string>{"msd", "range"}));
  EXPECT_TRUE(cfg.write_trajectories);
  EXPECT_EQ(cfg.xi, 0.4);
  EXPECT_EQ(cfg.theory_samples, 20000u);
  EXPECT_EQ(cfg.sweep_p, (std::vector<double>{0.1, 0.2}));
  ASSERT_TRUE(cfg.sweep_lambda.has_value());
  EXPECT_TRUE(cfg.sweep_lambda->empty());
  EXPECT_EQ(cfg.sweep_budget, 99u);
}

TEST(Config, UnknownKeyReportsPosition) {
  const auto e = parse_error("p: 0.3\nreplicas: 2\n  \nbogus_key: 1\n");
  EXPECT_EQ(e.line(), 4);
  EXPECT_EQ(e.column(), 1);
  EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("config:4:1"), std::string::npos);
}

TEST(Config, WrongTypeReportsValuePosition) {
  const auto e = parse_error("dim: 1\np: abc\n");
  EXPECT_EQ(e.line(), 2);
  EXPECT_EQ(e.column(), 4);
  const auto list = parse_error("beta_list: 0.5\n");
  EXPECT_EQ(list.line(), 1);
  const auto count = parse_error("replicas: 2.5\n");
  EXPECT_EQ(count.line(), 1);
  EXPECT_EQ(count.column(), 11);
}

TEST(Config, SyntaxErrorReportsLine) {
  const auto e = parse_error("p: 0.3\nell: [1.0, 0.0\nbeta: 1\n");
  EXPECT_GT(e.line(), 1);
}

TEST(Config, UnknownEstimatorRejected) {
  const auto e = parse_error("estimators: [speed, magic]\n");
  EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
}

TEST(Config, InvalidModelParametersRejected) {
  parse_error("p: 1.5\n");
  parse_error("lambda: -1\n");
  parse_error("dim: 4\n");
  parse_error("ell: [0.5]\n");
  parse_error("max_time: ~\nmax_steps: ~\n");
  parse_error("replicas: 0\n");
  parse_error("grid_ratio: 1\n");
  parse_error("beta_list: [0.1, -0.2]\n");
  parse_error("- just\n- a list\n");
}

TEST(Config, HashIgnoresKeyOrderAndSpelling) {
  const auto a = parse_config_string("p: 0.30\nlambda: 1\nreplicas: 4\n");
  const auto b = parse_config_string("replicas: 4\nlambda: 1.0\np: 0.3\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  const auto c = parse_config_string("p: 0.3\nlambda: 1\nreplicas: 5\n");
  EXPECT_NE(config_hash(a), config_hash(c));
  const auto d = parse_config_string("p: 0.3\nlambda: 1\nreplicas: 4\nseed: 43\n");
  EXPECT_NE(config_hash(a), config_hash(d));
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/perctrap.yaml"), ConfigError);
}
