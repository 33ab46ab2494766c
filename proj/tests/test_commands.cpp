#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "perctrap/harness/acceptance.hpp"
#include "perctrap/harness/commands.hpp"

using namespace perctrap;
using namespace perctrap::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "perctrap_test_commands" / name;
  fs::remove_all(dir);
  return dir;
}

CommandOptions quiet(const fs::path& dir, std::size_t workers = 1) {
  CommandOptions o;
  o.out_dir = dir;
  o.workers = workers;
  o.log = nullptr;
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string f; std::getline(in, f, sep);) out.push_back(f);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Moment generating function of the 1-d cluster law by direct summation.
double mgf_series(double p, double beta) {
  double s = 1.0 - p;
  for (int n = 1; n < 2000; ++n) s += n * std::pow(p * std::exp(beta), n) * (1 - p) * (1 - p);
  return s;
}

RunConfig small_1d() {
  return parse_config_string(R"(
p: 0.3
lambda: 1.0
beta: 0.5
max_time: 3000
replicas: 4
grid_t0: 1
grid_ratio: 2
grid_count: 12
estimators: [speed, msd, range, env_histogram, trap_occupation, exponent]
)");
}

#ifdef PERCTRAP_CLI
int run_cli(const std::string& args) {
  const int status = std::system((std::string(PERCTRAP_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST(Theory, BallisticRowMatchesSeries) {
  const auto dir = scratch("theory_ballistic");
  RunConfig cfg = parse_config_string("p: 0.3\nlambda: 1\nbeta: 0.5\n");
  const auto rows = cmd_theory(cfg, quiet(dir));
  ASSERT_EQ(rows.size(), 1u);
  const auto& pr = rows[0].prediction;
  EXPECT_NEAR(pr.mgf, mgf_series(0.3, 0.5), 1e-9);
  EXPECT_NEAR(pr.speed[0], std::tanh(1.0) / mgf_series(0.3, 0.5), 1e-9);
  EXPECT_NEAR(pr.speed[0], 0.46188, 1e-4);
  EXPECT_EQ(pr.escape.regime, Regime::ballistic);

  const auto table = lines(dir / "prediction.csv");
  ASSERT_EQ(table.size(), 2u);
  const auto header = split(table[0]);
  EXPECT_EQ(header, theory_columns());
  const auto row = split(table[1]);
  ASSERT_EQ(row.size(), header.size());
  EXPECT_EQ(row[1], config_hash(cfg));
  EXPECT_EQ(row[17], "ballistic");
}

TEST(Theory, DiffusiveAndSubballisticRows) {
  const auto dir = scratch("theory_regimes");
  const double xi = -std::log(0.3);
  RunConfig cfg = parse_config_string("p: 0.3\nlambda: 0\nbeta: 0\n");
  auto rows = cmd_theory(cfg, quiet(dir));
  EXPECT_EQ(rows[0].prediction.escape.regime, Regime::diffusive);
  EXPECT_DOUBLE_EQ(rows[0].prediction.escape.exponent, 0.5);

  cfg.params.lambda = 1.0;
  cfg.params.beta = 2 * xi;
  rows = cmd_theory(cfg, quiet(dir));
  EXPECT_EQ(rows[0].prediction.escape.regime, Regime::subballistic_drift);
  EXPECT_NEAR(rows[0].prediction.escape.exponent, 0.5, 1e-12);
  EXPECT_EQ(rows[0].prediction.speed[0], 0.0);
  EXPECT_EQ(rows[0].mgf_source, "divergent");
}

TEST(Theory, SweepCrossProduct) {
  const auto dir = scratch("theory_sweep");
  RunConfig cfg = parse_config_string("p: 0.3\nlambda: 1\nsweep_p: [0.2, 0.3]\nsweep_beta: [0.1, 0.5, 3]\n");
  const auto rows = cmd_theory(cfg, quiet(dir));
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_EQ(lines(dir / "prediction.csv").size(), 7u);
  EXPECT_DOUBLE_EQ(rows[5].params.p, 0.3);
  EXPECT_DOUBLE_EQ(rows[5].params.beta, 3.0);
}

TEST(Simulate, RepeatRunsAreByteIdentical) {
  RunConfig cfg = small_1d();
  cfg.write_trajectories = true;
  const auto a = scratch("repeat_a"), b = scratch("repeat_b"), c = scratch("repeat_c");
  cmd_simulate(cfg, quiet(a, 1));
  cmd_simulate(cfg, quiet(b, 1));
  cmd_simulate(cfg, quiet(c, 4));
  for (const auto* name : {"results.csv", "summary.csv", "trajectories/replica0003_beta0.txt"}) {
    const std::string ref = slurp(a / name);
    EXPECT_FALSE(ref.empty()) << name;
    EXPECT_EQ(ref, slurp(b / name)) << name;
    EXPECT_EQ(ref, slurp(c / name)) << name;
  }
}

TEST(Simulate, ResultsSchema) {
  const auto dir = scratch("schema");
  const RunConfig cfg = small_1d();
  const auto out = cmd_simulate(cfg, quiet(dir));
  const auto table = lines(dir / "results.csv");
  ASSERT_EQ(table.size(), out.records.size() + 1);
  EXPECT_EQ(split(table[0]), result_columns());
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto row = split(table[i]);
    ASSERT_EQ(row.size(), result_columns().size()) << table[i];
    EXPECT_EQ(row[1], config_hash(cfg));
    EXPECT_EQ(row[3], "1");
    EXPECT_EQ(row[13], "42/0-3/environment+walk");
  }
  std::set<std::string> estimators;
  for (const auto& r : out.records) estimators.insert(r.estimator);
  EXPECT_EQ(estimators.size(), cfg.estimators.size());

  const auto timing = lines(dir / "timing.csv");
  ASSERT_EQ(timing.size(), 3u);
  EXPECT_EQ(timing[0], "run_id,config_hash,phase,wall_seconds,workers");
}

TEST(Simulate, SummaryMarksTimeTermination) {
  const auto dir = scratch("termination");
  RunConfig cfg = small_1d();
  cfg.max_steps = 50;
  cfg.max_time = 1e9;
  cfg.estimators = {"speed"};
  cfg.grid_t0 = 1;
  cfg.grid_count = 3;
  auto out = cmd_simulate(cfg, quiet(dir));
  for (const auto& s : out.summaries) {
    EXPECT_EQ(s.terminated_by, Termination::steps);
    EXPECT_EQ(s.steps, 50u);
  }
  auto table = lines(dir / "summary.csv");
  ASSERT_EQ(table.size(), 5u);
  EXPECT_EQ(split(table[1])[7], "0");

  cfg.max_steps.reset();
  cfg.max_time = 100;
  out = cmd_simulate(cfg, quiet(dir));
  table = lines(dir / "summary.csv");
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto row = split(table[i]);
    EXPECT_EQ(row[6], "time");
    EXPECT_EQ(row[7], "1");
    EXPECT_EQ(row[9], "42/" + std::to_string(i - 1) + "/environment+walk");
  }
  for (const auto& s : out.summaries) EXPECT_GE(s.final_time, 100.0);
}

TEST(Simulate, SingleReplicaHasNoStandardError) {
  const auto dir = scratch("single");
  RunConfig cfg = small_1d();
  cfg.replicas = 1;
  cfg.estimators = {"speed", "msd"};
  const auto out = cmd_simulate(cfg, quiet(dir));
  for (const auto& r : out.records) EXPECT_FALSE(r.std_error.has_value());
  const auto table = lines(dir / "results.csv");
  for (std::size_t i = 1; i < table.size(); ++i) EXPECT_EQ(split(table[i])[11], "NA");
  EXPECT_EQ(split(table[1])[13], "42/0/environment+walk");
}

TEST(Simulate, TrajectoryFiles) {
  const auto dir = scratch("trajectories");
  RunConfig cfg = small_1d();
  cfg.beta_list = {0.0, 0.5};
  cfg.estimators = {"speed"};
  cfg.write_trajectories = true;
  const auto out = cmd_simulate(cfg, quiet(dir));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "trajectories")) ++files;
  EXPECT_EQ(files, 8u);

  const auto body = lines(dir / "trajectories" / "replica0002_beta1.txt");
  ASSERT_GE(body.size(), 2u);
  EXPECT_EQ(body[0], "# config_hash=" + config_hash(cfg) + " beta=0.5 dim=1 interval=1024");
  // Last line is the final state: step count, clock, position.
  const auto last = split(body.back(), ' ');
  ASSERT_EQ(last.size(), 3u);
  const auto& summary = out.summaries[2 * 2 + 1];
  EXPECT_EQ(std::stoul(last[0]), summary.steps);
  EXPECT_EQ(std::stol(last[2]), summary.final_position[0]);
  // Checkpoints sit on multiples of the interval.
  for (std::size_t i = 1; i + 1 < body.size(); ++i) EXPECT_EQ(std::stoul(split(body[i], ' ')[0]) % 1024, 0u);
}

TEST(Simulate, CoupledBetasOrderExponents) {
  const auto dir = scratch("coupled");
  const double xi = -std::log(0.3);
  RunConfig cfg = parse_config_string(R"(
p: 0.3
lambda: 1.0
max_time: 1.0e6
replicas: 4
grid_t0: 100
grid_ratio: 2
grid_count: 14
estimators: [exponent_limsup]
)");
  cfg.beta_list = {0.0, xi / 2, 2 * xi};
  const auto out = cmd_simulate(cfg, quiet(dir));
  std::vector<double> slopes;
  for (const auto& r : out.records) {
    if (r.component == "slope") slopes.push_back(r.value);
  }
  ASSERT_EQ(slopes.size(), 3u);
  EXPECT_GE(slopes[0], slopes[1]);
  EXPECT_GE(slopes[1], slopes[2]);
  EXPECT_NEAR(slopes[0], 1.0, 0.05);
  EXPECT_LT(slopes[2], 0.65);
}

TEST(Simulate, ReplicaFailureNamesReplica) {
  RunConfig cfg = small_1d();
  cfg.params.p = 0.9;
  cfg.params.cluster_cap = 3;
  cfg.replicas = 3;
  try {
    run_simulation(cfg, 1);
    FAIL() << "expected a replica failure";
  } catch (const ReplicaError& e) {
    EXPECT_LT(e.replica(), 3u);
    EXPECT_EQ(std::string(e.what()).rfind("replica " + std::to_string(e.replica()) + ": ", 0), 0u) << e.what();
  }

  cfg = small_1d();
  cfg.params.p = 0.5;
  cfg.params.beta = 800;
  cfg.replicas = 2;
  EXPECT_THROW(run_simulation(cfg, 1), ReplicaError);
}

TEST(Sweep, BudgetRefusedBeforeRunning) {
  const auto dir = scratch("budget");
  RunConfig cfg = small_1d();
  cfg.sweep_beta = std::vector<double>{0.1, 0.2, 0.3};
  cfg.sweep_budget = 11;
  EXPECT_THROW(cmd_sweep(cfg, quiet(dir)), BudgetExceeded);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Sweep, EmptyRangeGivesHeaderOnly) {
  const auto dir = scratch("empty");
  RunConfig cfg = small_1d();
  cfg.sweep_p = std::vector<double>{};
  EXPECT_TRUE(cmd_sweep(cfg, quiet(dir)).empty());
  const auto table = lines(dir / "sweep.csv");
  ASSERT_EQ(table.size(), 1u);
  auto cols = result_columns();
  cols.push_back("theory_value");
  cols.push_back("regime");
  EXPECT_EQ(split(table[0]), cols);
}

TEST(Sweep, TheoryColumnFollowsPoint) {
  const auto dir = scratch("sweep");
  RunConfig cfg = small_1d();
  cfg.estimators = {"speed"};
  cfg.sweep_beta = std::vector<double>{0.0, 0.5};
  const auto rows = cmd_sweep(cfg, quiet(dir));
  ASSERT_EQ(rows.size(), 2 * cfg.grid_count);
  for (const auto& row : rows) {
    const double expect = std::tanh(1.0) / mgf_series(0.3, row.record.beta);
    EXPECT_NEAR(row.theory_value, expect, 1e-9);
    EXPECT_EQ(row.regime, "ballistic");
  }
  EXPECT_EQ(lines(dir / "sweep.csv").size(), rows.size() + 1);
}

TEST(Acceptance, ScaledMomentFailsSpeedCriterion) {
  AcceptanceOptions opts;
  opts.quick = true;
  opts.only = {5};
  opts.mgf_scale = 1.1;
  opts.scratch = scratch("acceptance_mutation");
  const auto report = run_acceptance(opts);
  ASSERT_EQ(report.results.size(), 1u);
  EXPECT_FALSE(report.results[0].passed);
  EXPECT_FALSE(report.all_passed());
  EXPECT_TRUE(report.smoke);

  opts.mgf_scale = 1.0;
  EXPECT_TRUE(run_acceptance(opts).results[0].passed);
}

#ifdef PERCTRAP_CLI
TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto good = dir / "good.yaml", bad = dir / "bad.yaml", budget = dir / "budget.yaml";
  std::ofstream(good) << "p: 0.3\nlambda: 1\nbeta: 0.5\n";
  std::ofstream(bad) << "p: 0.3\nlambd: 1\n";
  std::ofstream(budget) << "p: 0.3\nreplicas: 10\nsweep_beta: [0.1, 0.2]\nsweep_budget: 5\n";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("theory --config " + good.string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "prediction.csv"));
  EXPECT_EQ(run_cli("theory --config " + bad.string() + out), 2);
  EXPECT_EQ(run_cli("sweep --config " + budget.string() + out), 2);
  EXPECT_NE(run_cli("simulate" + out), 0);
  EXPECT_NE(run_cli("frobnicate"), 0);
}

TEST(Cli, ValidateExitMatchesCsv) {
  const auto dir = scratch("cli_validate");
  const int code = run_cli("validate --quick --workers 1 --out " + dir.string());
  const auto table = lines(dir / "acceptance.csv");
  ASSERT_GE(table.size(), 2u);
  const auto header = split(table[0]);
  const auto col = std::find(header.begin(), header.end(), "passed") - header.begin();
  ASSERT_LT(static_cast<std::size_t>(col), header.size());
  bool all = true;
  for (std::size_t i = 1; i < table.size(); ++i) all = all && split(table[i])[col] == "1";
  EXPECT_EQ(code, all ? 0 : 1);
  EXPECT_EQ(table.size(), 12u);
}
#endif
