// perctrap: theory tables, simulations, sweeps and the acceptance suite.
//
// Exit codes: 0 success, 1 acceptance failure, 2 config error, 3 runtime error.
#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "perctrap/harness/acceptance.hpp"
#include "perctrap/harness/commands.hpp"
#include "perctrap/harness/config.hpp"

namespace {

namespace h = perctrap::harness;

enum Exit { kOk = 0, kValidationFailed = 1, kConfigError = 2, kRuntimeError = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biased random walk among percolation traps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool quick = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "YAML run config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "replica worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto* theory = app.add_subcommand("theory", "predicted drift, moment, speed, diffusion and escape exponent");
  add_common(theory, true);
  auto* simulate = app.add_subcommand("simulate", "simulate replicas and run the configured estimators");
  add_common(simulate, true);
  auto* sweep = app.add_subcommand("sweep", "simulate the cross product of the sweep ranges");
  add_common(sweep, true);
  auto* validate = app.add_subcommand("validate", "run the acceptance suite");
  add_common(validate, false);
  validate->add_flag("--quick", quick, "reduced horizons, reported as smoke");

  CLI11_PARSE(app, argc, argv);

  h::CommandOptions opts;
  opts.out_dir = out_dir;
  opts.workers = workers;

  try {
    if (validate->parsed()) {
      h::AcceptanceOptions acc;
      acc.quick = quick;
      acc.workers = workers;
      acc.scratch = std::filesystem::path(out_dir) / "determinism_scratch";
      const auto report = h::run_acceptance(acc, &std::cout);
      std::filesystem::create_directories(out_dir);
      h::write_acceptance_csv(std::filesystem::path(out_dir) / "acceptance.csv", report);
      return report.all_passed() ? kOk : kValidationFailed;
    }

    const h::RunConfig cfg = h::load_config(config_path);
    if (theory->parsed()) {
      const auto rows = h::cmd_theory(cfg, opts);
      std::cout << rows.size() << " prediction rows written to " << (opts.out_dir / "prediction.csv").string() << '\n';
    } else if (simulate->parsed()) {
      const auto out = h::cmd_simulate(cfg, opts);
      std::size_t time_terminated = 0;
      for (const auto& s : out.summaries) time_terminated += s.terminated_by == perctrap::Termination::time;
      std::cout << out.records.size() << " result records, " << out.summaries.size() << " walks ("
                << time_terminated << " time-terminated) written to " << opts.out_dir.string() << '\n';
    } else if (sweep->parsed()) {
      const auto rows = h::cmd_sweep(cfg, opts);
      std::cout << rows.size() << " sweep rows written to " << (opts.out_dir / "sweep.csv").string() << '\n';
    }
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const h::BudgetExceeded& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const perctrap::InvalidParams& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
