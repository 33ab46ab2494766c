// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "perctrap/harness/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"perctrap acceptance suite"};
  perctrap::harness::AcceptanceOptions opts;
  opts.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string csv;
  app.add_flag("--quick", opts.quick, "reduced horizons (smoke run)");
  app.add_option("--workers", opts.workers, "replica worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", opts.only, "criteria to run")->delimiter(',');
  app.add_option("--csv", csv, "also write the report as CSV");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto report = perctrap::harness::run_acceptance(opts, &std::cout);
    if (!csv.empty()) perctrap::harness::write_acceptance_csv(csv, report);
    return report.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
