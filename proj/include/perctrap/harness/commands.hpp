#pragma once

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "perctrap/estimators.hpp"
#include "perctrap/harness/config.hpp"
#include "perctrap/harness/records.hpp"
#include "perctrap/parallel.hpp"
#include "perctrap/theory.hpp"

namespace perctrap::harness {

struct CommandOptions {
  std::filesystem::path out_dir = "out";
  std::size_t workers = 1;
  std::ostream* log = &std::cerr;
};

// A replica that failed, with the index it was run under.
class ReplicaError : public Error {
 public:
  ReplicaError(std::size_t replica, const std::string& msg)
      : Error(fmt::format("replica {}: {}", replica, msg)), replica_(replica) {}
  std::size_t replica() const { return replica_; }

 private:
  std::size_t replica_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void warn(const CommandOptions& opts, const std::vector<std::string>& warnings) {
  if (!opts.log) return;
  for (const auto& w : warnings) *opts.log << "warning: " << w << '\n';
}

struct MeanSe {
  double mean = 0.0;
  std::optional<double> se;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(sq / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

// ---- theory ---------------------------------------------------------------

struct TheoryRow {
  Params params;
  std::string xi_source;  // exact | supplied | estimated
  double xi_std_error = std::numeric_limits<double>::quiet_NaN();
  std::string mgf_source;  // exact | estimated | divergent
  double mgf_std_error = std::numeric_limits<double>::quiet_NaN();
  std::string mgf_flag;
  TheoryPrediction prediction;
};

// Closed forms in d = 1; otherwise xi supplied or fitted and the moment
// sampled, both from cluster samples under the config seed.
inline TheoryRow theory_for(const Params& params, const RunConfig& cfg) {
  TheoryRow row;
  row.params = params;
  if (params.dim == 1) {
    row.xi_source = "exact";
    row.mgf_source = std::isfinite(mgf_1d(params.p, params.beta)) ? "exact" : "divergent";
    row.prediction = predict_1d(params);
    return row;
  }
  Params sampling = params;
  sampling.seed = rng::derive_seed(params.seed, 0, "theory");
  const auto samples = sample_cluster_sizes(sampling, cfg.theory_samples);
  double xi = 0.0;
  if (cfg.xi) {
    xi = *cfg.xi;
    row.xi_source = "supplied";
  } else {
    const auto fit = estimate_xi(samples);
    xi = fit.xi;
    row.xi_std_error = fit.std_error;
    row.xi_source = "estimated";
  }
  double mgf = kInfinity;
  if (params.beta < xi) {
    const auto est = mgf_monte_carlo(samples, params.beta, HeavyTailGuard{xi, 0.1});
    mgf = est.value;
    row.mgf_std_error = est.std_error;
    row.mgf_flag = est.reason;
    row.mgf_source = "estimated";
  } else {
    row.mgf_source = "divergent";
  }
  row.prediction = predict(params, xi, mgf, false);
  return row;
}

inline std::vector<Params> sweep_points(const RunConfig& cfg) {
  const Params& base = cfg.params;
  const auto ps = cfg.sweep_p.value_or(std::vector<double>{base.p});
  const auto lambdas = cfg.sweep_lambda.value_or(std::vector<double>{base.lambda});
  const auto betas = cfg.sweep_beta.value_or(std::vector<double>{base.beta});
  std::vector<Params> out;
  for (double p : ps) {
    for (double l : lambdas) {
      for (double b : betas) {
        Params point = base;
        point.p = p;
        point.lambda = l;
        point.beta = b;
        out.push_back(point);
      }
    }
  }
  return out;
}

inline const std::vector<std::string>& theory_columns() {
  static const std::vector<std::string> cols{
      "run_id", "config_hash", "d",          "p",           "lambda",          "beta",
      "xi",     "xi_source",   "xi_stderr",  "mgf",         "mgf_source",      "mgf_stderr",
      "mgf_flag", "drift",     "speed",      "sigma_diag",  "escape_exponent", "regime",
      "exponent_tag", "boundary"};
  return cols;
}

inline std::vector<std::string> theory_fields(const TheoryRow& row, const RunConfig& cfg, const std::string& hash) {
  const auto& pr = row.prediction;
  std::string sigma = "NA";
  if (pr.diffusion) sigma = num((*pr.diffusion)(0, 0));
  return {cfg.run_id,
          hash,
          std::to_string(row.params.dim),
          num(row.params.p),
          num(row.params.lambda),
          num(row.params.beta),
          num(pr.xi),
          row.xi_source,
          num(row.xi_std_error),
          num(pr.mgf),
          row.mgf_source,
          num(row.mgf_std_error),
          row.mgf_flag,
          join(pr.drift),
          join(pr.speed),
          sigma,
          num(pr.escape.exponent),
          std::string(to_string(pr.escape.regime)),
          std::string(to_string(pr.escape.tag)),
          pr.boundary ? "1" : "0"};
}

inline std::vector<TheoryRow> cmd_theory(const RunConfig& cfg, const CommandOptions& opts) {
  const std::string hash = config_hash(cfg);
  std::filesystem::create_directories(opts.out_dir);
  CsvWriter out(opts.out_dir / "prediction.csv", theory_columns());
  std::vector<TheoryRow> rows;
  for (const Params& point : sweep_points(cfg)) {
    detail::warn(opts, validate(point));
    rows.push_back(theory_for(point, cfg));
    out.row(theory_fields(rows.back(), cfg, hash));
  }
  return rows;
}

// ---- simulate -------------------------------------------------------------

struct ReplicaSummary {
  std::size_t replica = 0;
  double beta = 0.0;
  std::size_t steps = 0;
  double final_time = 0.0;
  Termination terminated_by = Termination::steps;
  Site final_position;
};

struct SimulationOutput {
  std::vector<ResultRecord> records;
  std::vector<ReplicaSummary> summaries;
  double simulate_seconds = 0.0;
  double estimate_seconds = 0.0;
};

// Environment and walk seeds for replica i under a master seed.
inline std::uint64_t walk_seed(std::uint64_t master, std::size_t replica) {
  return rng::derive_seed(master, replica, "walk");
}

inline Horizon horizon_of(const RunConfig& cfg) { return Horizon{cfg.max_steps, cfg.max_time}; }

// Replica i walks in the environment seeded environment_seed(master, i) with
// walk streams from walk_seed(master, i).
inline std::vector<CoupledTrajectorySet> simulate_replicas(const Params& params, const std::vector<double>& betas,
                                                           const Horizon& horizon, std::size_t replicas,
                                                           std::size_t workers,
                                                           const TrajectoryOptions& options = {1024, 128}) {
  std::vector<std::optional<CoupledTrajectorySet>> slots(replicas);
  parallel_for(replicas, workers, [&](std::size_t i) {
    try {
      Params p = params;
      p.seed = environment_seed(params.seed, i);
      auto env = make_environment(p);
      slots[i].emplace(simulate_coupled(env, build_kernel(p), betas, horizon, walk_seed(params.seed, i), options));
    } catch (const Error& e) {
      throw ReplicaError(i, e.what());
    }
  });
  std::vector<CoupledTrajectorySet> out;
  out.reserve(replicas);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace detail {

class RecordSink {
 public:
  RecordSink(const RunConfig& cfg, const Params& params, double beta, std::size_t replicas, std::string hash,
             std::vector<ResultRecord>& out)
      : cfg_(cfg), params_(params), beta_(beta), replicas_(replicas), hash_(std::move(hash)), out_(out) {}

  void add(const std::string& estimator, double t, const std::string& component, double value,
           std::optional<double> se) {
    ResultRecord r;
    r.run_id = cfg_.run_id;
    r.config_hash = hash_;
    r.estimator = estimator;
    r.dim = params_.dim;
    r.p = params_.p;
    r.lambda = params_.lambda;
    r.beta = beta_;
    r.t = t;
    r.component = component;
    r.value = value;
    r.std_error = replicas_ > 1 ? se : std::nullopt;
    r.replicas = replicas_;
    r.seed_path = seed_path(params_.seed, replicas_, "environment+walk");
    out_.push_back(std::move(r));
  }

  void add(const std::string& estimator, double t, const std::string& component, const std::vector<double>& xs) {
    const MeanSe m = mean_se(xs);
    add(estimator, t, component, m.mean, m.se);
  }

 private:
  const RunConfig& cfg_;
  const Params& params_;
  double beta_;
  std::size_t replicas_;
  std::string hash_;
  std::vector<ResultRecord>& out_;
};

inline std::string axis_name(const char* prefix, int k) { return fmt::format("{}{}", prefix, k + 1); }

inline void run_estimators(const RunConfig& cfg, const Params& params, double beta,
                           std::span<const Trajectory> reps, RecordSink& sink) {
  const TimeGrid grid{cfg.grid_t0, cfg.grid_ratio, cfg.grid_count};
  const auto times = grid.times();
  const int dim = params.dim;
  const std::size_t m = reps.size();
  for (const auto& name : cfg.estimators) {
    if (name == "speed") {
      for (double t : times) {
        std::vector<std::vector<double>> comp(dim, std::vector<double>(m));
        for (std::size_t r = 0; r < m; ++r) {
          const Site y = reps[r].position_at(t);
          for (int k = 0; k < dim; ++k) comp[k][r] = y[k] / t;
        }
        for (int k = 0; k < dim; ++k) sink.add(name, t, axis_name("v", k), comp[k]);
      }
    } else if (name == "exponent" || name == "exponent_limsup") {
      ExponentFitOptions opts;
      opts.use_running_max = name == "exponent_limsup";
      const auto fit = estimate_escape_exponent(reps, grid, opts);
      const std::optional<double> se =
          std::isfinite(fit.slope_std_error) ? std::optional(fit.slope_std_error) : std::nullopt;
      sink.add(name, fit.window_hi, "slope", fit.slope, se);
      sink.add(name, fit.window_hi, "intercept", fit.intercept, std::nullopt);
      sink.add(name, fit.window_hi, "window_lo", fit.window_lo, std::nullopt);
    } else if (name == "msd") {
      for (double t : times) {
        std::vector<double> r2(m), jumps(m);
        std::vector<std::vector<double>> mom(static_cast<std::size_t>(dim * dim), std::vector<double>(m));
        for (std::size_t r = 0; r < m; ++r) {
          const std::size_t n = reps[r].clock_inverse(t);
          const Site y = reps[r].position(n);
          double s = 0.0;
          for (int i = 0; i < dim; ++i) {
            s += static_cast<double>(y[i]) * y[i];
            for (int j = 0; j < dim; ++j) mom[i * dim + j][r] = static_cast<double>(y[i]) * y[j] / t;
          }
          r2[r] = s / t;
          jumps[r] = static_cast<double>(n) / t;
        }
        sink.add(name, t, "msd_over_t", r2);
        sink.add(name, t, "jumps_over_t", jumps);
        for (int i = 0; i < dim; ++i) {
          for (int j = 0; j < dim; ++j) sink.add(name, t, fmt::format("m{}{}", i + 1, j + 1), mom[i * dim + j]);
        }
      }
    } else if (name == "env_histogram") {
      const double t = grid.last();
      std::vector<std::vector<double>> hs;
      for (const auto& traj : reps) hs.push_back(env_histogram(traj, t));
      const auto agg = aggregate_histograms(hs);
      for (std::size_t c = 0; c < agg.mean.size(); ++c) {
        sink.add(name, t, fmt::format("c{}", c), agg.mean[c], agg.std_error[c]);
      }
    } else if (name == "range") {
      for (double t : times) {
        std::vector<double> range(m), local(m);
        for (std::size_t r = 0; r < m; ++r) {
          const auto stats = range_and_localtime(reps[r], reps[r].clock_inverse(t));
          range[r] = static_cast<double>(stats.range);
          local[r] = static_cast<double>(stats.max_local_time);
        }
        sink.add(name, t, "range", range);
        sink.add(name, t, "max_local_time", local);
      }
    } else if (name == "trap_occupation") {
      if (!(beta > 0.0)) continue;  // undefined without trapping
      const double t = grid.last();
      std::vector<double> frac(m);
      for (std::size_t r = 0; r < m; ++r) frac[r] = trap_occupation_fraction(reps[r], t, cfg.trap_eps);
      sink.add(name, t, "fraction", frac);
    }
  }
}

}  // namespace detail

// Runs every replica of one parameter point and evaluates the configured
// estimators, per beta of the coupled list. Output order never depends on the
// worker count.
inline SimulationOutput run_simulation(const RunConfig& cfg, std::size_t workers,
                                       const std::optional<std::filesystem::path>& trajectory_dir = std::nullopt) {
  const Params& params = cfg.params;
  const auto betas = cfg.effective_betas();
  const std::string hash = config_hash(cfg);
  const Horizon horizon = horizon_of(cfg);
  const std::size_t replicas = cfg.replicas;

  SimulationOutput out;
  auto start = std::chrono::steady_clock::now();
  auto sets = simulate_replicas(params, betas, horizon, replicas, workers);
  out.simulate_seconds = detail::seconds_since(start);

  if (trajectory_dir) {
    std::filesystem::create_directories(*trajectory_dir);
    for (std::size_t i = 0; i < replicas; ++i) {
      for (std::size_t b = 0; b < betas.size(); ++b) {
        std::ofstream f(*trajectory_dir / fmt::format("replica{:04d}_beta{}.txt", i, b), std::ios::binary);
        write_checkpoint_stream(sets[i].members[b], f, hash);
      }
    }
  }

  for (std::size_t i = 0; i < replicas; ++i) {
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const Trajectory& traj = sets[i].members[b];
      out.summaries.push_back({i, betas[b], traj.steps(), traj.final_time(), traj.terminated_by(),
                               traj.final_position()});
    }
  }

  start = std::chrono::steady_clock::now();
  for (std::size_t b = 0; b < betas.size(); ++b) {
    std::vector<Trajectory> reps;
    reps.reserve(replicas);
    for (auto& s : sets) reps.push_back(std::move(s.members[b]));
    detail::RecordSink sink(cfg, params, betas[b], replicas, hash, out.records);
    detail::run_estimators(cfg, params, betas[b], reps, sink);
  }
  out.estimate_seconds = detail::seconds_since(start);
  return out;
}

inline void write_results(const std::filesystem::path& path, const std::vector<ResultRecord>& records) {
  CsvWriter out(path, result_columns());
  for (const auto& r : records) out.row(result_fields(r));
}

inline void write_summary(const std::filesystem::path& path, const RunConfig& cfg, const std::string& hash,
                          const Params& params, const std::vector<ReplicaSummary>& rows) {
  CsvWriter out(path, {"run_id", "config_hash", "replica", "beta", "steps", "final_time", "terminated_by",
                       "time_terminated", "final_position", "seed_path"});
  for (const auto& s : rows) {
    std::vector<double> pos;
    for (int k = 0; k < params.dim; ++k) pos.push_back(s.final_position[k]);
    out.row({cfg.run_id, hash, std::to_string(s.replica), num(s.beta), std::to_string(s.steps), num(s.final_time),
             s.terminated_by == Termination::time ? "time" : "steps",
             s.terminated_by == Termination::time ? "1" : "0", join(pos),
             fmt::format("{}/{}/environment+walk", params.seed, s.replica)});
  }
}

inline void write_timing(const std::filesystem::path& path, const RunConfig& cfg, const std::string& hash,
                         const std::vector<std::pair<std::string, double>>& phases, std::size_t workers) {
  CsvWriter out(path, {"run_id", "config_hash", "phase", "wall_seconds", "workers"});
  for (const auto& [phase, secs] : phases) {
    out.row({cfg.run_id, hash, phase, fmt::format("{:.6f}", secs), std::to_string(workers)});
  }
}

inline SimulationOutput cmd_simulate(const RunConfig& cfg, const CommandOptions& opts) {
  detail::warn(opts, validate(cfg.params));
  const std::string hash = config_hash(cfg);
  std::filesystem::create_directories(opts.out_dir);
  std::optional<std::filesystem::path> traj_dir;
  if (cfg.write_trajectories) traj_dir = opts.out_dir / "trajectories";
  SimulationOutput out = run_simulation(cfg, opts.workers, traj_dir);
  write_results(opts.out_dir / "results.csv", out.records);
  write_summary(opts.out_dir / "summary.csv", cfg, hash, cfg.params, out.summaries);
  write_timing(opts.out_dir / "timing.csv", cfg, hash,
               {{"simulate", out.simulate_seconds}, {"estimate", out.estimate_seconds}}, opts.workers);
  return out;
}

// ---- sweep ----------------------------------------------------------------

struct SweepRow {
  ResultRecord record;
  double theory_value = std::numeric_limits<double>::quiet_NaN();
  std::string regime;
};

namespace detail {

// Theory counterpart of a result record, NaN when there is none.
inline double theory_value(const ResultRecord& r, const TheoryPrediction& pr, double lambda) {
  if (r.estimator == "speed" && r.component.size() > 1 && r.component[0] == 'v') {
    const std::size_t k = std::stoul(r.component.substr(1)) - 1;
    return k < pr.speed.size() ? pr.speed[k] : std::numeric_limits<double>::quiet_NaN();
  }
  if ((r.estimator == "exponent" || r.estimator == "exponent_limsup") && r.component == "slope") {
    return pr.escape.exponent;
  }
  if (r.estimator == "msd" && lambda == 0.0 && (r.component == "msd_over_t" || r.component == "jumps_over_t")) {
    return std::isfinite(pr.mgf) ? 1.0 / pr.mgf : 0.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, const CommandOptions& opts) {
  const auto points = sweep_points(cfg);
  const std::size_t betas = cfg.sweep_beta ? 1 : cfg.effective_betas().size();
  const std::size_t cost = points.size() * cfg.replicas * betas;
  if (cost > cfg.sweep_budget) {
    throw BudgetExceeded(fmt::format("sweep needs {} replica runs ({} points x {} replicas x {} betas), budget is {}",
                                     cost, points.size(), cfg.replicas, betas, cfg.sweep_budget));
  }
  for (const auto& point : points) detail::warn(opts, validate(point));

  const std::string hash = config_hash(cfg);
  std::filesystem::create_directories(opts.out_dir);
  auto cols = result_columns();
  cols.push_back("theory_value");
  cols.push_back("regime");
  CsvWriter out(opts.out_dir / "sweep.csv", cols);

  // Every point reuses the master seed, so points share environments and
  // walk streams (common random numbers).
  std::vector<SweepRow> rows;
  double simulate_secs = 0.0, estimate_secs = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& point : points) {
    RunConfig point_cfg = cfg;
    point_cfg.params = point;
    if (cfg.sweep_beta) point_cfg.beta_list.clear();
    std::vector<std::pair<double, TheoryPrediction>> theory;
    for (double b : point_cfg.effective_betas()) {
      Params coupled = point;
      coupled.beta = b;
      theory.emplace_back(b, theory_for(coupled, point_cfg).prediction);
    }
    SimulationOutput sim = run_simulation(point_cfg, opts.workers);
    simulate_secs += sim.simulate_seconds;
    estimate_secs += sim.estimate_seconds;
    for (auto& rec : sim.records) {
      rec.config_hash = hash;
      SweepRow row{rec, std::numeric_limits<double>::quiet_NaN(), ""};
      for (const auto& [b, pr] : theory) {
        if (b != rec.beta) continue;
        row.theory_value = detail::theory_value(rec, pr, point.lambda);
        row.regime = std::string(to_string(pr.escape.regime));
      }
      auto fields = result_fields(row.record);
      fields.push_back(num(row.theory_value));
      fields.push_back(row.regime);
      out.row(fields);
      rows.push_back(std::move(row));
    }
  }
  write_timing(opts.out_dir / "timing.csv", cfg, hash,
               {{"simulate", simulate_secs}, {"estimate", estimate_secs}, {"total", detail::seconds_since(start)}},
               opts.workers);
  return rows;
}

}  // namespace perctrap::harness
