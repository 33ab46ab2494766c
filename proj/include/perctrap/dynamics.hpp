#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perctrap/environment.hpp"
#include "perctrap/errors.hpp"
#include "perctrap/lattice.hpp"
#include "perctrap/params.hpp"
#include "perctrap/random.hpp"

namespace perctrap {

// Transition law of the skeleton walk: p_e proportional to exp(lambda ell.e).
struct SkeletonKernel {
  int dim = 1;
  double lambda = 0.0;
  std::array<double, kMaxDim> ell{1.0, 0.0, 0.0};
  std::array<double, 2 * kMaxDim> prob{};
  std::array<double, 2 * kMaxDim> cumulative{};
  // log K with K = 1 / sum_e exp(lambda ell.e).
  double log_normalizer = 0.0;

  double normalizer() const { return std::exp(log_normalizer); }
  double probability(Direction e) const { return prob[e.index]; }

  Direction sample(double u) const {
    const int n = direction_count(dim);
    for (int j = 0; j < n - 1; ++j) {
      if (u < cumulative[j]) return Direction{j};
    }
    return Direction{n - 1};
  }
};

inline SkeletonKernel build_kernel(double lambda, const std::array<double, kMaxDim>& ell, int dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidParams("kernel dimension must be 1, 2 or 3");
  double norm = 0.0;
  for (int k = 0; k < dim; ++k) norm += ell[k] * ell[k];
  if (std::abs(std::sqrt(norm) - 1.0) > 1e-12) throw InvalidParams("ell must be a unit vector");

  SkeletonKernel kernel;
  kernel.dim = dim;
  kernel.lambda = lambda;
  kernel.ell = ell;
  const int n = direction_count(dim);
  std::array<double, 2 * kMaxDim> exponent{};
  double top = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    exponent[j] = lambda * dot(ell, Direction{j});
    top = std::max(top, exponent[j]);
  }
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += std::exp(exponent[j] - top);
  double running = 0.0;
  for (int j = 0; j < n; ++j) {
    kernel.prob[j] = std::exp(exponent[j] - top) / total;
    running += kernel.prob[j];
    kernel.cumulative[j] = running;
  }
  kernel.cumulative[n - 1] = 1.0;
  kernel.log_normalizer = -(top + std::log(total));
  return kernel;
}

inline SkeletonKernel build_kernel(const Params& params) {
  return build_kernel(params.lambda, params.ell, params.dim);
}

// log of the jump rate x -> x+e: log K + lambda ell.e - beta C_x.
template <class Field>
double log_jump_rate(const BasicEnvironment<Field>& env, const SkeletonKernel& kernel,
                     const Site& x, Direction e) {
  const Params& params = env.params();
  return kernel.log_normalizer + params.lambda * dot(params.ell, e) -
         params.beta * static_cast<double>(env.cluster_size(x));
}

template <class Field>
double jump_rate(const BasicEnvironment<Field>& env, const Params& params, const Site& x, Direction e) {
  return std::exp(log_jump_rate(env, build_kernel(params), x, e));
}

// Kahan-compensated running sum; the clock S_n is `sum`.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double value) {
    const double y = value - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

inline constexpr double kMaxClockValue = 1e300;

// Holding time eps * exp(beta C), rejected above 1e300.
inline double holding_time(double exponential, double beta, std::uint32_t cluster) {
  const double log_scale = beta * static_cast<double>(cluster);
  if (log_scale > 680.0 && log_scale + std::log(exponential) > std::log(kMaxClockValue)) {
    throw HorizonOverflow("holding time exp(beta C) overflows at cluster size " +
                          std::to_string(cluster));
  }
  return exponential * std::exp(log_scale);
}

// Independent substreams of one walk: skeleton directions and holding exponentials.
struct WalkStreams {
  std::uint64_t skeleton = 0;
  std::uint64_t holding = 0;

  static WalkStreams from_seed(std::uint64_t rng_seed) {
    return {rng::derive_seed(rng_seed, 0, "skeleton"), rng::derive_seed(rng_seed, 0, "holding")};
  }

  double skeleton_uniform(std::size_t n) const { return rng::to_unit(rng::hash(skeleton, n)); }
  double exponential(std::size_t n) const { return rng::exponential(rng::hash(holding, n)); }
};

struct Horizon {
  std::optional<std::size_t> max_steps;
  std::optional<double> max_time;

  static Horizon steps(std::size_t n) { return {n, std::nullopt}; }
  static Horizon time(double t) { return {std::nullopt, t}; }
  static Horizon steps_and_time(std::size_t n, double t) { return {n, t}; }

  void check() const {
    if (!max_steps && !max_time) throw InvalidParams("horizon needs max_steps or max_time");
    if (max_steps && *max_steps == 0) throw InvalidParams("max_steps must be positive");
    if (max_time && !(*max_time > 0.0)) throw InvalidParams("max_time must be positive");
  }
};

enum class Termination : std::uint8_t { steps, time };

struct TrajectoryOptions {
  std::size_t checkpoint_interval = 1024;
  std::size_t ring_capacity = 1024;
};

// Full state of step n: position X_n, clock S_n, and (for n below the final
// step) the cluster size, exponential and holding time spent at X_n.
struct StepRecord {
  std::size_t n = 0;
  Site x{};
  double time = 0.0;
  std::uint32_t cluster = 0;
  double exponential = std::numeric_limits<double>::quiet_NaN();
  double holding = std::numeric_limits<double>::quiet_NaN();
};

struct Checkpoint {
  std::size_t n = 0;
  Site x{};
  CompensatedSum clock{};
};

using ClusterLookup = std::function<std::uint32_t(const Site&)>;

// Skeleton path X_n and jump times S_n of one walk. Only every k-th state and
// a ring of the most recent steps are kept; anything else is rebuilt by
// replaying the counter-based streams from the nearest checkpoint.
class Trajectory {
 public:
  Trajectory(int dim, double beta, SkeletonKernel kernel, WalkStreams streams, ClusterLookup lookup,
             TrajectoryOptions options)
      : dim_(dim),
        beta_(beta),
        kernel_(kernel),
        streams_(streams),
        lookup_(std::move(lookup)),
        options_(options) {
    if (options_.checkpoint_interval == 0) throw InvalidParams("checkpoint interval must be positive");
    ring_.reserve(options_.ring_capacity);
    checkpoints_.push_back(Checkpoint{});
  }

  int dim() const { return dim_; }
  double beta() const { return beta_; }
  const SkeletonKernel& kernel() const { return kernel_; }
  const WalkStreams& streams() const { return streams_; }
  const TrajectoryOptions& options() const { return options_; }

  std::size_t steps() const { return final_.n; }
  double final_time() const { return final_.clock.sum; }
  const Site& final_position() const { return final_.x; }
  Termination terminated_by() const { return terminated_by_; }
  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }
  const Checkpoint& final_state() const { return final_; }

  // Recent steps, oldest first. Each carries its holding time.
  std::vector<StepRecord> recent_steps() const {
    std::vector<StepRecord> out;
    out.reserve(ring_.size());
    for (std::size_t i = 0; i < ring_.size(); ++i) out.push_back(ring_at(i));
    return out;
  }

  double time_at(std::size_t n) const { return state_at(n).time; }
  Site position(std::size_t n) const { return state_at(n).x; }

  StepRecord state_at(std::size_t n) const {
    if (n > steps()) throw OutOfHorizon("step " + std::to_string(n) + " beyond recorded " +
                                        std::to_string(steps()));
    if (n == steps()) return final_record();
    if (!ring_.empty() && n >= ring_at(0).n) return ring_at(n - ring_at(0).n);
    StepRecord found;
    replay(n, n, [&](const StepRecord& r) { found = r; });
    return found;
  }

  // Unique n with S_n <= t < S_{n+1}.
  std::size_t clock_inverse(double t) const {
    if (!(t >= 0.0) || !(t < final_time())) {
      throw OutOfHorizon("time " + std::to_string(t) + " outside simulated range [0, " +
                         std::to_string(final_time()) + ")");
    }
    if (!ring_.empty() && t >= ring_at(0).time) {
      std::size_t lo = 0, hi = ring_.size();  // last index with time <= t
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (ring_at(mid).time <= t) lo = mid; else hi = mid;
      }
      return ring_at(lo).n;
    }
    auto it = std::upper_bound(checkpoints_.begin(), checkpoints_.end(), t,
                               [](double value, const Checkpoint& c) { return value < c.clock.sum; });
    const Checkpoint& start = *std::prev(it);
    WalkState state{start.n, start.x, start.clock};
    for (;;) {
      const StepRecord rec = advance(state);
      if (state.clock.sum > t) return rec.n;
    }
  }

  Site position_at(double t) const { return position(clock_inverse(t)); }

  // Visits steps first..last (inclusive) in order. The record of the final
  // step has no holding time.
  template <class Visitor>
  void for_each_step(std::size_t first, std::size_t last, Visitor&& visit) const {
    if (last > steps()) throw OutOfHorizon("step range beyond recorded trajectory");
    if (first > last) return;
    if (first < steps()) {
      const std::size_t stop = std::min(last, steps() - 1);
      // Steps still in the ring are visited from it; older ones are replayed.
      const std::size_t ring_start = ring_.empty() ? steps() : ring_at(0).n;
      if (first < ring_start) replay(first, std::min(stop, ring_start - 1), visit);
      for (std::size_t n = std::max(first, ring_start); n <= stop; ++n) visit(ring_at(n - ring_start));
    }
    if (last == steps()) visit(final_record());
  }

  // Used by the simulator while the walk is being built.
  void record_step(const Site& x, std::uint32_t cluster, double exponential, double holding) {
    StepRecord rec{final_.n, x, final_.clock.sum, cluster, exponential, holding};
    if (options_.ring_capacity > 0) {
      if (ring_.size() < options_.ring_capacity) {
        ring_.push_back(rec);
      } else {
        ring_[ring_head_] = rec;
        ring_head_ = (ring_head_ + 1) % options_.ring_capacity;
      }
    }
    final_.clock.add(holding);
    if (!(final_.clock.sum <= kMaxClockValue)) throw HorizonOverflow("clock exceeded 1e300");
  }

  void record_move(const Site& x) {
    ++final_.n;
    final_.x = x;
    if (final_.n % options_.checkpoint_interval == 0) checkpoints_.push_back(final_);
  }

  void set_termination(Termination t) { terminated_by_ = t; }

 private:
  struct WalkState {
    std::size_t n;
    Site x;
    CompensatedSum clock;
  };

  StepRecord advance(WalkState& state) const {
    const std::uint32_t c = lookup_(state.x);
    const double eps = streams_.exponential(state.n);
    const double h = holding_time(eps, beta_, c);
    StepRecord rec{state.n, state.x, state.clock.sum, c, eps, h};
    state.clock.add(h);
    state.x = step(state.x, kernel_.sample(streams_.skeleton_uniform(state.n)));
    ++state.n;
    return rec;
  }

  template <class Visitor>
  void replay(std::size_t first, std::size_t last, Visitor&& visit) const {
    const Checkpoint& start = checkpoints_[first / options_.checkpoint_interval];
    WalkState state{start.n, start.x, start.clock};
    while (state.n <= last) {
      const StepRecord rec = advance(state);
      if (rec.n >= first) visit(rec);
    }
  }

  StepRecord final_record() const {
    StepRecord rec;
    rec.n = final_.n;
    rec.x = final_.x;
    rec.time = final_.clock.sum;
    rec.cluster = lookup_(final_.x);
    return rec;
  }

  const StepRecord& ring_at(std::size_t i) const {
    return ring_[(ring_head_ + i) % ring_.size()];
  }

  int dim_;
  double beta_;
  SkeletonKernel kernel_;
  WalkStreams streams_;
  ClusterLookup lookup_;
  TrajectoryOptions options_;
  std::vector<Checkpoint> checkpoints_;
  std::vector<StepRecord> ring_;
  std::size_t ring_head_ = 0;
  Checkpoint final_{};
  Termination terminated_by_ = Termination::steps;
};

inline std::size_t clock_inverse(const Trajectory& traj, double t) { return traj.clock_inverse(t); }
inline Site position_at(const Trajectory& traj, double t) { return traj.position_at(t); }

// Walks for several beta values driven by one skeleton and one exponential
// stream. members[i] belongs to betas[i].
struct CoupledTrajectorySet {
  std::vector<double> betas;
  std::vector<Trajectory> members;
};

// Env is a BasicEnvironment<Field>, possibly const.
template <class Env>
CoupledTrajectorySet simulate_coupled(std::shared_ptr<Env> env,
                                      const SkeletonKernel& kernel, std::vector<double> betas,
                                      const Horizon& horizon, std::uint64_t rng_seed,
                                      const TrajectoryOptions& options = {}) {
  horizon.check();
  if (betas.empty()) throw InvalidParams("beta list must be nonempty");
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidParams("every beta must be finite and >= 0");
  }
  if (kernel.dim != env->dim()) throw InvalidParams("kernel and environment dimensions differ");

  const WalkStreams streams = WalkStreams::from_seed(rng_seed);
  ClusterLookup lookup = [env](const Site& x) { return env->cluster_size(x); };
  CoupledTrajectorySet set;
  set.betas = betas;
  set.members.reserve(betas.size());
  for (double b : betas) set.members.emplace_back(env->dim(), b, kernel, streams, lookup, options);

  std::vector<bool> active(betas.size(), true);
  std::size_t remaining = betas.size();
  Site x{};
  for (std::size_t n = 0; remaining > 0; ++n) {
    const std::uint32_t c = env->cluster_size(x);
    const double eps = streams.exponential(n);
    for (std::size_t m = 0; m < betas.size(); ++m) {
      if (active[m]) set.members[m].record_step(x, c, eps, holding_time(eps, betas[m], c));
    }
    x = step(x, kernel.sample(streams.skeleton_uniform(n)));
    for (std::size_t m = 0; m < betas.size(); ++m) {
      if (!active[m]) continue;
      Trajectory& member = set.members[m];
      member.record_move(x);
      if (horizon.max_time && member.final_time() > *horizon.max_time) {
        member.set_termination(Termination::time);
      } else if (horizon.max_steps && member.steps() >= *horizon.max_steps) {
        member.set_termination(Termination::steps);
      } else {
        continue;
      }
      active[m] = false;
      --remaining;
    }
  }
  return set;
}

template <class Env>
Trajectory simulate(std::shared_ptr<Env> env, const SkeletonKernel& kernel,
                    const Horizon& horizon, std::uint64_t rng_seed, const TrajectoryOptions& options = {}) {
  const double beta = env->params().beta;
  auto set = simulate_coupled(std::move(env), kernel, {beta}, horizon, rng_seed, options);
  return std::move(set.members.front());
}

inline void append_double(std::string& out, double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, end);
}

// Checkpoint-resolution stream: a header comment, then "n S_n x_1 ... x_d"
// for every checkpoint and the final step.
inline void write_checkpoint_stream(const Trajectory& traj, std::ostream& out,
                                    const std::string& config_hash) {
  std::string line = "# config_hash=" + config_hash + " beta=";
  append_double(line, traj.beta());
  line += " dim=" + std::to_string(traj.dim()) +
          " interval=" + std::to_string(traj.options().checkpoint_interval) + "\n";
  out << line;
  auto emit = [&](const Checkpoint& c) {
    line = std::to_string(c.n) + ' ';
    append_double(line, c.clock.sum);
    for (int k = 0; k < traj.dim(); ++k) line += ' ' + std::to_string(c.x[k]);
    line += '\n';
    out << line;
  };
  for (const auto& c : traj.checkpoints()) {
    if (c.n < traj.steps()) emit(c);
  }
  emit(traj.final_state());
}

}  // namespace perctrap
