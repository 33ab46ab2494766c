#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "perctrap/dynamics.hpp"
#include "perctrap/errors.hpp"
#include "perctrap/theory.hpp"

namespace perctrap {

// Geometric query times t_j = t0 * ratio^j, j < count.
struct TimeGrid {
  double t0 = 1.0;
  double ratio = 2.0;
  std::size_t count = 1;

  std::vector<double> times() const {
    if (!(t0 > 0.0) || !(ratio > 1.0) || count == 0) {
      throw InvalidParams("time grid needs t0 > 0, ratio > 1, count >= 1");
    }
    std::vector<double> out(count);
    for (std::size_t j = 0; j < count; ++j) out[j] = t0 * std::pow(ratio, static_cast<double>(j));
    return out;
  }

  double last() const { return t0 * std::pow(ratio, static_cast<double>(count - 1)); }

  // `count` points from t_lo to t_hi inclusive.
  static TimeGrid spanning(double t_lo, double t_hi, std::size_t count) {
    if (count < 2 || !(t_hi > t_lo)) throw InvalidParams("grid span needs count >= 2 and t_hi > t_lo");
    return {t_lo, std::pow(t_hi / t_lo, 1.0 / static_cast<double>(count - 1)), count};
  }
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

// Solves the k x k system a z = b in place (Gauss-Jordan, partial pivoting)
// and returns the inverse of `a`.
template <std::size_t K>
std::array<std::array<double, K>, K> solve_and_invert(std::array<std::array<double, K>, K> a,
                                                      std::array<double, K>& b) {
  std::array<std::array<double, K>, K> inv{};
  for (std::size_t i = 0; i < K; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < K; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < K; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) throw DegenerateFit("singular least-squares system");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    std::swap(b[col], b[pivot]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < K; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    b[col] /= d;
    for (std::size_t r = 0; r < K; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < K; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
      b[r] -= f * b[col];
    }
  }
  return inv;
}

inline double norm_of(const Site& x, int dim) { return euclidean_norm(x, dim); }

inline void check_replicas(std::span<const Trajectory> replicas, std::size_t minimum) {
  if (replicas.size() < minimum) {
    throw InvalidParams("estimator needs at least " + std::to_string(minimum) + " replicas");
  }
}

}  // namespace detail

struct SpeedEstimate {
  std::vector<double> mean;
  Matrix covariance;         // across-replica covariance of Y_t / t
  std::vector<double> std_error;  // of the mean, per component
  std::size_t replicas = 0;
};

// Across-replica mean and covariance of Y_t / t.
inline SpeedEstimate estimate_speed(std::span<const Trajectory> replicas, double t) {
  detail::check_replicas(replicas, 2);
  const int dim = replicas.front().dim();
  const std::size_t m = replicas.size();
  std::vector<std::vector<double>> samples(m, std::vector<double>(dim));
  for (std::size_t r = 0; r < m; ++r) {
    const Site y = replicas[r].position_at(t);
    for (int k = 0; k < dim; ++k) samples[r][k] = y[k] / t;
  }
  SpeedEstimate est;
  est.replicas = m;
  est.mean.assign(dim, 0.0);
  for (const auto& s : samples) {
    for (int k = 0; k < dim; ++k) est.mean[k] += s[k];
  }
  for (double& v : est.mean) v /= static_cast<double>(m);
  est.covariance = Matrix(dim);
  for (const auto& s : samples) {
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) est.covariance(i, j) += (s[i] - est.mean[i]) * (s[j] - est.mean[j]);
    }
  }
  for (double& v : est.covariance.entries) v /= static_cast<double>(m - 1);
  est.std_error.resize(dim);
  for (int k = 0; k < dim; ++k) est.std_error[k] = std::sqrt(est.covariance(k, k) / static_cast<double>(m));
  return est;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = std::numeric_limits<double>::quiet_NaN();  // jackknife over replicas
  std::vector<double> fit_times;
  std::vector<double> residuals;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool running_max = false;
};

struct ExponentFitOptions {
  bool use_running_max = false;
  // Leading part of the grid dropped before fitting, in decades of t.
  double burn_in_decades = 1.0;
};

namespace detail {

// Per-replica M_t over the grid: |Y_t| or its running max over grid points.
inline std::vector<double> escape_profile(const Trajectory& traj, std::span<const double> times,
                                          bool running_max) {
  std::vector<double> out(times.size());
  double best = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double r = norm_of(traj.position_at(times[j]), traj.dim());
    best = std::max(best, r);
    out[j] = running_max ? best : r;
  }
  return out;
}

// Slope of mean ln M_t against ln t over the window, skipping replicas with
// M_t = 0 at a grid point. `skip` excludes one replica (jackknife).
inline LineFit fit_profiles(const std::vector<std::vector<double>>& profiles, std::span<const double> times,
                            std::size_t first, std::size_t skip, std::vector<double>* xs_out,
                            std::vector<double>* ys_out) {
  std::vector<double> xs, ys;
  for (std::size_t j = first; j < times.size(); ++j) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r < profiles.size(); ++r) {
      if (r == skip || !(profiles[r][j] > 0.0)) continue;
      total += std::log(profiles[r][j]);
      ++used;
    }
    if (used == 0) continue;
    xs.push_back(std::log(times[j]));
    ys.push_back(total / static_cast<double>(used));
  }
  if (xs.size() < 2) throw DegenerateFit("M_t vanishes on the fit window");
  const LineFit fit = ordinary_least_squares(xs, ys);
  if (xs_out) *xs_out = std::move(xs);
  if (ys_out) *ys_out = std::move(ys);
  return fit;
}

}  // namespace detail

// Least-squares slope of ln M_t against ln t, with M_t averaged in log space
// across replicas.
inline ExponentFit estimate_escape_exponent(std::span<const Trajectory> replicas, const TimeGrid& grid,
                                            const ExponentFitOptions& options = {}) {
  detail::check_replicas(replicas, 1);
  const std::vector<double> times = grid.times();
  if (times.back() < 1e3 * times.front() * (1.0 - 1e-9)) {
    throw InvalidParams("exponent fit grid must span at least three decades");
  }
  const double start = times.front() * std::pow(10.0, options.burn_in_decades);
  std::size_t first = 0;
  while (first < times.size() && times[first] < start * (1.0 - 1e-12)) ++first;

  std::vector<std::vector<double>> profiles;
  profiles.reserve(replicas.size());
  for (const auto& traj : replicas) profiles.push_back(detail::escape_profile(traj, times, options.use_running_max));

  const std::size_t none = replicas.size();
  std::vector<double> xs, ys;
  const detail::LineFit fit = detail::fit_profiles(profiles, times, first, none, &xs, &ys);

  ExponentFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.running_max = options.use_running_max;
  out.window_lo = std::exp(xs.front());
  out.window_hi = std::exp(xs.back());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.fit_times.push_back(std::exp(xs[i]));
    out.residuals.push_back(ys[i] - (fit.intercept + fit.slope * xs[i]));
  }
  if (replicas.size() >= 2) {
    std::vector<double> loo;
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      try {
        loo.push_back(detail::fit_profiles(profiles, times, first, r, nullptr, nullptr).slope);
      } catch (const DegenerateFit&) {
      }
    }
    if (loo.size() >= 2) {
      double mean = 0.0;
      for (double s : loo) mean += s;
      mean /= static_cast<double>(loo.size());
      double sq = 0.0;
      for (double s : loo) sq += (s - mean) * (s - mean);
      const double k = static_cast<double>(loo.size());
      out.slope_std_error = std::sqrt((k - 1.0) / k * sq);
    }
  }
  return out;
}

inline ExponentFit estimate_escape_exponent(const Trajectory& traj, const TimeGrid& grid,
                                            const ExponentFitOptions& options = {}) {
  return estimate_escape_exponent(std::span<const Trajectory>(&traj, 1), grid, options);
}

struct MsdPoint {
  double t = 0.0;
  double msd_over_t = 0.0;  // E|Y_t|^2 / t
  double msd_std_error = 0.0;
  Matrix second_moment;     // E[Y_t Y_t^T] / t
  Matrix second_moment_std_error;
  // E[N_t] / t with N_t the number of jumps by time t. Without drift Y is a
  // martingale with unit jumps, so E|Y_t|^2 = E[N_t] exactly.
  double jumps_over_t = 0.0;
  double jumps_std_error = 0.0;
};

inline std::vector<MsdPoint> estimate_msd(std::span<const Trajectory> replicas, const TimeGrid& grid) {
  detail::check_replicas(replicas, 2);
  const int dim = replicas.front().dim();
  const double m = static_cast<double>(replicas.size());
  std::vector<MsdPoint> out;
  for (double t : grid.times()) {
    MsdPoint pt;
    pt.t = t;
    pt.second_moment = Matrix(dim);
    pt.second_moment_std_error = Matrix(dim);
    Matrix sq(dim);
    double msd_sq = 0.0, jumps = 0.0, jumps_sq = 0.0;
    for (const auto& traj : replicas) {
      const std::size_t n = traj.clock_inverse(t);
      const Site y = traj.position(n);
      double r2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        r2 += static_cast<double>(y[i]) * y[i];
        for (int j = 0; j < dim; ++j) {
          const double v = static_cast<double>(y[i]) * y[j] / t;
          pt.second_moment(i, j) += v;
          sq(i, j) += v * v;
        }
      }
      pt.msd_over_t += r2 / t;
      msd_sq += (r2 / t) * (r2 / t);
      jumps += static_cast<double>(n) / t;
      jumps_sq += (static_cast<double>(n) / t) * (static_cast<double>(n) / t);
    }
    auto finish = [m](double& mean, double sum_sq) {
      mean /= m;
      const double var = std::max(0.0, (sum_sq / m - mean * mean) * m / (m - 1.0));
      return std::sqrt(var / m);
    };
    pt.msd_std_error = finish(pt.msd_over_t, msd_sq);
    pt.jumps_over_t = jumps;
    pt.jumps_std_error = finish(pt.jumps_over_t, jumps_sq);
    for (std::size_t e = 0; e < sq.entries.size(); ++e) {
      pt.second_moment_std_error.entries[e] = finish(pt.second_moment.entries[e], sq.entries[e]);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

// Fraction of [0, t] spent at sites of each cluster size, from the exact
// holding intervals. Bin c holds the mass of C = c.
inline std::vector<double> env_histogram(const Trajectory& traj, double t) {
  const std::size_t last = traj.clock_inverse(t);
  std::vector<double> bins;
  traj.for_each_step(0, last, [&](const StepRecord& rec) {
    const double dt = (rec.n == last) ? t - rec.time : rec.holding;
    if (rec.cluster >= bins.size()) bins.resize(rec.cluster + 1, 0.0);
    bins[rec.cluster] += dt;
  });
  double total = 0.0;
  for (double b : bins) total += b;
  for (double& b : bins) b /= total;
  return bins;
}

struct HistogramEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;
};

// Per-bin mean and standard error across replica histograms.
inline HistogramEstimate aggregate_histograms(const std::vector<std::vector<double>>& histograms) {
  std::size_t width = 0;
  for (const auto& h : histograms) width = std::max(width, h.size());
  HistogramEstimate est{std::vector<double>(width, 0.0), std::vector<double>(width, 0.0)};
  const double m = static_cast<double>(histograms.size());
  for (std::size_t c = 0; c < width; ++c) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& h : histograms) {
      const double v = c < h.size() ? h[c] : 0.0;
      sum += v;
      sum_sq += v * v;
    }
    est.mean[c] = sum / m;
    if (histograms.size() > 1) {
      const double var = std::max(0.0, (sum_sq / m - est.mean[c] * est.mean[c]) * m / (m - 1.0));
      est.std_error[c] = std::sqrt(var / m);
    }
  }
  return est;
}

enum class TailModel {
  // -ln P(C >= n) = a + xi n
  exponential,
  // -ln P(C >= n) = a + xi n + b ln n; absorbs a polynomial prefactor such as
  // the n in the one-dimensional law n p^n.
  exponential_with_power_prefactor,
};

struct XiEstimate {
  double xi = 0.0;
  double std_error = 0.0;
  std::size_t n_lo = 0;
  std::size_t n_hi = 0;
  TailModel model = TailModel::exponential_with_power_prefactor;
};

struct XiFitOptions {
  TailModel model = TailModel::exponential_with_power_prefactor;
  std::size_t min_tail_count = 50;
  std::size_t n_min = 1;
};

// Weighted least-squares tail rate from i.i.d. cluster sizes. The window
// starts at n_min and ends at the last n with at least min_tail_count samples
// of C >= n; weights are inverse delta-method variances of ln P(C >= n).
inline XiEstimate estimate_xi(std::span<const std::uint32_t> samples, const XiFitOptions& options = {}) {
  if (samples.size() < 10'000) throw InvalidParams("estimate_xi needs at least 10^4 samples");
  std::uint32_t largest = 0;
  for (auto c : samples) largest = std::max(largest, c);
  std::vector<std::size_t> counts(static_cast<std::size_t>(largest) + 2, 0);
  for (auto c : samples) ++counts[c];
  std::vector<std::size_t> tail(counts.size(), 0);  // tail[n] = #{C >= n}
  for (std::size_t n = counts.size() - 1; n-- > 0;) tail[n] = tail[n + 1] + counts[n];

  const double m = static_cast<double>(samples.size());
  XiEstimate est;
  est.model = options.model;
  est.n_lo = std::max<std::size_t>(1, options.n_min);
  est.n_hi = est.n_lo;
  while (est.n_hi + 1 < tail.size() && tail[est.n_hi + 1] >= options.min_tail_count) ++est.n_hi;
  if (est.n_lo >= tail.size() || tail[est.n_lo] < options.min_tail_count || est.n_hi - est.n_lo + 1 < 4) {
    throw InsufficientTail("tail fit window shorter than 4 points");
  }

  constexpr std::size_t K = 3;
  const std::size_t k = options.model == TailModel::exponential ? 2 : 3;
  std::array<std::array<double, K>, K> normal{};
  std::array<double, K> rhs{};
  for (std::size_t n = est.n_lo; n <= est.n_hi; ++n) {
    const double prob = static_cast<double>(tail[n]) / m;
    const double w = static_cast<double>(tail[n]) / std::max(1.0 - prob, 1.0 / m);
    const std::array<double, K> row{1.0, static_cast<double>(n), std::log(static_cast<double>(n))};
    const double y = -std::log(prob);
    for (std::size_t i = 0; i < k; ++i) {
      rhs[i] += w * row[i] * y;
      for (std::size_t j = 0; j < k; ++j) normal[i][j] += w * row[i] * row[j];
    }
  }
  if (k == 2) normal[2][2] = 1.0;
  const auto inverse = detail::solve_and_invert<K>(normal, rhs);
  est.xi = rhs[1];
  est.std_error = std::sqrt(inverse[1][1]);
  return est;
}

struct RangeStats {
  std::size_t range = 0;           // distinct sites among X_0..X_n
  std::size_t max_local_time = 0;  // max over y of #{i <= n : X_i = y}
};

inline RangeStats range_and_localtime(const Trajectory& traj, std::size_t n) {
  std::unordered_map<std::uint64_t, std::size_t> visits;
  RangeStats out;
  traj.for_each_step(0, n, [&](const StepRecord& rec) {
    const std::size_t v = ++visits[pack(rec.x)];
    out.max_local_time = std::max(out.max_local_time, v);
  });
  out.range = visits.size();
  return out;
}

// Fraction of [0, t] spent at sites with C / ln t inside [1/beta - eps, 1/beta + eps].
inline double trap_occupation_fraction(const Trajectory& traj, double t, double eps) {
  if (!(traj.beta() > 0.0)) throw InvalidParams("trap occupation needs beta > 0");
  if (!(t > 1.0)) throw InvalidParams("trap occupation needs t > 1");
  const double lo = 1.0 / traj.beta() - eps;
  const double hi = 1.0 / traj.beta() + eps;
  const double log_t = std::log(t);
  const std::size_t last = traj.clock_inverse(t);
  double inside = 0.0;
  traj.for_each_step(0, last, [&](const StepRecord& rec) {
    const double dt = (rec.n == last) ? t - rec.time : rec.holding;
    const double scaled = static_cast<double>(rec.cluster) / log_t;
    if (scaled >= lo && scaled <= hi) inside += dt;
  });
  return inside / t;
}

}  // namespace perctrap
