#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "perctrap/errors.hpp"
#include "perctrap/lattice.hpp"

namespace perctrap {

// Model parameters plus the simulation controls that define one run.
struct Params {
  int dim = 1;
  double p = 0.3;          // site-open probability
  double lambda = 0.0;     // drift intensity
  std::array<double, kMaxDim> ell{1.0, 0.0, 0.0};
  double beta = 0.0;       // attraction to large clusters
  std::size_t cluster_cap = 1'000'000;
  std::uint64_t seed = 42;
  // Override for the subcriticality warning threshold; unset uses the
  // per-dimension default from subcritical_guard().
  std::optional<double> guard_override;
};

// Warn-level threshold for p: 0.99 (d=1), 0.59 (d=2), 0.31 (d=3).
inline double subcritical_guard(int dim) {
  switch (dim) {
    case 1: return 0.99;
    case 2: return 0.59;
    default: return 0.31;
  }
}

inline double ell_norm(const Params& params) {
  double s = 0.0;
  for (int k = 0; k < params.dim; ++k) s += params.ell[k] * params.ell[k];
  return std::sqrt(s);
}

// Throws InvalidParams on a hard violation. Returns human-readable warnings
// (currently only the subcriticality guard).
inline std::vector<std::string> validate(const Params& params) {
  if (params.dim < 1 || params.dim > kMaxDim) {
    throw InvalidParams("dimension must be 1, 2 or 3, got " + std::to_string(params.dim));
  }
  if (!(params.p > 0.0 && params.p < 1.0)) {
    throw InvalidParams("p must lie strictly inside (0,1)");
  }
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
    throw InvalidParams("lambda must be finite and >= 0");
  }
  if (!(params.beta >= 0.0) || !std::isfinite(params.beta)) {
    throw InvalidParams("beta must be finite and >= 0");
  }
  if (std::abs(ell_norm(params) - 1.0) > 1e-12) {
    throw InvalidParams("ell must be a unit vector (|ell| = 1 within 1e-12)");
  }
  for (int k = params.dim; k < kMaxDim; ++k) {
    if (params.ell[k] != 0.0) throw InvalidParams("ell has components beyond dimension d");
  }
  if (params.cluster_cap < 1) throw InvalidParams("cluster_cap must be >= 1");

  std::vector<std::string> warnings;
  const double guard = params.guard_override.value_or(subcritical_guard(params.dim));
  if (params.p >= guard) {
    warnings.push_back("p = " + std::to_string(params.p) + " is at or above the subcriticality guard " +
                       std::to_string(guard) + " for d = " + std::to_string(params.dim) +
                       "; cluster exploration may hit cluster_cap");
  }
  return warnings;
}

// Unit vector along the first axis in dimension dim.
inline std::array<double, kMaxDim> axis_direction(int dim, int axis = 0) {
  std::array<double, kMaxDim> e{};
  if (axis < dim) e[axis] = 1.0;
  return e;
}

}  // namespace perctrap
