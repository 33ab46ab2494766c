#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "perctrap/environment.hpp"
#include "perctrap/errors.hpp"
#include "perctrap/lattice.hpp"
#include "perctrap/params.hpp"

namespace perctrap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Dense row-major d x d matrix.
struct Matrix {
  int dim = 0;
  std::vector<double> entries;

  Matrix() = default;
  explicit Matrix(int d) : dim(d), entries(static_cast<std::size_t>(d) * d, 0.0) {}

  double& operator()(int i, int j) { return entries[static_cast<std::size_t>(i) * dim + j]; }
  double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * dim + j]; }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (*this)(i, i);
    return s;
  }
};

enum class Regime {
  ballistic,
  subballistic_drift,
  subdiffusive_isotropic_d1,
  subdiffusive_isotropic_dge2,
  diffusive,
};

// Whether an escape exponent is a true limit of ln|Y_t|/ln t or only its limsup.
enum class ExponentTag { limit, limsup };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::ballistic: return "ballistic";
    case Regime::subballistic_drift: return "subballistic-drift";
    case Regime::subdiffusive_isotropic_d1: return "subdiffusive-isotropic-d1";
    case Regime::subdiffusive_isotropic_dge2: return "subdiffusive-isotropic-dge2";
    case Regime::diffusive: return "diffusive";
  }
  return "unknown";
}

inline std::string_view to_string(ExponentTag t) { return t == ExponentTag::limit ? "limit" : "limsup"; }

// Drift of the skeleton: sinh(lambda ell_k) / sum_j cosh(lambda ell_j).
inline std::vector<double> drift_vector(double lambda, const std::array<double, kMaxDim>& ell, int dim) {
  double denom = 0.0;
  for (int j = 0; j < dim; ++j) denom += std::cosh(lambda * ell[j]);
  std::vector<double> drift(dim);
  for (int k = 0; k < dim; ++k) drift[k] = std::sinh(lambda * ell[k]) / denom;
  return drift;
}

inline std::vector<double> drift_vector(const Params& params) {
  return drift_vector(params.lambda, params.ell, params.dim);
}

// Exact tail rate of the one-dimensional cluster size.
inline double xi_exact_1d(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParams("xi_exact_1d needs 0 < p < 1");
  return -std::log(p);
}

// E[exp(beta C_0)] in d = 1, where P(C_0 = 0) = 1-p and P(C_0 = n) = n p^n (1-p)^2.
// Infinite once p e^beta >= 1.
inline double mgf_1d(double p, double beta) {
  if (!(p > 0.0 && p < 1.0) || !(beta >= 0.0)) throw InvalidParams("mgf_1d needs 0 < p < 1, beta >= 0");
  const double q = p * std::exp(beta);
  if (q >= 1.0) return kInfinity;
  const double gap = 1.0 - q;
  return (1.0 - p) + (1.0 - p) * (1.0 - p) * q / (gap * gap);
}

struct MgfEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool unreliable = false;
  std::string reason;
};

struct HeavyTailGuard {
  std::optional<double> xi_estimate;
  double margin = 0.1;
};

// Sample mean of exp(beta C_i) with a jackknife standard error. Flags the
// estimate when the top 1% of samples carry more than half the mass, or when
// beta is within `margin` of the supplied tail-rate estimate.
inline MgfEstimate mgf_monte_carlo(std::span<const std::uint32_t> samples, double beta,
                                   const HeavyTailGuard& guard = {}) {
  if (samples.empty()) throw InvalidParams("mgf_monte_carlo needs samples");
  const std::size_t m = samples.size();
  std::vector<double> values(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    values[i] = std::exp(beta * static_cast<double>(samples[i]));
    total += values[i];
  }
  MgfEstimate est;
  est.value = total / static_cast<double>(m);
  if (m > 1) {
    // Leave-one-out means and their spread.
    const double md = static_cast<double>(m);
    double jk_sq = 0.0;
    for (double v : values) {
      const double loo = (total - v) / (md - 1.0);
      jk_sq += (loo - est.value) * (loo - est.value);
    }
    est.std_error = std::sqrt((md - 1.0) / md * jk_sq);
  }
  if (!std::isfinite(est.value)) {
    est.unreliable = true;
    est.reason = "exp(beta C) overflowed";
    return est;
  }
  const std::size_t top = std::max<std::size_t>(1, m / 100);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(top - 1), values.end(),
                   std::greater<>());
  double top_mass = 0.0;
  for (std::size_t i = 0; i < top; ++i) top_mass += values[i];
  if (m >= 100 && top_mass > 0.5 * total) {
    est.unreliable = true;
    est.reason = "top 1% of samples carry more than half the mass";
  }
  if (guard.xi_estimate && beta > *guard.xi_estimate - guard.margin) {
    est.unreliable = true;
    if (!est.reason.empty()) est.reason += "; ";
    est.reason += "beta within heavy-tail margin of the tail rate";
  }
  return est;
}

// v = drift / E[exp(beta C_0)], zero when the moment is infinite.
inline std::vector<double> speed(const Params& params, double mgf_value) {
  if (!(mgf_value > 0.0)) throw InvalidParams("mgf value must be positive");
  std::vector<double> v = drift_vector(params);
  for (double& c : v) c = std::isfinite(mgf_value) ? c / mgf_value : 0.0;
  return v;
}

struct EscapePrediction {
  double exponent = 0.0;
  Regime regime = Regime::diffusive;
  ExponentTag tag = ExponentTag::limsup;
};

// Algebraic escape rate of |Y_t| by regime. The border beta == xi uses the
// beta >= xi rows.
inline EscapePrediction escape_exponent(const Params& params, double xi) {
  if (!(xi > 0.0)) throw InvalidParams("escape_exponent needs xi > 0");
  const double beta = params.beta;
  if (params.lambda > 0.0) {
    if (beta < xi) return {1.0, Regime::ballistic, ExponentTag::limit};
    return {xi / beta, Regime::subballistic_drift, ExponentTag::limit};
  }
  if (beta < xi) return {0.5, Regime::diffusive, ExponentTag::limsup};
  if (params.dim >= 2) return {xi / (2.0 * beta), Regime::subdiffusive_isotropic_dge2, ExponentTag::limsup};
  // 1/2 * (beta/(2 xi) + 1/2)^{-1}
  return {0.5 / (beta / (2.0 * xi) + 0.5), Regime::subdiffusive_isotropic_d1, ExponentTag::limsup};
}

// Sigma = (d E[exp(beta C_0)])^{-1} I_d, defined only without drift.
inline Matrix diffusion_matrix(const Params& params, double mgf_value) {
  if (params.lambda > 0.0) throw NotApplicable("diffusion matrix requires lambda = 0");
  if (!std::isfinite(mgf_value)) throw NotApplicable("diffusion matrix requires a finite moment");
  if (!(mgf_value > 0.0)) throw InvalidParams("mgf value must be positive");
  Matrix sigma(params.dim);
  for (int i = 0; i < params.dim; ++i) sigma(i, i) = 1.0 / (params.dim * mgf_value);
  return sigma;
}

// log mu(x) = 2 lambda ell.x + beta C_x.
template <class Field>
double mu_weight(const BasicEnvironment<Field>& env, const Params& params, const Site& x) {
  return 2.0 * params.lambda * dot(params.ell, x, params.dim) +
         params.beta * static_cast<double>(env.cluster_size(x));
}

struct TheoryPrediction {
  std::vector<double> drift;
  double xi = 0.0;
  bool xi_exact = false;
  double mgf = 1.0;
  std::vector<double> speed;
  std::optional<Matrix> diffusion;
  EscapePrediction escape;
  // beta == xi: the moment and speed at the border are reported as computed
  // but flagged for the reader.
  bool boundary = false;
};

inline TheoryPrediction predict(const Params& params, double xi, double mgf_value, bool xi_exact) {
  TheoryPrediction out;
  out.drift = drift_vector(params);
  out.xi = xi;
  out.xi_exact = xi_exact;
  out.mgf = mgf_value;
  out.speed = speed(params, mgf_value);
  if (params.lambda == 0.0 && std::isfinite(mgf_value)) out.diffusion = diffusion_matrix(params, mgf_value);
  out.escape = escape_exponent(params, xi);
  out.boundary = std::abs(params.beta - xi) <= 1e-12 * std::max(1.0, xi);
  return out;
}

// Closed-form prediction in d = 1.
inline TheoryPrediction predict_1d(const Params& params) {
  if (params.dim != 1) throw InvalidParams("predict_1d requires d = 1");
  return predict(params, xi_exact_1d(params.p), mgf_1d(params.p, params.beta), true);
}

}  // namespace perctrap
