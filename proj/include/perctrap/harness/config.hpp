#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "perctrap/errors.hpp"
#include "perctrap/params.hpp"
#include "perctrap/random.hpp"

namespace perctrap::harness {

// Parse or validation problem in a config file. line and column are 1-based,
// 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line = 0, int column = 0)
      : Error(line > 0 ? "config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg : msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

inline const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> names{"speed",         "exponent", "exponent_limsup",   "msd",
                                              "env_histogram", "range",    "trap_occupation"};
  return names;
}

struct RunConfig {
  std::string run_id = "run";
  Params params;

  std::optional<std::size_t> max_steps;
  std::optional<double> max_time = 1e4;

  std::size_t replicas = 8;

  double grid_t0 = 10.0;
  double grid_ratio = 2.0;
  std::size_t grid_count = 10;

  // Coupled walks; empty means the single beta above.
  std::vector<double> beta_list;
  std::vector<std::string> estimators{"speed"};
  double trap_eps = 0.25;
  bool write_trajectories = false;

  // Theory inputs outside d = 1: a supplied tail rate, or Monte Carlo.
  std::optional<double> xi;
  std::size_t theory_samples = 100'000;

  // Sweep ranges; unset means the single value in params.
  std::optional<std::vector<double>> sweep_p;
  std::optional<std::vector<double>> sweep_lambda;
  std::optional<std::vector<double>> sweep_beta;
  // Upper bound on points x replicas x betas for a sweep.
  std::size_t sweep_budget = 10'000;

  std::vector<double> effective_betas() const {
    return beta_list.empty() ? std::vector<double>{params.beta} : beta_list;
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline ConfigError at(const YAML::Node& node, const std::string& msg) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) return ConfigError(msg);
  return ConfigError(msg, mark.line + 1, mark.column + 1);
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw at(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    throw at(node, "'" + key + "' has the wrong type: '" + node.Scalar() + "'");
  }
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw at(node, "'" + key + "' must be a list");
  std::vector<T> out;
  for (const auto& item : node) out.push_back(scalar<T>(item, key));
  return out;
}

inline std::size_t count(const YAML::Node& node, const std::string& key) {
  const double v = scalar<double>(node, key);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
    throw at(node, "'" + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline RunConfig parse_config(const YAML::Node& root) {
  RunConfig cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw detail::at(root, "config must be a mapping of keys to values");

  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    using detail::count;
    using detail::scalar;
    using detail::sequence;
    if (key == "run_id") cfg.run_id = scalar<std::string>(v, key);
    else if (key == "dim") cfg.params.dim = scalar<int>(v, key);
    else if (key == "p") cfg.params.p = scalar<double>(v, key);
    else if (key == "lambda") cfg.params.lambda = scalar<double>(v, key);
    else if (key == "beta") cfg.params.beta = scalar<double>(v, key);
    else if (key == "ell") {
      const auto ell = sequence<double>(v, key);
      if (ell.empty() || ell.size() > static_cast<std::size_t>(kMaxDim)) throw detail::at(v, "'ell' needs 1 to 3 entries");
      cfg.params.ell = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < ell.size(); ++i) cfg.params.ell[i] = ell[i];
    } else if (key == "cluster_cap") cfg.params.cluster_cap = count(v, key);
    else if (key == "seed") cfg.params.seed = scalar<std::uint64_t>(v, key);
    else if (key == "subcritical_guard") cfg.params.guard_override = scalar<double>(v, key);
    else if (key == "max_steps") cfg.max_steps = v.IsNull() ? std::nullopt : std::optional(count(v, key));
    else if (key == "max_time") cfg.max_time = v.IsNull() ? std::nullopt : std::optional(scalar<double>(v, key));
    else if (key == "replicas") cfg.replicas = count(v, key);
    else if (key == "grid_t0") cfg.grid_t0 = scalar<double>(v, key);
    else if (key == "grid_ratio") cfg.grid_ratio = scalar<double>(v, key);
    else if (key == "grid_count") cfg.grid_count = count(v, key);
    else if (key == "beta_list") cfg.beta_list = sequence<double>(v, key);
    else if (key == "estimators") {
      cfg.estimators = sequence<std::string>(v, key);
      for (const auto& name : cfg.estimators) {
        if (std::find(known_estimators().begin(), known_estimators().end(), name) == known_estimators().end()) {
          throw detail::at(v, "unknown estimator '" + name + "'");
        }
      }
    } else if (key == "trap_eps") cfg.trap_eps = scalar<double>(v, key);
    else if (key == "write_trajectories") cfg.write_trajectories = scalar<bool>(v, key);
    else if (key == "xi") cfg.xi = v.IsNull() ? std::nullopt : std::optional(scalar<double>(v, key));
    else if (key == "theory_samples") cfg.theory_samples = count(v, key);
    else if (key == "sweep_p") cfg.sweep_p = sequence<double>(v, key);
    else if (key == "sweep_lambda") cfg.sweep_lambda = sequence<double>(v, key);
    else if (key == "sweep_beta") cfg.sweep_beta = sequence<double>(v, key);
    else if (key == "sweep_budget") cfg.sweep_budget = count(v, key);
    else throw detail::at(kv.first, "unknown key '" + key + "'");
  }

  if (!cfg.max_steps && !cfg.max_time) throw ConfigError("at least one of max_steps and max_time must be set");
  if (cfg.max_time && !(*cfg.max_time > 0.0)) throw ConfigError("max_time must be positive");
  if (cfg.replicas == 0) throw ConfigError("replicas must be at least 1");
  if (!(cfg.grid_t0 > 0.0) || !(cfg.grid_ratio > 1.0) || cfg.grid_count == 0) {
    throw ConfigError("grid needs grid_t0 > 0, grid_ratio > 1, grid_count >= 1");
  }
  for (double b : cfg.beta_list) {
    if (!(b >= 0.0)) throw ConfigError("beta_list entries must be non-negative");
  }
  if (!(cfg.trap_eps > 0.0)) throw ConfigError("trap_eps must be positive");
  try {
    validate(cfg.params);
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  try {
    return parse_config(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1, e.mark.is_null() ? 0 : e.mark.column + 1);
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str());
}

// Canonical text of every field in a fixed order. Two configs with the same
// values give the same text regardless of key order or number spelling.
inline std::string canonical_text(const RunConfig& cfg) {
  using detail::format_double;
  std::ostringstream out;
  auto list = [&](const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
    return s + "]";
  };
  auto opt_list = [&](const std::optional<std::vector<double>>& xs) { return xs ? list(*xs) : std::string("~"); };
  const Params& p = cfg.params;
  out << "run_id=" << cfg.run_id << "\n"
      << "dim=" << p.dim << "\np=" << format_double(p.p) << "\nlambda=" << format_double(p.lambda)
      << "\nell=" << list({p.ell.begin(), p.ell.end()}) << "\nbeta=" << format_double(p.beta)
      << "\ncluster_cap=" << p.cluster_cap << "\nseed=" << p.seed
      << "\nsubcritical_guard=" << (p.guard_override ? format_double(*p.guard_override) : "~")
      << "\nmax_steps=" << (cfg.max_steps ? std::to_string(*cfg.max_steps) : "~")
      << "\nmax_time=" << (cfg.max_time ? format_double(*cfg.max_time) : "~") << "\nreplicas=" << cfg.replicas
      << "\ngrid_t0=" << format_double(cfg.grid_t0) << "\ngrid_ratio=" << format_double(cfg.grid_ratio)
      << "\ngrid_count=" << cfg.grid_count << "\nbeta_list=" << list(cfg.beta_list) << "\nestimators=";
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) out << (i ? "," : "") << cfg.estimators[i];
  out << "\ntrap_eps=" << format_double(cfg.trap_eps) << "\nwrite_trajectories=" << cfg.write_trajectories
      << "\nxi=" << (cfg.xi ? format_double(*cfg.xi) : "~") << "\ntheory_samples=" << cfg.theory_samples
      << "\nsweep_p=" << opt_list(cfg.sweep_p) << "\nsweep_lambda=" << opt_list(cfg.sweep_lambda)
      << "\nsweep_beta=" << opt_list(cfg.sweep_beta) << "\nsweep_budget=" << cfg.sweep_budget << "\n";
  return out.str();
}

inline std::string config_hash(const RunConfig& cfg) {
  const std::uint64_t h = rng::tag(canonical_text(cfg));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace perctrap::harness
