#pragma once

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "perctrap/errors.hpp"
#include "perctrap/harness/config.hpp"

namespace perctrap::harness {

inline std::string num(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return detail::format_double(v);
}

inline std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

inline std::string join(const std::vector<double>& xs, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += num(xs[i]);
  }
  return out;
}

// Minimal CSV: fields with a comma, quote or newline are quoted.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
      : out_(path, std::ios::binary), width_(header.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw Error("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(width_));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << '\n';
  }

  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

// Bumped whenever an estimator's output changes meaning.
inline constexpr int kEstimatorVersion = 1;

struct ResultRecord {
  std::string run_id;
  std::string config_hash;
  std::string estimator;
  int dim = 1;
  double p = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  double t = 0.0;
  std::string component;
  double value = 0.0;
  std::optional<double> std_error;  // NA with a single replica
  std::size_t replicas = 0;
  std::string seed_path;
};

inline const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{"run_id", "config_hash", "estimator", "estimator_version", "d",
                                             "p",      "lambda",      "beta",      "t",                 "component",
                                             "value",  "stderr",      "replicas",  "seed_path"};
  return cols;
}

inline std::vector<std::string> result_fields(const ResultRecord& r) {
  return {r.run_id,      r.config_hash,  r.estimator,         std::to_string(kEstimatorVersion),
          std::to_string(r.dim), num(r.p), num(r.lambda),    num(r.beta),
          num(r.t),      r.component,    num(r.value),        num(r.std_error),
          std::to_string(r.replicas), r.seed_path};
}

// "master/replica/tag" for one replica, or "master/first-last/tag" for an
// aggregate over a block of replicas.
inline std::string seed_path(std::uint64_t master, std::size_t replicas, std::string_view tag) {
  if (replicas == 1) return fmt::format("{}/0/{}", master, tag);
  return fmt::format("{}/0-{}/{}", master, replicas - 1, tag);
}

}  // namespace perctrap::harness
