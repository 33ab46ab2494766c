#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <memory>
#include <set>
#include <unordered_set>

#include "perctrap/perctrap.hpp"

namespace perctrap::testing {

// Site field with an explicit list of open sites.
struct ExplicitField {
  std::unordered_set<std::uint64_t> open;

  ExplicitField(std::initializer_list<Site> sites) {
    for (const auto& s : sites) open.insert(pack(s));
  }
  bool is_open(const Site& x) const { return open.contains(pack(x)); }
};

// Degenerate generator: every site has the same state.
struct ConstantField {
  bool value = true;
  bool is_open(const Site&) const { return value; }
};

inline Site site1(int x) { return Site{{x, 0, 0}}; }
inline Site site2(int x, int y) { return Site{{x, y, 0}}; }

inline Params params_1d(double p, double lambda, double beta, std::uint64_t seed = 42) {
  Params params;
  params.dim = 1;
  params.p = p;
  params.lambda = lambda;
  params.beta = beta;
  params.seed = seed;
  return params;
}

// Cluster size by a plain flood fill over std::set, independent of the
// library's exploration and cache.
template <class IsOpen>
std::size_t flood_fill_size(const Site& origin, int dim, IsOpen&& is_open) {
  if (!is_open(origin)) return 0;
  auto key = [](const Site& s) { return std::make_tuple(s[0], s[1], s[2]); };
  std::set<std::tuple<int, int, int>> seen{key(origin)};
  std::deque<Site> queue{origin};
  while (!queue.empty()) {
    Site x = queue.front();
    queue.pop_front();
    for (int k = 0; k < dim; ++k) {
      for (int s : {-1, 1}) {
        Site y = x;
        y[k] += s;
        if (is_open(y) && seen.insert(key(y)).second) queue.push_back(y);
      }
    }
  }
  return seen.size();
}

// Binomial 3-sigma check for an empirical proportion.
inline bool within_binomial_3sigma(double observed, double expected, std::size_t trials) {
  const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
  return std::abs(observed - expected) <= 3.0 * sigma;
}

}  // namespace perctrap::testing
