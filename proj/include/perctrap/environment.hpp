#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "perctrap/errors.hpp"
#include "perctrap/lattice.hpp"
#include "perctrap/parallel.hpp"
#include "perctrap/params.hpp"
#include "perctrap/random.hpp"

namespace perctrap {

enum class SiteState : std::uint8_t { closed = 0, open = 1 };

// i.i.d. Bernoulli(p) sites as a pure function of (seed, packed coordinates).
class BernoulliField {
 public:
  BernoulliField(std::uint64_t seed, double p) : seed_(seed), p_(p) {}

  bool is_open(const Site& x) const { return rng::to_unit(rng::hash(seed_, pack(x))) < p_; }

  std::uint64_t seed() const { return seed_; }
  double p() const { return p_; }

 private:
  std::uint64_t seed_;
  double p_;
};

// Breadth-first exploration of the open cluster containing `origin`, which
// must itself be open. Returns the packed keys of every site in the cluster.
template <class IsOpen>
std::vector<std::uint64_t> explore_cluster(const Site& origin, int dim, std::size_t cap,
                                           IsOpen&& is_open) {
  std::vector<std::uint64_t> cluster;
  std::unordered_set<std::uint64_t> visited;
  std::vector<Site> frontier{origin};
  visited.insert(pack(origin));
  cluster.push_back(pack(origin));
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const Site x = frontier[head];
    for (int j = 0; j < direction_count(dim); ++j) {
      const Site y = step(x, Direction{j});
      const std::uint64_t key = pack(y);
      if (visited.contains(key) || !is_open(y)) continue;
      visited.insert(key);
      if (cluster.size() >= cap) throw ClusterCapExceeded(cap);
      cluster.push_back(key);
      frontier.push_back(y);
    }
  }
  return cluster;
}

// Lazily materialized site percolation on Z^d with a memoized cluster-size
// oracle. The cache is internally synchronized, so one environment may be
// queried from several threads; answers never depend on cache state.
template <class Field = BernoulliField>
class BasicEnvironment {
 public:
  BasicEnvironment(Params params, Field field) : params_(std::move(params)), field_(std::move(field)) {
    validate(params_);
  }

  BasicEnvironment(const BasicEnvironment&) = delete;
  BasicEnvironment& operator=(const BasicEnvironment&) = delete;

  const Params& params() const { return params_; }
  int dim() const { return params_.dim; }
  const Field& field() const { return field_; }

  bool is_open(const Site& x) const { return field_.is_open(x); }

  std::uint32_t cluster_size(const Site& x) const {
    if (!field_.is_open(x)) return 0;
    const std::uint64_t key = pack(x);
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const auto cluster = explore_cluster(x, params_.dim, params_.cluster_cap,
                                         [this](const Site& y) { return field_.is_open(y); });
    const auto size = static_cast<std::uint32_t>(cluster.size());
    std::lock_guard lock(mutex_);
    for (std::uint64_t k : cluster) cache_.emplace(k, size);
    return size;
  }

  void clear_cache() {
    std::lock_guard lock(mutex_);
    cache_.clear();
  }

  std::size_t cached_sites() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

  // Debug dump of every cached open site as "x_1 ... x_d size", sorted by key.
  void dump_clusters(std::ostream& out) const {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
    {
      std::lock_guard lock(mutex_);
      entries.assign(cache_.begin(), cache_.end());
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [key, size] : entries) {
      const Site x = unpack(key);
      for (int k = 0; k < params_.dim; ++k) out << x[k] << ' ';
      out << size << '\n';
    }
  }

 private:
  Params params_;
  Field field_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::uint32_t> cache_;
};

using Environment = BasicEnvironment<BernoulliField>;

inline std::shared_ptr<Environment> make_environment(const Params& params) {
  return std::make_shared<Environment>(params, BernoulliField(params.seed, params.p));
}

template <class Field>
SiteState site_state(const BasicEnvironment<Field>& env, const Site& x) {
  return env.is_open(x) ? SiteState::open : SiteState::closed;
}

template <class Field>
std::uint32_t cluster_size(const BasicEnvironment<Field>& env, const Site& x) {
  return env.cluster_size(x);
}

// Environment seed of replica `index` under master seed `master`.
inline std::uint64_t environment_seed(std::uint64_t master, std::uint64_t index) {
  return rng::derive_seed(master, index, "environment");
}

// M independent draws of C_0, replica i using a fresh environment keyed by
// environment_seed(params.seed, i).
inline std::vector<std::uint32_t> sample_cluster_sizes(const Params& params, std::size_t replicas,
                                                       unsigned workers = 1) {
  validate(params);
  if (replicas < 1) throw InvalidParams("sample_cluster_sizes needs at least one replica");
  std::vector<std::uint32_t> sizes(replicas);
  parallel_for(replicas, workers, [&](std::size_t i) {
    const BernoulliField field(environment_seed(params.seed, i), params.p);
    const Site origin{};
    if (!field.is_open(origin)) {
      sizes[i] = 0;
      return;
    }
    sizes[i] = static_cast<std::uint32_t>(
        explore_cluster(origin, params.dim, params.cluster_cap,
                        [&field](const Site& y) { return field.is_open(y); })
            .size());
  });
  return sizes;
}

}  // namespace perctrap
