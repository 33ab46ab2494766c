#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Counter-based pseudo-random functions. Every variate in the library is a pure
// function of (key, counter), so results never depend on query order or on
// how work is split across threads.

namespace perctrap::rng {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash(std::uint64_t key, std::uint64_t counter) {
  return mix64(mix64(key) ^ mix64(counter ^ 0xD1B54A32D192ED03ull));
}

constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash(hash(a, b), c);
}

// FNV-1a over a tag, used to turn stream names into 64-bit constants.
constexpr std::uint64_t tag(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Seed for stream `stream_tag` of replica `index` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::string_view stream_tag) {
  return hash(master, index, tag(stream_tag));
}

// Uniform in [0,1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in (0,1), never hits either endpoint.
constexpr double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Mean-one exponential by inverse CDF; strictly positive.
inline double exponential(std::uint64_t bits) { return -std::log(to_open_unit(bits)); }

}  // namespace perctrap::rng
