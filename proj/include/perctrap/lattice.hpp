#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "perctrap/errors.hpp"

namespace perctrap {

inline constexpr int kMaxDim = 3;

// Coordinates are packed into 21 bits per axis: valid range is [-2^20, 2^20).
inline constexpr std::int32_t kAxisHalfRange = 1 << 20;

// A point of Z^d, d <= 3. Unused trailing coordinates stay zero.
struct Site {
  std::array<std::int32_t, kMaxDim> coord{};

  constexpr std::int32_t operator[](int k) const { return coord[k]; }
  constexpr std::int32_t& operator[](int k) { return coord[k]; }

  friend constexpr bool operator==(const Site&, const Site&) = default;
};

// One of the 2d signed unit vectors. Index order is +e1, -e1, +e2, -e2, ...
struct Direction {
  int index = 0;

  constexpr int axis() const { return index / 2; }
  constexpr int sign() const { return (index % 2 == 0) ? 1 : -1; }
  constexpr Direction reversed() const { return Direction{index ^ 1}; }
};

inline constexpr int direction_count(int dim) { return 2 * dim; }

inline Site step(Site x, Direction e) {
  x[e.axis()] += e.sign();
  return x;
}

// Dot product of a real vector with a lattice point over the first dim axes.
template <class Vec>
double dot(const Vec& v, const Site& x, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += v[k] * static_cast<double>(x[k]);
  return s;
}

template <class Vec>
double dot(const Vec& v, Direction e) {
  return v[e.axis()] * static_cast<double>(e.sign());
}

inline std::int64_t l1_norm(const Site& x, int dim) {
  std::int64_t s = 0;
  for (int k = 0; k < dim; ++k) s += std::llabs(static_cast<std::int64_t>(x[k]));
  return s;
}

inline double euclidean_norm(const Site& x, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += static_cast<double>(x[k]) * x[k];
  return std::sqrt(s);
}

// Packs a site into a 63-bit key. Throws CoordinateOutOfRange outside the box.
inline std::uint64_t pack(const Site& x) {
  std::uint64_t key = 0;
  for (int k = 0; k < kMaxDim; ++k) {
    const std::int32_t c = x[k];
    if (c < -kAxisHalfRange || c >= kAxisHalfRange) {
      throw CoordinateOutOfRange("coordinate " + std::to_string(c) + " on axis " +
                                 std::to_string(k + 1) + " outside [-2^20, 2^20)");
    }
    key |= static_cast<std::uint64_t>(c + kAxisHalfRange) << (21 * k);
  }
  return key;
}

inline Site unpack(std::uint64_t key) {
  Site x;
  for (int k = 0; k < kMaxDim; ++k) {
    x[k] = static_cast<std::int32_t>((key >> (21 * k)) & ((1u << 21) - 1)) - kAxisHalfRange;
  }
  return x;
}

}  // namespace perctrap
