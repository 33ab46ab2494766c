#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace perctrap {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

// Cluster exploration visited more sites than Params::cluster_cap allows.
class ClusterCapExceeded : public Error {
 public:
  explicit ClusterCapExceeded(std::size_t cap)
      : Error("cluster exploration exceeded cap of " + std::to_string(cap) +
              " sites (p too close to criticality or cap too small)"),
        cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

// A lattice coordinate left the packable box of +-2^20 per axis.
class CoordinateOutOfRange : public Error {
 public:
  using Error::Error;
};

// A holding time or clock value left the representable range.
class HorizonOverflow : public Error {
 public:
  using Error::Error;
};

// A time or step query beyond what a trajectory recorded.
class OutOfHorizon : public Error {
 public:
  using Error::Error;
};

// A closed-form quantity requested outside its domain of validity.
class NotApplicable : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class InsufficientTail : public Error {
 public:
  using Error::Error;
};

}  // namespace perctrap
