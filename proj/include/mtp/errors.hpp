#pragma once

#include <stdexcept>
#include <string>

namespace mtp {

/// Precondition / parameter violation. The CLI maps this to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical or model failure (degenerate factor, failed factorization,
/// infeasible configuration discovered mid-computation). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace detail

}  // namespace mtp
