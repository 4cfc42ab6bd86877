#pragma once

// Mean configuration (mu_1 .. mu_n). True nulls are exactly the zero entries;
// the null/alternative index sets are derived, never stored independently.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mtp/errors.hpp"

namespace mtp {

class MeanConfig {
 public:
  explicit MeanConfig(std::vector<double> mu) : mu_(std::move(mu)) {
    detail::require(!mu_.empty(), "mean vector must be non-empty");
    for (double m : mu_) {
      if (!std::isfinite(m)) throw InvalidArgument("means must all be finite");
    }
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(mu_.size()); ++i) {
      (mu_[i] == 0.0 ? null_ : alt_).push_back(i);
    }
  }

  static MeanConfig global_null(std::int64_t n) {
    detail::require(n >= 1, "n must be a positive integer; got " + std::to_string(n));
    return MeanConfig(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  }

  /// First n1 coordinates get the alternative mean, the rest stay null.
  static MeanConfig with_alternatives(std::int64_t n, std::int64_t n1, double value) {
    detail::require(n >= 1, "n must be a positive integer; got " + std::to_string(n));
    detail::require(n1 >= 0 && n1 <= n, "n1 must lie in [0, n]; got " + std::to_string(n1));
    detail::require(value != 0.0 || n1 == 0, "alternative mean must be nonzero");
    std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n1; ++i) mu[static_cast<std::size_t>(i)] = value;
    return MeanConfig(std::move(mu));
  }

  const std::vector<double>& mu() const { return mu_; }
  std::int64_t n() const { return static_cast<std::int64_t>(mu_.size()); }
  std::int64_t n0() const { return static_cast<std::int64_t>(null_.size()); }
  std::int64_t n1() const { return static_cast<std::int64_t>(alt_.size()); }
  const std::vector<std::int64_t>& null_indices() const { return null_; }  // 0-based
  const std::vector<std::int64_t>& alt_indices() const { return alt_; }    // 0-based

 private:
  std::vector<double> mu_;
  std::vector<std::int64_t> null_;
  std::vector<std::int64_t> alt_;
};

}  // namespace mtp
