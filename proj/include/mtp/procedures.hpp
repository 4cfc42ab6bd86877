#pragma once

// Cutoffs and rejection rules for the single-step procedures: adjusted
// Bonferroni, Sidak, and the k-FWER-controlling Lehmann-Romano family,
// one- and two-sided, with an optional known null-fraction adjustment.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtp/errors.hpp"
#include "mtp/gauss.hpp"

namespace mtp {

/// Significance level strictly inside (0,1).
class Level {
 public:
  explicit Level(double a) : value_(a) {
    if (!(a > 0.0 && a < 1.0)) {
      throw InvalidArgument("alpha must lie strictly in (0,1); got " + std::to_string(a));
    }
  }
  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_;
};

enum class Family { AdjBonferroni, Sidak, LehmannRomano };
enum class Sided { One, Two };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::AdjBonferroni: return "bonferroni";
    case Family::Sidak: return "sidak";
    case Family::LehmannRomano: return "lr";
  }
  return "?";
}

inline const char* sided_name(Sided s) { return s == Sided::One ? "one" : "two"; }

struct ProcedureSpec {
  Family family = Family::AdjBonferroni;
  Sided sided = Sided::One;
  int k = 1;                 // Lehmann-Romano order; unused otherwise
  std::optional<double> p0;  // known limiting fraction of true nulls, in (0,1]

  void validate() const {
    detail::require(k >= 1, "k must be a positive integer; got " + std::to_string(k));
    if (p0.has_value()) {
      detail::require(*p0 > 0.0 && *p0 <= 1.0,
                      "p0 must lie in (0,1]; got " + std::to_string(*p0));
    }
  }
};

struct Cutoff {
  double value = 0.0;
  ProcedureSpec spec;
  std::int64_t n = 0;
  double alpha = 0.0;
};

/// Common cutoff of the procedure at family size n. The two-sided variants
/// use the one-sided formulas with n replaced by 2n; a known p0 multiplies n.
inline Cutoff cutoff(const ProcedureSpec& spec, std::int64_t n, Level alpha) {
  spec.validate();
  detail::require(n >= 1, "n must be a positive integer; got " + std::to_string(n));
  const double p0 = spec.p0.value_or(1.0);
  const double np0 = static_cast<double>(n) * p0;
  detail::require(np0 >= 1.0, "n*p0 must be at least 1; got " + std::to_string(np0));
  const double m = (spec.sided == Sided::Two) ? 2.0 * np0 : np0;

  double tail = 0.0;  // upper-tail probability that defines the cutoff
  switch (spec.family) {
    case Family::AdjBonferroni:
      tail = -std::log1p(-alpha.value()) / m;
      break;
    case Family::Sidak:
      // 1 - (1-alpha)^(1/m), with (1-alpha)^(1/m) = exp(log1p(-alpha)/m)
      tail = -std::expm1(std::log1p(-alpha.value()) / m);
      break;
    case Family::LehmannRomano:
      detail::require(spec.k <= n,
                      "k must not exceed n; got k=" + std::to_string(spec.k) +
                          ", n=" + std::to_string(n));
      tail = static_cast<double>(spec.k) * alpha.value() / m;
      break;
  }
  if (!(tail > 0.0 && tail < 1.0)) {
    throw InvalidArgument("infeasible cutoff: implied tail probability " +
                          std::to_string(tail) + " is outside (0,1)");
  }
  return Cutoff{norm_upper_quantile(tail), spec, n, alpha.value()};
}

struct RejectionSet {
  std::vector<std::int64_t> indices;  // 1-based, sorted ascending
  Cutoff cutoff;
};

/// Decision rule on z-statistics: one-sided rejects X_i > c, two-sided
/// rejects |X_i| > c. Ties with the cutoff are not rejected.
inline RejectionSet apply(const ProcedureSpec& spec, Level alpha,
                          std::span<const double> statistics) {
  detail::require(!statistics.empty(), "statistics must be non-empty");
  for (double x : statistics) {
    if (!std::isfinite(x)) throw InvalidArgument("statistics must all be finite");
  }
  const auto n = static_cast<std::int64_t>(statistics.size());
  RejectionSet out{{}, cutoff(spec, n, alpha)};
  const double c = out.cutoff.value;
  for (std::int64_t i = 0; i < n; ++i) {
    const double v =
        (spec.sided == Sided::Two) ? std::fabs(statistics[i]) : statistics[i];
    if (v > c) out.indices.push_back(i + 1);
  }
  return out;
}

/// c_Sid(n, alpha) - c_Bon(n, alpha); positive, vanishing as n grows.
inline double cutoff_gap(std::int64_t n, Level alpha) {
  const ProcedureSpec bon{Family::AdjBonferroni, Sided::One, 1, std::nullopt};
  const ProcedureSpec sid{Family::Sidak, Sided::One, 1, std::nullopt};
  return cutoff(sid, n, alpha).value - cutoff(bon, n, alpha).value;
}

}  // namespace mtp
