#pragma once

// Closed-form asymptotics: limiting FWER / k-FWER values, the convergence
// rate bound R_n, the extreme-quantile expansion, and the finite-n proxies
// for the power conditions. The conditions themselves are statements about
// limits, so the checkers return the computable quantity together with an
// explicitly named proxy verdict.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mtp/errors.hpp"
#include "mtp/procedures.hpp"

namespace mtp {

/// P(Poisson(tau) <= k-1) = e^{-tau} sum_{s<k} tau^s / s!
inline double truncated_poisson_cdf(double tau, int k) {
  detail::require(tau >= 0.0 && std::isfinite(tau),
                  "tau must be finite and nonnegative; got " + std::to_string(tau));
  detail::require(k >= 1, "k must be a positive integer; got " + std::to_string(k));
  double term = std::exp(-tau);
  double sum = term;
  for (int s = 1; s < k; ++s) {
    term *= tau / s;
    sum += term;
  }
  return std::min(sum, 1.0);
}

/// Limit of P(k-th largest <= u_n) when d_n(1-Phi(u_n)) -> tau; the
/// absolute-value variant doubles tau.
inline double kth_max_limit(double tau, int k, Sided sided = Sided::One) {
  return truncated_poisson_cdf(sided == Sided::Two ? 2.0 * tau : tau, k);
}

/// Limiting FWER of the procedure as n grows with n0/n -> 1: alpha for the
/// adjusted Bonferroni and Sidak families, the truncated-Poisson expression
/// for Lehmann-Romano(k).
inline double limiting_fwer(const ProcedureSpec& spec, Level alpha) {
  spec.validate();
  switch (spec.family) {
    case Family::AdjBonferroni:
    case Family::Sidak:
      return alpha.value();
    case Family::LehmannRomano:
      return 1.0 - truncated_poisson_cdf(spec.k * alpha.value(), spec.k);
  }
  return alpha.value();
}

struct RateParams {
  double nu = 0.3;                // exponent, 0 < nu < (1-gamma)/(1+gamma)
  double gamma = 0.0;             // sup of lag correlations
  std::vector<double> gamma_seq;  // tail sups gamma_m, m = 1,2,...
  double n0_frac = 1.0;           // n0/n
  std::int64_t n = 2;
};

/// R_n = max{ n^{(1+nu-2)/(1+gamma)} (log n)^{1/(1+gamma)},
///            gamma_{[n^nu]} log n^nu, 1 - n0/n, 1/n }.
inline double rate_bound(const RateParams& p) {
  detail::require(p.gamma >= 0.0 && p.gamma < 1.0,
                  "gamma must lie in [0,1); got " + std::to_string(p.gamma));
  detail::require(p.nu > 0.0 && p.nu < (1.0 - p.gamma) / (1.0 + p.gamma),
                  "nu must lie in (0, (1-gamma)/(1+gamma)); got " + std::to_string(p.nu));
  detail::require(p.n >= 2, "n must be at least 2; got " + std::to_string(p.n));
  detail::require(p.n0_frac >= 0.0 && p.n0_frac <= 1.0,
                  "n0/n must lie in [0,1]; got " + std::to_string(p.n0_frac));
  const double nd = static_cast<double>(p.n);
  const auto idx = static_cast<std::int64_t>(std::floor(std::pow(nd, p.nu)));
  detail::require(idx >= 1 && idx <= static_cast<std::int64_t>(p.gamma_seq.size()),
                  "gamma_seq must cover index [n^nu] = " + std::to_string(idx) +
                      "; it has length " + std::to_string(p.gamma_seq.size()));
  const double t1 = std::pow(nd, (1.0 + p.nu - 2.0) / (1.0 + p.gamma)) *
                    std::pow(std::log(nd), 1.0 / (1.0 + p.gamma));
  const double t2 =
      p.gamma_seq[static_cast<std::size_t>(idx - 1)] * (p.nu * std::log(nd));
  const double t3 = 1.0 - p.n0_frac;
  const double t4 = 1.0 / nd;
  return std::max({t1, t2, t3, t4});
}

/// Two-term expansion of Phi^{-1}(1 - beta/n) around sqrt(2 log n)
/// (without the O(1/log n) remainder).
inline double cramer_quantile(double beta, std::int64_t n) {
  detail::require(std::isfinite(beta) && beta > 0.0,
                  "beta must be positive; got " + std::to_string(beta));
  detail::require(n >= 3, "n must be at least 3; got " + std::to_string(n));
  const double L = std::log(static_cast<double>(n));
  const double root = std::sqrt(2.0 * L);
  return root - (std::log(L) + std::log(4.0 * M_PI) + std::log(beta)) / (2.0 * root);
}

struct T41Check {
  double ratio = 0.0;  // sqrt(2 log n1) / mu_max
  bool satisfied_proxy = false;
};

/// Finite-n proxy for the power condition lim sqrt(2 log n1)/mu_(n1) < 1.
inline T41Check power_condition_t41(std::int64_t n1, double mu_max) {
  detail::require(n1 >= 2, "n1 must be at least 2; got " + std::to_string(n1));
  detail::require(std::isfinite(mu_max) && mu_max > 0.0,
                  "mu_max must be positive; got " + std::to_string(mu_max));
  const double ratio = std::sqrt(2.0 * std::log(static_cast<double>(n1))) / mu_max;
  return {ratio, ratio < 1.0};
}

struct T42Check {
  double growth = 0.0;       // (n1/n) e^{mu sqrt(2 log n)}
  double growth_half = 0.0;  // same at n/2 under proportional n1 scaling
  bool satisfied_proxy = false;
};

/// Finite-n proxy for the power condition lim (n1/n) e^{mu sqrt(2 log n)} = inf:
/// the growth must strictly increase from n/2 to n at a fixed n1/n ratio.
inline T42Check power_condition_t42(std::int64_t n, std::int64_t n1, double mu_min) {
  detail::require(n >= 2, "n must be at least 2; got " + std::to_string(n));
  detail::require(n1 >= 1 && n1 <= n,
                  "n1 must lie in [1, n]; got " + std::to_string(n1));
  detail::require(std::isfinite(mu_min) && mu_min > 0.0,
                  "mu_min must be positive; got " + std::to_string(mu_min));
  const double frac = static_cast<double>(n1) / static_cast<double>(n);
  const double g = frac * std::exp(mu_min * std::sqrt(2.0 * std::log(static_cast<double>(n))));
  const double gh =
      frac * std::exp(mu_min * std::sqrt(2.0 * std::log(static_cast<double>(n) / 2.0)));
  return {g, gh, g > gh};
}

}  // namespace mtp
