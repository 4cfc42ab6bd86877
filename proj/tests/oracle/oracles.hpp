#pragma once

// Independent oracles used by the test suites. These deliberately avoid the
// library's solver paths: the quantile oracle is plain bisection on the cdf,
// the integral oracle is adaptive Simpson quadrature, and the Poisson-binomial
// oracle is the full O(n^2) convolution.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace mtp::testoracle {

/// Bisection inverse of a monotone increasing function, to interval width eps.
inline double bisect_inverse(const std::function<double(double)>& f, double target,
                             double lo, double hi, double eps = 1e-15) {
  while (hi - lo > eps) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a,b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = detail::simpson(a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// P(at least k successes) for independent Bernoulli(q_i), full convolution.
inline double poisson_binomial_tail_conv(int k, const std::vector<double>& q) {
  const int n = static_cast<int>(q.size());
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  pmf[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j >= 1; --j) {
      pmf[j] = pmf[j] * (1.0 - q[i]) + pmf[j - 1] * q[i];
    }
    pmf[0] *= 1.0 - q[i];
  }
  double below = 0.0;
  for (int j = 0; j < k && j <= n; ++j) below += pmf[j];
  return 1.0 - below;
}

}  // namespace mtp::testoracle
