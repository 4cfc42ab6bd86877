#pragma once

// Standard-normal special functions with tail-accurate complementary forms.
// The complementary cdf is the primitive: cdf() and log_cdf() are defined on
// top of it so that quantities like n * (1 - Phi(u)) keep full relative
// accuracy deep into the tails.

#include <cmath>
#include <limits>
#include <string>

#include "mtp/errors.hpp"

namespace mtp {

namespace detail {

inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;

// erfc via the near-minimax rational approximations of W. J. Cody,
// "Rational Chebyshev approximation for the error function",
// Math. Comp. 23 (1969), pp. 631-637 (the NETLIB CALERF scheme).
// Relative accuracy is a few ulp across the whole double range; results
// decay into subnormals and reach 0 near y = 27.3.
inline double erfc_cody(double x) {
  static constexpr double a[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                                  3.77485237685302021e+02, 3.20937758913846947e+03,
                                  1.85777706184603153e-01};
  static constexpr double b[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                                  1.28261652607737228e+03, 2.84423683343917062e+03};
  static constexpr double c[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                                  6.61191906371416295e+01, 2.98635138197400131e+02,
                                  8.81952221241769090e+02, 1.71204761263407058e+03,
                                  2.05107837782607147e+03, 1.23033935479799725e+03,
                                  2.15311535474403846e-08};
  static constexpr double d[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                                  5.37181101862009858e+02, 1.62138957456669019e+03,
                                  3.29079923573345963e+03, 4.36261909014324716e+03,
                                  3.43936767414372164e+03, 1.23033935480374942e+03};
  static constexpr double p[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                                  1.25781726111229246e-01, 1.60837851487422766e-02,
                                  6.58749161529837803e-04, 1.63153871373020978e-02};
  static constexpr double q[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                                  5.27905102951428412e-01, 6.05183413124413191e-02,
                                  2.33520497626869185e-03};
  static constexpr double kSqrtPiInv = 5.6418958354775628695e-01;

  const double y = std::fabs(x);
  double result;
  if (y <= 0.46875) {
    // erf on the central interval, then complement.
    const double ysq = (y > 1.11e-16) ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    return 1.0 - x * (xnum + a[3]) / (xden + b[3]);
  } else if (y <= 4.0) {
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    // Split exp(-y^2) to avoid the rounding of y*y dominating the result.
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    result *= std::exp(-ysq * ysq) * std::exp(-del);
  } else {
    if (y >= 28.0) {
      result = 0.0;  // exp(-y^2) underflows to 0 here
    } else {
      const double ysqinv = 1.0 / (y * y);
      double xnum = p[5] * ysqinv;
      double xden = ysqinv;
      for (int i = 0; i < 4; ++i) {
        xnum = (xnum + p[i]) * ysqinv;
        xden = (xden + q[i]) * ysqinv;
      }
      result = ysqinv * (xnum + p[4]) / (xden + q[4]);
      result = (kSqrtPiInv - result) / y;
      const double ysq = std::trunc(y * 16.0) / 16.0;
      const double del = (y - ysq) * (y + ysq);
      result *= std::exp(-ysq * ysq) * std::exp(-del);
    }
  }
  return (x < 0.0) ? 2.0 - result : result;
}

inline void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw InvalidArgument(std::string(name) + " must be finite");
  }
}

}  // namespace detail

/// A probability value, kept inside [0,1].
class Probability {
 public:
  explicit Probability(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("probability must lie in [0,1]; got " + std::to_string(v));
    }
  }

  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_;
};

/// Standard-normal density.
inline double norm_pdf(double x) {
  detail::require_finite(x, "x");
  return detail::kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Upper tail 1 - Phi(x), relative accuracy a few ulp while the result is a
/// normalized double (|x| <= 37.5); saturates through subnormals to 0 beyond.
inline Probability norm_cdf_bar(double x) {
  detail::require_finite(x, "x");
  double v = 0.5 * detail::erfc_cody(x * detail::kInvSqrt2);
  if (v > 1.0) v = 1.0;
  return Probability(v);
}

/// Phi(x), defined as the reflected tail so that cdf(-x) == cdf_bar(x) bitwise.
inline Probability norm_cdf(double x) { return norm_cdf_bar(-x); }

/// log Phi(x), finite for every finite x (asymptotic series in the far left
/// tail where Phi itself is not representable).
inline double norm_log_cdf(double x) {
  detail::require_finite(x, "x");
  if (x >= 0.0) {
    return std::log1p(-norm_cdf_bar(x).value());
  }
  if (x > -37.5) {
    return std::log(norm_cdf_bar(-x).value());
  }
  // Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
  const double z = 1.0 / (x * x);
  const double series = -z * (1.0 - z * (3.0 - z * (15.0 - 105.0 * z)));
  return -0.5 * x * x - std::log(-x) - detail::kLogSqrt2Pi + std::log1p(series);
}

/// log(Phi(a) - Phi(b)) for a > b, stable in both the wide-band regime
/// (both tails small) and the narrow/shifted regime (both cdfs small).
inline double norm_log_cdf_diff(double a, double b) {
  if (!(a > b)) throw InvalidArgument("norm_log_cdf_diff requires a > b");
  const double q = norm_cdf_bar(a).value() + norm_cdf_bar(-b).value();
  if (q <= 0.5) return std::log1p(-q);
  const double la = norm_log_cdf(a);
  const double lb = norm_log_cdf(b);
  return la + std::log1p(-std::exp(lb - la));
}

namespace detail {

// Initial estimate for the normal quantile: algorithm AS 241 (PPND16),
// M. J. Wichura, "The percentage points of the normal distribution",
// Appl. Statist. 37 (1988).
inline double quantile_as241(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) *
                    r +
                4.5921953931549871457e+4) *
                   r +
               1.3731693765509461125e+4) *
                  r +
              1.9715909503065514427e+3) *
                 r +
             1.3314166789178437745e+2) *
                r +
            3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) *
                    r +
                2.1213794301586595867e+4) *
                   r +
               5.3941960214247511077e+3) *
                  r +
              6.8718700749205790830e+2) *
                 r +
             4.2313330701600911252e+1) *
                r +
            1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e+0) *
                  r +
              3.64784832476320460504e+0) *
                 r +
             5.76949722146069140550e+0) *
                r +
            4.63033784615654529590e+0) *
               r +
           1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e+0) *
                r +
            2.05319162663775882187e+0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) *
                   r +
              2.65321895265761230930e-2) *
                 r +
             2.96560571828504891230e-1) *
                r +
            1.78482653991729133580e+0) *
               r +
           5.46378491116411436990e+0) *
              r +
          6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return (q < 0.0) ? -val : val;
}

}  // namespace detail

/// Phi^{-1}(p) for p in (0,1): AS 241 initializer plus one Newton step with
/// the residual expressed in the nearer tail, so extreme probabilities keep
/// their relative accuracy.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("quantile probability must lie strictly in (0,1); got " +
                          std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  const double x0 = detail::quantile_as241(p);
  const double q = (p <= 0.5) ? p : 1.0 - p;  // exact for p >= 0.5
  double a = std::fabs(x0);
  const double dens = norm_pdf(a);
  if (dens > 0.0) {
    a += (norm_cdf_bar(a).value() - q) / dens;
  }
  return (p < 0.5) ? -a : a;
}

/// The x with cdf_bar(x) = q; equivalent to quantile(1-q) without forming 1-q.
inline double norm_upper_quantile(double q) { return -norm_quantile(q); }

}  // namespace mtp
