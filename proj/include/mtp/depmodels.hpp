#pragma once

// Correlation-structure models, weak-dependence diagnostics, and exact
// samplers. Product-factor models X_i = lambda_i Z + sqrt(1-lambda_i^2) eps_i
// are the workhorse; explicit matrices go through a Cholesky factor and are
// capped in size since they exist for oracle use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mtp/errors.hpp"
#include "mtp/means.hpp"
#include "mtp/rng.hpp"

namespace mtp {

inline constexpr double kLambdaClamp = 0.99;
inline constexpr std::int64_t kDefaultExplicitSizeLimit = 2000;

struct ScheduleParams {
  double lambda1 = 0.5;
  double delta = 0.5;
};

namespace detail {

struct Independent {};

struct Equicorrelated {
  double rho;
};

struct ProductFactor {
  std::vector<double> lambdas;
  std::optional<ScheduleParams> schedule;  // set when built from the schedule
  int clamped_count = 0;
};

struct ExplicitMatrix {
  std::int64_t n = 0;
  std::vector<double> corr;  // row-major n*n
  std::vector<double> chol;  // lower-triangular, packed rows
};

// In-place Cholesky of a symmetric PD matrix given row-major; returns packed
// lower triangle or throws NumericError.
inline std::vector<double> cholesky_lower(const std::vector<double>& a, std::int64_t n) {
  std::vector<double> L(static_cast<std::size_t>(n * (n + 1) / 2), 0.0);
  auto at = [&L](std::int64_t i, std::int64_t j) -> double& {
    return L[static_cast<std::size_t>(i * (i + 1) / 2 + j)];
  };
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i * n + j)];
      for (std::int64_t k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      if (i == j) {
        if (!(s > 0.0)) {
          throw NumericError("correlation matrix is not positive definite (pivot " +
                             std::to_string(s) + " at index " + std::to_string(i) + ")");
        }
        at(i, j) = std::sqrt(s);
      } else {
        at(i, j) = s / at(j, j);
      }
    }
  }
  return L;
}

}  // namespace detail

class DependenceModel {
 public:
  enum class Kind { Independent, Equicorrelated, ProductFactor, Explicit };

  static DependenceModel independent() { return DependenceModel(detail::Independent{}); }

  static DependenceModel equicorrelated(double rho) {
    detail::require(rho >= 0.0 && rho < 1.0,
                    "rho must lie in [0,1); got " + std::to_string(rho));
    return DependenceModel(detail::Equicorrelated{rho});
  }

  static DependenceModel product_factor(std::vector<double> lambdas,
                                        std::optional<ScheduleParams> schedule = {},
                                        int clamped_count = 0) {
    detail::require(!lambdas.empty(), "lambda vector must be non-empty");
    for (double l : lambdas) {
      detail::require(std::isfinite(l) && l > -1.0 && l < 1.0,
                      "every lambda must lie in (-1,1); got " + std::to_string(l));
    }
    return DependenceModel(
        detail::ProductFactor{std::move(lambdas), schedule, clamped_count});
  }

  static DependenceModel explicit_matrix(
      const std::vector<std::vector<double>>& matrix,
      std::int64_t size_limit = kDefaultExplicitSizeLimit) {
    const auto n = static_cast<std::int64_t>(matrix.size());
    detail::require(n >= 1, "matrix must be non-empty");
    detail::require(n <= size_limit, "explicit matrix size " + std::to_string(n) +
                                         " exceeds the limit " +
                                         std::to_string(size_limit));
    detail::ExplicitMatrix em;
    em.n = n;
    em.corr.resize(static_cast<std::size_t>(n * n));
    for (std::int64_t i = 0; i < n; ++i) {
      detail::require(static_cast<std::int64_t>(matrix[i].size()) == n,
                      "matrix must be square");
      for (std::int64_t j = 0; j < n; ++j) {
        em.corr[static_cast<std::size_t>(i * n + j)] = matrix[i][j];
      }
    }
    for (std::int64_t i = 0; i < n; ++i) {
      detail::require(std::fabs(em.corr[static_cast<std::size_t>(i * n + i)] - 1.0) <= 1e-12,
                      "matrix diagonal must be 1");
      for (std::int64_t j = 0; j < i; ++j) {
        detail::require(std::fabs(em.corr[static_cast<std::size_t>(i * n + j)] -
                                  em.corr[static_cast<std::size_t>(j * n + i)]) <= 1e-12,
                        "matrix must be symmetric");
      }
    }
    em.chol = detail::cholesky_lower(em.corr, n);
    return DependenceModel(std::move(em));
  }

  Kind kind() const { return static_cast<Kind>(v_.index()); }

  const char* kind_name() const {
    switch (kind()) {
      case Kind::Independent: return "independent";
      case Kind::Equicorrelated: return "equicorrelated";
      case Kind::ProductFactor: return "product";
      case Kind::Explicit: return "explicit";
    }
    return "?";
  }

  /// Intrinsic size, when the model has one (product/explicit kinds).
  std::optional<std::int64_t> size() const {
    if (auto* pf = std::get_if<detail::ProductFactor>(&v_)) {
      return static_cast<std::int64_t>(pf->lambdas.size());
    }
    if (auto* em = std::get_if<detail::ExplicitMatrix>(&v_)) return em->n;
    return std::nullopt;
  }

  /// True when the model admits the single-factor conditional form.
  bool has_factor_form() const { return kind() != Kind::Explicit; }

  /// Factor loadings at size n for factor-form models.
  std::vector<double> factor_lambdas(std::int64_t n) const {
    check_size(n);
    switch (kind()) {
      case Kind::Independent:
        return std::vector<double>(static_cast<std::size_t>(n), 0.0);
      case Kind::Equicorrelated: {
        const double l = std::sqrt(std::get<detail::Equicorrelated>(v_).rho);
        return std::vector<double>(static_cast<std::size_t>(n), l);
      }
      case Kind::ProductFactor:
        return std::get<detail::ProductFactor>(v_).lambdas;
      case Kind::Explicit:
        break;
    }
    throw InvalidArgument("explicit-matrix models have no single-factor form");
  }

  double rho() const { return std::get<detail::Equicorrelated>(v_).rho; }

  const std::optional<ScheduleParams>& schedule() const {
    static const std::optional<ScheduleParams> none;
    if (auto* pf = std::get_if<detail::ProductFactor>(&v_)) return pf->schedule;
    return none;
  }

  int clamped_count() const {
    if (auto* pf = std::get_if<detail::ProductFactor>(&v_)) return pf->clamped_count;
    return 0;
  }

  const std::vector<double>& lambdas() const {
    return std::get<detail::ProductFactor>(v_).lambdas;
  }

  /// Model correlation between coordinates i and j (0-based) at size n.
  double correlation(std::int64_t i, std::int64_t j, std::int64_t n) const {
    check_size(n);
    detail::require(i >= 0 && i < n && j >= 0 && j < n, "index out of range");
    if (i == j) return 1.0;
    switch (kind()) {
      case Kind::Independent: return 0.0;
      case Kind::Equicorrelated: return std::get<detail::Equicorrelated>(v_).rho;
      case Kind::ProductFactor: {
        const auto& l = std::get<detail::ProductFactor>(v_).lambdas;
        return l[static_cast<std::size_t>(i)] * l[static_cast<std::size_t>(j)];
      }
      case Kind::Explicit:
        return std::get<detail::ExplicitMatrix>(v_)
            .corr[static_cast<std::size_t>(i * n + j)];
    }
    return 0.0;
  }

  /// Materialized n x n correlation matrix.
  std::vector<std::vector<double>> materialize(std::int64_t n) const {
    check_size(n);
    std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n)));
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            correlation(i, j, n);
      }
    }
    return m;
  }

  void check_size(std::int64_t n) const {
    detail::require(n >= 1, "n must be a positive integer; got " + std::to_string(n));
    if (auto s = size()) {
      detail::require(*s == n, "model has size " + std::to_string(*s) +
                                   " but was used at size " + std::to_string(n));
    }
  }

  const detail::ExplicitMatrix& explicit_data() const {
    return std::get<detail::ExplicitMatrix>(v_);
  }

 private:
  template <typename T>
  explicit DependenceModel(T&& t) : v_(std::forward<T>(t)) {}

  std::variant<detail::Independent, detail::Equicorrelated, detail::ProductFactor,
               detail::ExplicitMatrix>
      v_;
};

/// lambda_1 = lambda1, lambda_i = 1/(log i)^(1+delta) for i >= 2, clamped to
/// kLambdaClamp (the i = 2 entry always exceeds 1 otherwise, since log 2 < 1).
inline DependenceModel build_schedule(double lambda1, double delta, std::int64_t n) {
  detail::require(lambda1 > 0.0 && lambda1 < 1.0,
                  "lambda1 must lie strictly in (0,1); got " + std::to_string(lambda1));
  detail::require(delta > 0.0, "delta must be positive; got " + std::to_string(delta));
  detail::require(n >= 1, "n must be a positive integer; got " + std::to_string(n));
  std::vector<double> lambdas(static_cast<std::size_t>(n));
  lambdas[0] = lambda1;
  int clamped = 0;
  for (std::int64_t i = 2; i <= n; ++i) {
    const double raw = 1.0 / std::pow(std::log(static_cast<double>(i)), 1.0 + delta);
    if (raw > kLambdaClamp) ++clamped;
    lambdas[static_cast<std::size_t>(i - 1)] = std::min(raw, kLambdaClamp);
  }
  return DependenceModel::product_factor(std::move(lambdas),
                                         ScheduleParams{lambda1, delta}, clamped);
}

/// One draw of (X_1..X_n) with X_i ~ N(mu_i, 1) under the model. Draw order
/// is fixed (factor first, then coordinate noise) so substreams reproduce.
inline std::vector<double> sample(const DependenceModel& model, const MeanConfig& means,
                                  RngStream& rng) {
  const std::int64_t n = means.n();
  model.check_size(n);
  std::vector<double> x(static_cast<std::size_t>(n));
  switch (model.kind()) {
    case DependenceModel::Kind::Independent: {
      for (std::int64_t i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = means.mu()[static_cast<std::size_t>(i)] +
                                         rng.next_normal();
      }
      break;
    }
    case DependenceModel::Kind::Equicorrelated:
    case DependenceModel::Kind::ProductFactor: {
      const auto lambdas = model.factor_lambdas(n);
      const double z = rng.next_normal();
      for (std::int64_t i = 0; i < n; ++i) {
        const double l = lambdas[static_cast<std::size_t>(i)];
        const double s = std::sqrt(1.0 - l * l);
        if (!(s > 0.0)) {
          throw NumericError("degenerate factor loading |lambda| = 1 at index " +
                             std::to_string(i + 1));
        }
        x[static_cast<std::size_t>(i)] =
            means.mu()[static_cast<std::size_t>(i)] + l * z + s * rng.next_normal();
      }
      break;
    }
    case DependenceModel::Kind::Explicit: {
      const auto& em = model.explicit_data();
      std::vector<double> g(static_cast<std::size_t>(n));
      for (auto& v : g) v = rng.next_normal();
      for (std::int64_t i = 0; i < n; ++i) {
        double s = means.mu()[static_cast<std::size_t>(i)];
        const std::size_t row = static_cast<std::size_t>(i * (i + 1) / 2);
        for (std::int64_t k = 0; k <= i; ++k) {
          s += em.chol[row + static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
        }
        x[static_cast<std::size_t>(i)] = s;
      }
      break;
    }
  }
  return x;
}

struct WeakDepDiagnostic {
  std::vector<double> rho_m;      // sup-of-lag-m absolute correlations, m = 1..n-1
  std::vector<double> gamma_m;    // tail sups gamma_m = sup_{j>=m} rho_j
  std::vector<double> rho_log_m;  // rho_m * log m
  double gamma = 0.0;             // sup over all lags
  int m0 = 100;                   // window start for the scalar summary
  double max_product = 0.0;       // max of rho_m log m over m in [m0, n-1]
  double trend = 0.0;             // rho_log at the last lag minus at m0
  bool passes = true;             // non-increasing trend
  int clamped_count = 0;          // factor entries sitting at the schedule clamp
};

namespace detail {

// Largest problem size for the generic O(n^2) lag scan.
inline constexpr std::int64_t kGenericDiagnoseLimit = 32768;

inline std::vector<double> lag_sups_product(const std::vector<double>& lam,
                                            std::int64_t n) {
  std::vector<double> rho(static_cast<std::size_t>(n - 1), 0.0);
  // Monotone fast path: |lambda| nonincreasing from the second entry makes the
  // lag supremum attained at i = 1 or i = 2.
  bool monotone = true;
  for (std::size_t i = 1; i + 1 < lam.size() && monotone; ++i) {
    if (std::fabs(lam[i + 1]) > std::fabs(lam[i]) || lam[i] < 0.0) monotone = false;
  }
  if (monotone && !lam.empty() && lam[0] >= 0.0) {
    for (std::int64_t m = 1; m < n; ++m) {
      double best = lam[0] * lam[static_cast<std::size_t>(m)];
      if (m + 2 <= n) {
        best = std::max(best, lam[1] * lam[static_cast<std::size_t>(m + 1)]);
      }
      rho[static_cast<std::size_t>(m - 1)] = best;
    }
    return rho;
  }
  detail::require(n <= kGenericDiagnoseLimit,
                  "generic lag scan is quadratic; size " + std::to_string(n) +
                      " exceeds the limit " + std::to_string(kGenericDiagnoseLimit) +
                      " (only nonincreasing nonnegative factor schedules scale past it)");
  for (std::int64_t m = 1; m < n; ++m) {
    double best = 0.0;
    for (std::int64_t i = 0; i + m < n; ++i) {
      best = std::max(best, std::fabs(lam[static_cast<std::size_t>(i)] *
                                      lam[static_cast<std::size_t>(i + m)]));
    }
    rho[static_cast<std::size_t>(m - 1)] = best;
  }
  return rho;
}

}  // namespace detail

/// Lag-correlation diagnostics: rho_m, tail sups, and the finite-n summary
/// (max of rho_m log m over m >= m0 plus its trend sign).
inline WeakDepDiagnostic diagnose(const DependenceModel& model, std::int64_t n,
                                  int m0 = 100) {
  model.check_size(n);
  detail::require(n >= 2, "diagnostics need n >= 2");
  detail::require(m0 >= 1, "m0 must be positive");
  WeakDepDiagnostic d;
  d.m0 = m0;
  d.clamped_count = model.clamped_count();

  switch (model.kind()) {
    case DependenceModel::Kind::Independent:
      d.rho_m.assign(static_cast<std::size_t>(n - 1), 0.0);
      break;
    case DependenceModel::Kind::Equicorrelated:
      d.rho_m.assign(static_cast<std::size_t>(n - 1), model.rho());
      break;
    case DependenceModel::Kind::ProductFactor:
      d.rho_m = detail::lag_sups_product(model.lambdas(), n);
      break;
    case DependenceModel::Kind::Explicit: {
      d.rho_m.assign(static_cast<std::size_t>(n - 1), 0.0);
      const auto& em = model.explicit_data();
      for (std::int64_t m = 1; m < n; ++m) {
        double best = 0.0;
        for (std::int64_t i = 0; i + m < n; ++i) {
          best = std::max(best,
                          std::fabs(em.corr[static_cast<std::size_t>(i * n + i + m)]));
        }
        d.rho_m[static_cast<std::size_t>(m - 1)] = best;
      }
      break;
    }
  }

  const auto lags = static_cast<std::int64_t>(d.rho_m.size());
  d.gamma_m.resize(d.rho_m.size());
  double tail = 0.0;
  for (std::int64_t m = lags; m >= 1; --m) {
    tail = std::max(tail, d.rho_m[static_cast<std::size_t>(m - 1)]);
    d.gamma_m[static_cast<std::size_t>(m - 1)] = tail;
  }
  d.gamma = d.gamma_m.empty() ? 0.0 : d.gamma_m.front();

  d.rho_log_m.resize(d.rho_m.size());
  for (std::int64_t m = 1; m <= lags; ++m) {
    d.rho_log_m[static_cast<std::size_t>(m - 1)] =
        d.rho_m[static_cast<std::size_t>(m - 1)] * std::log(static_cast<double>(m));
  }

  const std::int64_t lo = std::min<std::int64_t>(m0, lags);
  d.max_product = 0.0;
  for (std::int64_t m = lo; m <= lags; ++m) {
    d.max_product = std::max(d.max_product, d.rho_log_m[static_cast<std::size_t>(m - 1)]);
  }
  d.trend = d.rho_log_m[static_cast<std::size_t>(lags - 1)] -
            d.rho_log_m[static_cast<std::size_t>(lo - 1)];
  d.passes = d.trend <= 0.0;
  return d;
}

}  // namespace mtp
