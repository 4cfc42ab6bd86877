#pragma once

// Monte-Carlo estimation of FWER, k-FWER, and AnyPwr. Factor-correlation
// models use the conditional (Rao-Blackwellized) estimators: only the shared
// factor Z is simulated, the inner probability is computed in closed form
// per replicate. A full-sampling brute-force estimator serves as the
// independent oracle, and the extreme-value limit verifier closes the loop
// against the truncated-Poisson limits.
//
// Determinism contract: replicate r consumes the substream (seed, r) and
// results are reduced in replicate order, so any thread count reproduces the
// serial run bitwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mtp/asym.hpp"
#include "mtp/depmodels.hpp"
#include "mtp/errors.hpp"
#include "mtp/means.hpp"
#include "mtp/procedures.hpp"
#include "mtp/rng.hpp"

namespace mtp {

enum class Metric { Fwer, KFwer, AnyPwr };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Fwer: return "fwer";
    case Metric::KFwer: return "kfwer";
    case Metric::AnyPwr: return "power";
  }
  return "?";
}

struct ModelSummary {
  std::string kind;
  std::optional<double> lambda1;  // schedule parameters, when the model has them
  std::optional<double> delta;
  std::optional<double> rho;
};

inline ModelSummary summarize(const DependenceModel& model) {
  ModelSummary s;
  s.kind = model.kind_name();
  if (const auto& sched = model.schedule()) {
    s.lambda1 = sched->lambda1;
    s.delta = sched->delta;
  }
  if (model.kind() == DependenceModel::Kind::Equicorrelated) s.rho = model.rho();
  return s;
}

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  Metric metric = Metric::Fwer;
  ProcedureSpec spec;
  double alpha = 0.0;
  ModelSummary model;
  std::int64_t n = 0;
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;
};

namespace detail {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Replicate-order reduction. The variance pass is shifted by the first value
// so a constant sample yields exactly zero standard error.
inline MeanSe reduce_replicates(const std::vector<double>& vals) {
  const auto r = static_cast<double>(vals.size());
  double sum = 0.0;
  for (double v : vals) sum += v;
  MeanSe out;
  out.mean = sum / r;
  if (vals.size() > 1) {
    double sd = 0.0;
    double sd2 = 0.0;
    for (double v : vals) {
      const double d = v - vals.front();
      sd += d;
      sd2 += d * d;
    }
    const double var = std::max(0.0, (sd2 - sd * sd / r) / (r - 1.0));
    out.se = std::sqrt(var / r);
  }
  return out;
}

// Evaluates fn(r) for r in [0, reps) into a slot vector; parallel schedules
// write disjoint contiguous chunks and cannot affect the values.
template <typename Fn>
std::vector<double> run_replicates(std::int64_t reps, int threads, const Fn& fn) {
  require(reps >= 1, "replicates must be a positive integer; got " + std::to_string(reps));
  std::vector<double> vals(static_cast<std::size_t>(reps));
  const int t = std::clamp(threads, 1, 256);
  if (t == 1 || reps < 2 * t) {
    for (std::int64_t r = 0; r < reps; ++r) vals[static_cast<std::size_t>(r)] = fn(r);
    return vals;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(t));
  const std::int64_t chunk = (reps + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi]() {
      try {
        for (std::int64_t r = lo; r < hi; ++r) vals[static_cast<std::size_t>(r)] = fn(r);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return vals;
}

// Per-index data for the conditional product over a chosen index set:
// the term argument is (hi - lambda z) * inv_s (and the lower band edge
// (lo - lambda z) * inv_s for two-sided rules).
struct CondSetup {
  std::vector<double> lam;
  std::vector<double> inv_s;
  std::vector<double> hi;
  std::vector<double> lo;
  bool two_sided = false;
};

inline CondSetup make_cond_setup(const DependenceModel& model, const MeanConfig& means,
                                 const std::vector<std::int64_t>& indices, double tau,
                                 bool two_sided, bool shift_by_mean) {
  if (!model.has_factor_form()) {
    throw InvalidArgument(
        "conditional estimators need a factor-form model "
        "(independent, equicorrelated, or product)");
  }
  const auto lambdas = model.factor_lambdas(means.n());
  CondSetup cs;
  cs.two_sided = two_sided;
  cs.lam.reserve(indices.size());
  cs.inv_s.reserve(indices.size());
  cs.hi.reserve(indices.size());
  if (two_sided) cs.lo.reserve(indices.size());
  for (std::int64_t i : indices) {
    const double l = lambdas[static_cast<std::size_t>(i)];
    const double s2 = (1.0 - l) * (1.0 + l);
    if (!(s2 > 0.0)) {
      throw NumericError("degenerate factor loading |lambda| = 1 at index " +
                         std::to_string(i + 1));
    }
    const double mu = shift_by_mean ? means.mu()[static_cast<std::size_t>(i)] : 0.0;
    cs.lam.push_back(l);
    cs.inv_s.push_back(1.0 / std::sqrt(s2));
    cs.hi.push_back(tau - mu);
    if (two_sided) cs.lo.push_back(-tau - mu);
  }
  return cs;
}

// log prod_i P(coordinate i stays below the cutoff | Z = z).
inline double log_conditional_product(const CondSetup& cs, double z) {
  double s = 0.0;
  const std::size_t m = cs.lam.size();
  if (!cs.two_sided) {
    for (std::size_t t = 0; t < m; ++t) {
      s += norm_log_cdf((cs.hi[t] - cs.lam[t] * z) * cs.inv_s[t]);
    }
  } else {
    for (std::size_t t = 0; t < m; ++t) {
      s += norm_log_cdf_diff((cs.hi[t] - cs.lam[t] * z) * cs.inv_s[t],
                             (cs.lo[t] - cs.lam[t] * z) * cs.inv_s[t]);
    }
  }
  return s;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline Estimate finish(std::vector<double> vals, Metric metric, const ProcedureSpec& spec,
                       Level alpha, const DependenceModel& model, const MeanConfig& means,
                       std::uint64_t seed) {
  const MeanSe ms = reduce_replicates(vals);
  Estimate e;
  e.value = clamp01(ms.mean);
  e.std_error = ms.se;
  e.replicates = static_cast<std::int64_t>(vals.size());
  e.seed = seed;
  e.metric = metric;
  e.spec = spec;
  e.alpha = alpha.value();
  e.model = summarize(model);
  e.n = means.n();
  e.n0 = means.n0();
  e.n1 = means.n1();
  return e;
}

}  // namespace detail

/// P(at least k successes) for independent Bernoulli(q_i): exact truncated
/// scheme, O(|q| k): log-space survival product plus the first k-1 elementary
/// symmetric functions of the odds.
inline double poisson_binomial_tail(int k, std::span<const double> q) {
  detail::require(k >= 1, "k must be a positive integer; got " + std::to_string(k));
  constexpr double kQMax = 1.0 - 0x1.0p-53;
  double logP0 = 0.0;
  std::vector<double> e(static_cast<std::size_t>(k), 0.0);
  e[0] = 1.0;
  for (double qi : q) {
    detail::require(qi >= 0.0 && qi <= 1.0, "success probabilities must lie in [0,1]");
    qi = std::min(qi, kQMax);
    const double lt = std::log1p(-qi);
    logP0 += lt;
    const double odds = qi / std::exp(lt);
    for (int j = std::min<int>(k - 1, static_cast<int>(q.size())); j >= 1; --j) {
      e[static_cast<std::size_t>(j)] += odds * e[static_cast<std::size_t>(j - 1)];
    }
  }
  double eSum = 0.0;
  for (double v : e) eSum += v;
  return detail::clamp01(1.0 - std::exp(logP0) * eSum);
}

/// Conditional FWER estimator: P(some true null rejected) for factor models,
/// averaging the closed-form conditional product over Monte-Carlo draws of Z.
inline Estimate fwer_conditional(const DependenceModel& model, const ProcedureSpec& spec,
                                 Level alpha, const MeanConfig& means,
                                 std::int64_t replicates, std::uint64_t seed,
                                 int threads = 1) {
  const Cutoff c = cutoff(spec, means.n(), alpha);
  const auto cs = detail::make_cond_setup(model, means, means.null_indices(), c.value,
                                          spec.sided == Sided::Two, false);
  auto vals = detail::run_replicates(replicates, threads, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    return 1.0 - std::exp(detail::log_conditional_product(cs, rng.next_normal()));
  });
  return detail::finish(std::move(vals), Metric::Fwer, spec, alpha, model, means, seed);
}

/// Conditional k-FWER estimator: P(at least k true nulls rejected). Given Z
/// the exceedance indicators are independent Bernoulli, so the tail is the
/// exact truncated Poisson-binomial per replicate. k = 1 reproduces
/// fwer_conditional bitwise on identical seeds.
inline Estimate kfwer_conditional(const DependenceModel& model, int k,
                                  ProcedureSpec spec, Level alpha,
                                  const MeanConfig& means, std::int64_t replicates,
                                  std::uint64_t seed, int threads = 1) {
  detail::require(k >= 1, "k must be a positive integer; got " + std::to_string(k));
  detail::require(k <= means.n0(), "k = " + std::to_string(k) +
                                       " exceeds the number of true nulls n0 = " +
                                       std::to_string(means.n0()));
  spec.k = k;
  const Cutoff c = cutoff(spec, means.n(), alpha);
  const bool two = spec.sided == Sided::Two;
  const auto cs =
      detail::make_cond_setup(model, means, means.null_indices(), c.value, two, false);
  constexpr double kQMax = 1.0 - 0x1.0p-53;

  auto vals = detail::run_replicates(replicates, threads, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    const double z = rng.next_normal();
    double s = 0.0;
    std::vector<double> e(static_cast<std::size_t>(k), 0.0);
    e[0] = 1.0;
    const std::size_t m = cs.lam.size();
    for (std::size_t t = 0; t < m; ++t) {
      const double a = (cs.hi[t] - cs.lam[t] * z) * cs.inv_s[t];
      double lt = two ? norm_log_cdf_diff(a, (cs.lo[t] - cs.lam[t] * z) * cs.inv_s[t])
                      : norm_log_cdf(a);
      double q = -std::expm1(lt);
      if (q > kQMax) {
        q = kQMax;
        lt = std::log1p(-q);
      }
      s += lt;
      const double odds = q / std::exp(lt);
      for (int j = std::min<int>(k - 1, static_cast<int>(t) + 1); j >= 1; --j) {
        e[static_cast<std::size_t>(j)] += odds * e[static_cast<std::size_t>(j - 1)];
      }
    }
    double eSum = 0.0;
    for (double v : e) eSum += v;
    return detail::clamp01(1.0 - std::exp(s) * eSum);
  });
  auto est =
      detail::finish(std::move(vals), Metric::KFwer, spec, alpha, model, means, seed);
  return est;
}

/// Conditional AnyPwr estimator: P(at least one false null rejected).
inline Estimate power_conditional(const DependenceModel& model, const ProcedureSpec& spec,
                                  Level alpha, const MeanConfig& means,
                                  std::int64_t replicates, std::uint64_t seed,
                                  int threads = 1) {
  detail::require(means.n1() >= 1, "power needs at least one false null (n1 >= 1)");
  const Cutoff c = cutoff(spec, means.n(), alpha);
  const auto cs = detail::make_cond_setup(model, means, means.alt_indices(), c.value,
                                          spec.sided == Sided::Two, true);
  auto vals = detail::run_replicates(replicates, threads, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    return 1.0 - std::exp(detail::log_conditional_product(cs, rng.next_normal()));
  });
  return detail::finish(std::move(vals), Metric::AnyPwr, spec, alpha, model, means, seed);
}

namespace detail {

inline Estimate bruteforce(const DependenceModel& model, const ProcedureSpec& spec,
                           Level alpha, const MeanConfig& means, std::int64_t replicates,
                           std::uint64_t seed, int threads, Metric metric, int k) {
  const Cutoff c = cutoff(spec, means.n(), alpha);
  const bool two = spec.sided == Sided::Two;
  const auto& idx =
      (metric == Metric::AnyPwr) ? means.alt_indices() : means.null_indices();
  auto vals = run_replicates(replicates, threads, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    const auto x = sample(model, means, rng);
    int count = 0;
    for (std::int64_t i : idx) {
      const double v = two ? std::fabs(x[static_cast<std::size_t>(i)])
                           : x[static_cast<std::size_t>(i)];
      if (v > c.value && ++count >= k) break;
    }
    return count >= k ? 1.0 : 0.0;
  });
  return finish(std::move(vals), metric, spec, alpha, model, means, seed);
}

}  // namespace detail

/// Full-sampling FWER / k-FWER oracle: draws whole vectors, applies the
/// decision rule, averages the exceedance indicator. For Lehmann-Romano
/// specs the indicator is "at least spec.k true-null rejections".
inline Estimate fwer_bruteforce(const DependenceModel& model, const ProcedureSpec& spec,
                                Level alpha, const MeanConfig& means,
                                std::int64_t replicates, std::uint64_t seed,
                                int threads = 1) {
  const int k = (spec.family == Family::LehmannRomano) ? spec.k : 1;
  detail::require(k <= means.n0() || means.n0() == 0,
                  "k exceeds the number of true nulls n0");
  return detail::bruteforce(model, spec, alpha, means, replicates, seed, threads,
                            k > 1 ? Metric::KFwer : Metric::Fwer, k);
}

/// Full-sampling AnyPwr oracle.
inline Estimate power_bruteforce(const DependenceModel& model, const ProcedureSpec& spec,
                                 Level alpha, const MeanConfig& means,
                                 std::int64_t replicates, std::uint64_t seed,
                                 int threads = 1) {
  detail::require(means.n1() >= 1, "power needs at least one false null (n1 >= 1)");
  return detail::bruteforce(model, spec, alpha, means, replicates, seed, threads,
                            Metric::AnyPwr, 1);
}

struct KthMaxCheck {
  double empirical = 0.0;  // fraction of replicates with k-th max <= u_n
  double limit = 0.0;      // truncated-Poisson limit value
  double u_n = 0.0;        // cutoff solving d_n * cdf_bar(u_n) = tau
};

/// Extreme-value limit verifier: samples d_n coordinates from the model, takes
/// the k-th largest (of values, or absolute values for the two-sided variant),
/// and compares the empirical cdf at u_n with the limit.
inline KthMaxCheck verify_kth_max_limit(const DependenceModel& model, std::int64_t d_n,
                                        double tau, int k, std::int64_t replicates,
                                        std::uint64_t seed, Sided sided = Sided::One,
                                        int threads = 1) {
  detail::require(d_n >= 1, "d_n must be a positive integer");
  detail::require(std::isfinite(tau) && tau > 0.0,
                  "tau must be positive; got " + std::to_string(tau));
  detail::require(tau / static_cast<double>(d_n) < 1.0,
                  "tau/d_n must be below 1; got " +
                      std::to_string(tau / static_cast<double>(d_n)));
  detail::require(k >= 1 && k <= d_n, "k must lie in [1, d_n]; got " + std::to_string(k));
  const double u = norm_upper_quantile(tau / static_cast<double>(d_n));
  const MeanConfig zeros = MeanConfig::global_null(d_n);
  auto vals = detail::run_replicates(replicates, threads, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    auto x = sample(model, zeros, rng);
    if (sided == Sided::Two) {
      for (auto& v : x) v = std::fabs(v);
    }
    std::nth_element(x.begin(), x.begin() + (k - 1), x.end(), std::greater<>());
    return x[static_cast<std::size_t>(k - 1)] <= u ? 1.0 : 0.0;
  });
  const auto ms = detail::reduce_replicates(vals);
  return {ms.mean, kth_max_limit(tau, k, sided), u};
}

}  // namespace mtp
