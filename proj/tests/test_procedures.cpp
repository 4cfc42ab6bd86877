#include "mtp/procedures.hpp"

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "mtp/rng.hpp"
#include "oracle/reference_values.hpp"

using namespace mtp;
namespace ref = mtp::testref;

namespace {

const std::vector<std::int64_t> kNGrid{1, 10, 100, 1000, 10000, 100000, 1000000};
const std::vector<double> kAlphaGrid{0.01, 0.05, 0.1, 0.3};

ProcedureSpec bon(Sided s = Sided::One) { return {Family::AdjBonferroni, s, 1, {}}; }
ProcedureSpec sidak(Sided s = Sided::One) { return {Family::Sidak, s, 1, {}}; }
ProcedureSpec lr(int k, Sided s = Sided::One) { return {Family::LehmannRomano, s, k, {}}; }

}  // namespace

TEST_CASE("cutoff reference values") {
  CHECK(std::fabs(cutoff(sidak(), 1, Level(0.05)).value - ref::kCutoffSidakN1A005) <
        1e-9);
  CHECK(std::fabs(cutoff(bon(), 1, Level(0.05)).value - ref::kCutoffBonN1A005) < 1e-9);
  CHECK(std::fabs(cutoff(bon(), 2500, Level(0.10)).value - ref::kCutoffBonN2500A01) <
        1e-9);
  CHECK(std::fabs(cutoff(sidak(), 2500, Level(0.10)).value - ref::kCutoffSidakN2500A01) <
        1e-9);
  // Lehmann-Romano is a plain tail quantile
  CHECK(cutoff(lr(1), 20, Level(0.05)).value == norm_upper_quantile(0.05 / 20.0));
  CHECK(cutoff(lr(3, Sided::Two), 20, Level(0.05)).value ==
        norm_upper_quantile(3 * 0.05 / 40.0));
}

TEST_CASE("adjusted Bonferroni calibration identity") {
  for (auto n : kNGrid) {
    for (double a : kAlphaGrid) {
      const double c = cutoff(bon(), n, Level(a)).value;
      const double lhs = static_cast<double>(n) * norm_cdf_bar(c).value();
      const double rhs = -std::log1p(-a);
      CAPTURE(n, a);
      CHECK(std::fabs(lhs - rhs) / rhs < 1e-9);
    }
  }
}

TEST_CASE("Sidak-vs-Bonferroni tail discrepancy is O(1/n)") {
  // |n(1-(1-a)^{1/n}) - (-log(1-a))| <= C/n with C frozen after one scan
  const double C = 0.1;
  for (auto n : kNGrid) {
    for (double a : kAlphaGrid) {
      const double sidTail = -std::expm1(std::log1p(-a) / static_cast<double>(n));
      const double gap = std::fabs(static_cast<double>(n) * sidTail + std::log1p(-a));
      CAPTURE(n, a);
      CHECK(gap <= C / static_cast<double>(n));
    }
  }
}

TEST_CASE("cutoff ordering: Bonferroni strictly below Sidak") {
  for (auto n : kNGrid) {
    for (double a : kAlphaGrid) {
      CAPTURE(n, a);
      CHECK(cutoff(bon(), n, Level(a)).value < cutoff(sidak(), n, Level(a)).value);
    }
  }
}

TEST_CASE("cutoff monotone in n and alpha") {
  for (double a : kAlphaGrid) {
    double prev = -1e300;
    for (auto n : kNGrid) {
      const double c = cutoff(bon(), n, Level(a)).value;
      CHECK(c > prev);
      prev = c;
    }
  }
  for (auto n : kNGrid) {
    CHECK(cutoff(sidak(), n, Level(0.01)).value > cutoff(sidak(), n, Level(0.05)).value);
    CHECK(cutoff(sidak(), n, Level(0.05)).value > cutoff(sidak(), n, Level(0.30)).value);
  }
}

TEST_CASE("two-sided cutoff equals one-sided at 2n, bitwise") {
  for (auto n : kNGrid) {
    for (double a : {0.05, 0.1}) {
      CHECK(cutoff(bon(Sided::Two), n, Level(a)).value ==
            cutoff(bon(Sided::One), 2 * n, Level(a)).value);
      CHECK(cutoff(sidak(Sided::Two), n, Level(a)).value ==
            cutoff(sidak(Sided::One), 2 * n, Level(a)).value);
      if (n >= 2) {
        CHECK(cutoff(lr(2, Sided::Two), n, Level(a)).value ==
              cutoff(lr(2, Sided::One), 2 * n, Level(a)).value);
      }
    }
  }
}

TEST_CASE("p0 enters as a multiplier on n") {
  ProcedureSpec s = bon();
  s.p0 = 0.5;
  CHECK(cutoff(s, 2000, Level(0.05)).value == cutoff(bon(), 1000, Level(0.05)).value);
  s = sidak(Sided::Two);
  s.p0 = 0.25;
  CHECK(cutoff(s, 4000, Level(0.1)).value ==
        cutoff(sidak(Sided::Two), 1000, Level(0.1)).value);
}

TEST_CASE("cutoff positive and finite on the contract grid") {
  for (auto n : {2, 10, 1000, 1000000}) {
    for (double a : {0.001, 0.05, 0.5}) {
      for (const auto& spec : {bon(), sidak(), lr(1), bon(Sided::Two)}) {
        const double c = cutoff(spec, n, Level(a)).value;
        CAPTURE(n, a, family_name(spec.family));
        CHECK(std::isfinite(c));
        CHECK(c > 0.0);
      }
    }
  }
}

TEST_CASE("cutoff validation errors") {
  CHECK_THROWS_AS(cutoff(bon(), 0, Level(0.05)), InvalidArgument);
  CHECK_THROWS_AS(cutoff(lr(0), 10, Level(0.05)), InvalidArgument);
  CHECK_THROWS_AS(cutoff(lr(11), 10, Level(0.05)), InvalidArgument);  // k > n
  CHECK_THROWS_AS(Level(0.0), InvalidArgument);
  CHECK_THROWS_AS(Level(1.0), InvalidArgument);
  ProcedureSpec badP0 = bon();
  badP0.p0 = 1.5;
  CHECK_THROWS_AS(cutoff(badP0, 10, Level(0.05)), InvalidArgument);
  ProcedureSpec smallP0 = bon();
  smallP0.p0 = 0.05;
  CHECK_THROWS_AS(cutoff(smallP0, 10, Level(0.05)), InvalidArgument);  // n*p0 < 1
  // infeasible tail probability: k*alpha/(n*p0) >= 1
  ProcedureSpec lrP0 = lr(10);
  lrP0.p0 = 0.5;
  CHECK_THROWS_AS(cutoff(lrP0, 10, Level(0.6)), InvalidArgument);
  // adjusted Bonferroni with -log(1-alpha) >= n
  CHECK_THROWS_AS(cutoff(bon(), 1, Level(0.95)), InvalidArgument);
}

TEST_CASE("cutoff gap behavior") {
  for (auto n : kNGrid) {
    for (double a : kAlphaGrid) {
      CAPTURE(n, a);
      CHECK(cutoff_gap(n, Level(a)) > 0.0);
    }
  }
  CHECK(cutoff_gap(1000000, Level(0.05)) < cutoff_gap(1000, Level(0.05)));
  CHECK(std::fabs(cutoff_gap(1, Level(0.05)) - ref::kCutoffGapN1A005) < 1e-9);
}

TEST_CASE("apply: empty, all-zero, single extreme") {
  CHECK_THROWS_AS(apply(bon(), Level(0.05), std::span<const double>{}),
                  InvalidArgument);
  std::vector<double> zeros(50, 0.0);
  CHECK(apply(bon(), Level(0.05), zeros).indices.empty());
  CHECK(apply(lr(2, Sided::Two), Level(0.1), zeros).indices.empty());

  std::vector<double> stats(100, 0.0);
  stats[41] = 1e6;
  const auto rej = apply(bon(), Level(0.05), stats);
  REQUIRE(rej.indices.size() == 1);
  CHECK(rej.indices[0] == 42);  // 1-based
}

TEST_CASE("apply: ties with the cutoff are kept") {
  const auto c = cutoff(sidak(), 10, Level(0.05));
  std::vector<double> stats(10, 0.0);
  stats[3] = c.value;                       // exactly at the cutoff
  stats[7] = std::nextafter(c.value, 1e9);  // one ulp above
  const auto rej = apply(sidak(), Level(0.05), stats);
  REQUIRE(rej.indices.size() == 1);
  CHECK(rej.indices[0] == 8);
}

TEST_CASE("apply: two-sided uses absolute values") {
  std::vector<double> stats(20, 0.0);
  stats[4] = -50.0;
  CHECK(apply(bon(), Level(0.05), stats).indices.empty());
  const auto rej = apply(bon(Sided::Two), Level(0.05), stats);
  REQUIRE(rej.indices.size() == 1);
  CHECK(rej.indices[0] == 5);
}

TEST_CASE("rejection sets nest in alpha") {
  RngStream rng(911u, 0u);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> stats(200);
    for (auto& x : stats) x = 3.0 * rng.next_normal();
    for (const auto& spec : {bon(), sidak(Sided::Two), lr(2)}) {
      const auto r1 = apply(spec, Level(0.01), stats).indices;
      const auto r2 = apply(spec, Level(0.10), stats).indices;
      CAPTURE(trial, family_name(spec.family));
      CHECK(std::includes(r2.begin(), r2.end(), r1.begin(), r1.end()));
    }
  }
}
