#include <cmath>
#include <random>

#include "bwshare/polytope.hpp"
#include "bwshare/quality.hpp"
#include "bwshare/ra.hpp"
#include "doctest.h"

using namespace bwshare;

namespace {

SystemConfig table_defaults() {
  SystemConfig cfg;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("quality model matches the log form") {
  const QualityModel m;
  const int T = 20;
  const double c = 10e6;

  SUBCASE("rate 0.3 Mbps gives zero quality") {
    // rate 0.3 Mbps <=> tau = 0.6 slots at c = 10e6, T = 20
    CHECK(quality(0.6, c, m, T) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("full period at 10 Mbps") {
    CHECK(quality(20.0, c, m, T) == doctest::Approx(std::log(10.1 / 0.4) / 0.8));
    CHECK(quality(20.0, c, m, T) == doctest::Approx(4.036).epsilon(1e-3));
  }
  SUBCASE("rate near 0.4085 Mbps hits q = 0.3") {
    const double tau = 0.4085 * T * 1e6 / c;
    CHECK(quality(tau, c, m, T) == doctest::Approx(0.3).epsilon(1e-3));
  }
}

TEST_CASE("quality_inverse") {
  const QualityModel m;
  const int T = 20;
  const double c = 10e6;

  SUBCASE("fixed point at zero") {
    CHECK(quality_inverse(quality(0.0, c, m, T), c, m, T) == doctest::Approx(0.0));
  }
  SUBCASE("q = 0 needs 0.6 slots (rate 0.3 Mbps)") {
    CHECK(quality_inverse(0.0, c, m, T) == doctest::Approx(0.6).epsilon(1e-9));
  }
  SUBCASE("q = 0.3 needs about 0.817 slots") {
    CHECK(quality_inverse(0.3, c, m, T) == doctest::Approx(0.817).epsilon(1e-3));
  }
  SUBCASE("below quality(0) clamps to zero") {
    CHECK(quality_inverse(quality(0.0, c, m, T) - 1.0, c, m, T) == 0.0);
  }
  SUBCASE("round trip on a grid") {
    for (double q = -0.5; q < 4.0; q += 0.37) {
      const double tau = quality_inverse(q, c, m, T);
      if (tau > 0.0) CHECK(quality(tau, c, m, T) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("quality is strictly increasing and concave in tau") {
  const QualityModel m;
  const int T = 20;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cap(1e6, 50e6);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = cap(rng);
    double prev = quality(0.0, c, m, T);
    for (double tau = 0.25; tau <= 40.0; tau += 0.25) {
      const double q = quality(tau, c, m, T);
      CHECK(q > prev);
      prev = q;
    }
    std::uniform_real_distribution<double> pick(0.0, 40.0);
    for (int s = 0; s < 20; ++s) {
      double a = pick(rng), b = pick(rng), d = pick(rng);
      if (a > b) std::swap(a, b);
      if (b > d) std::swap(b, d);
      if (a > b) std::swap(a, b);
      if (d - a < 1e-6) continue;
      const double chord = ((d - b) * quality(a, c, m, T) + (b - a) * quality(d, c, m, T)) /
                           (d - a);
      CHECK(quality(b, c, m, T) >= chord - 1e-9);
    }
  }
}

TEST_CASE("total_qoe") {
  const SystemConfig cfg = table_defaults();

  SUBCASE("one period, one arrival") {
    PeriodSample sample;
    sample.arrivals.assign(cfg.total_clients(), 0);
    sample.capacities.assign(cfg.total_clients(), 10e6);
    sample.arrivals[0] = 1;
    AllocationResult alloc;
    alloc.tau.assign(cfg.total_clients(), 0.0);
    alloc.duals.assign(cfg.cells(), 0.0);
    alloc.tau[0] = 10.0;
    const double expected = std::log(5.1 / 0.4) / 0.8;
    CHECK(total_qoe(cfg, {{sample, alloc}}) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(3.182).epsilon(1e-3));

    SUBCASE("two identical periods average to the same value") {
      CHECK(total_qoe(cfg, {{sample, alloc}, {sample, alloc}}) ==
            doctest::Approx(expected));
    }
  }
  SUBCASE("no arrivals sum to zero") {
    PeriodSample sample;
    sample.arrivals.assign(cfg.total_clients(), 0);
    sample.capacities.assign(cfg.total_clients(), 10e6);
    AllocationResult alloc;
    alloc.tau.assign(cfg.total_clients(), 0.0);
    alloc.duals.assign(cfg.cells(), 0.0);
    CHECK(total_qoe(cfg, {{sample, alloc}}) == 0.0);
  }
  SUBCASE("empty trace is an error") {
    CHECK_THROWS_WITH_AS(total_qoe(cfg, {}), "no periods", std::invalid_argument);
  }
}

TEST_CASE("validate_sharing") {
  const SystemConfig cfg = table_defaults();

  SUBCASE("no-sharing matrix is a member") {
    const MembershipReport report = validate_sharing(SharingMatrix::no_sharing(cfg), cfg);
    CHECK(report.member);
    CHECK(report.violations.empty());
  }
  SUBCASE("negative entry is reported") {
    SharingMatrix s = SharingMatrix::no_sharing(cfg);
    s.at(0, 0, 1) = -0.1;
    const MembershipReport report = validate_sharing(s, cfg);
    CHECK_FALSE(report.member);
    REQUIRE_FALSE(report.violations.empty());
    CHECK(report.violations.front().constraint.find("nonnegativity") != std::string::npos);
    CHECK(report.violations.front().amount == doctest::Approx(0.1));
  }
  SUBCASE("pair balance violation is reported") {
    SystemConfig small = cfg;
    small.num_regions = 1;
    SharingMatrix s(1, 2, 0.0);
    s.at(0, 0, 0) = 10.0;
    s.at(0, 1, 1) = 10.0;
    s.at(0, 0, 1) = 5.0;                              // 0 -> 1
    s.at(0, 1, 0) = 5.0 + 2.0 * small.balance_bound;  // 1 -> 0, over the band
    const MembershipReport report = validate_sharing(s, small);
    CHECK_FALSE(report.member);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations.front().constraint.find("balance pair") != std::string::npos);
    CHECK(report.violations.front().amount == doctest::Approx(small.balance_bound));
  }
  SUBCASE("owner cap violation is reported") {
    SharingMatrix s = SharingMatrix::no_sharing(cfg);
    s.at(1, 1, 0) = 1.0;  // owner 1 now commits T + 1 in region 1
    s.at(1, 0, 1) = 1.0;  // keep the pair balanced
    const MembershipReport report = validate_sharing(s, cfg);
    CHECK_FALSE(report.member);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations.front().constraint.find("owner cap") != std::string::npos);
  }
}

TEST_CASE("config invariants name the offending field") {
  SystemConfig cfg = table_defaults();
  cfg.balance_bound = -0.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), "balance_bound must be >= 0", std::invalid_argument);
  cfg = table_defaults();
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = table_defaults();
  cfg.percentile = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
