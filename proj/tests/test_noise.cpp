#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sddetem/analysis.hpp"
#include "sddetem/noise.hpp"

using namespace sddetem;

TEST_CASE("normal quantile reproduces frozen reference values") {
    // Reference values computed with 40-digit arithmetic and rounded to double.
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.975) ==
          doctest::Approx(1.9599639845400542355).epsilon(1e-15));
    CHECK(inverse_normal_cdf(0.999) ==
          doctest::Approx(3.0902323061678135415).epsilon(1e-15));
    CHECK(inverse_normal_cdf(0.3) ==
          doctest::Approx(-0.52440051270804078404).epsilon(1e-15));
    CHECK(inverse_normal_cdf(1e-10) ==
          doctest::Approx(-6.3613409024040562047).epsilon(1e-14));
    CHECK(inverse_normal_cdf(1e-20) ==
          doctest::Approx(-9.2623400897984075737).epsilon(1e-14));
}

TEST_CASE("normal quantile is symmetric and monotone") {
    // Central-region symmetry is exact: the rational form is odd in p - 0.5.
    CHECK(inverse_normal_cdf(0.6) == -inverse_normal_cdf(0.4));
    CHECK(inverse_normal_cdf(0.75) == -inverse_normal_cdf(0.25));

    // Tail-region symmetry holds to rounding.
    CHECK(inverse_normal_cdf(0.99) ==
          doctest::Approx(-inverse_normal_cdf(0.01)).epsilon(1e-13));
    // At a dyadic p the complement 1 - p is exact, so symmetry is bitwise.
    CHECK(inverse_normal_cdf(1.0 - 0x1.0p-30) == -inverse_normal_cdf(0x1.0p-30));

    double prev = -1e300;
    for (int i = 1; i < 400; ++i) {
        const double x = inverse_normal_cdf(static_cast<double>(i) / 400.0);
        CHECK(x > prev);
        prev = x;
    }
}

TEST_CASE("normal quantile rejects arguments outside (0, 1)") {
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(-0.1), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.1), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(std::numeric_limits<double>::quiet_NaN()),
                    std::domain_error);
}

TEST_CASE("increment generation is keyed deterministically") {
    const IncrementStream a = generate(1, 7, 1e-2, 64);
    const IncrementStream b = generate(1, 7, 1e-2, 64);
    CHECK(a.seed() == 1);
    CHECK(a.path_id() == 7);
    CHECK(a.delta() == 1e-2);
    CHECK(a.count() == 64);
    CHECK(a.values() == b.values());
    CHECK(a.nodes() == b.nodes());

    // Different key -> different stream (either coordinate).
    CHECK(generate(2, 7, 1e-2, 64).values() != a.values());
    CHECK(generate(1, 8, 1e-2, 64).values() != a.values());

    // A longer stream extends the shorter one without disturbing its prefix.
    const IncrementStream longer = generate(1, 7, 1e-2, 128);
    for (std::size_t k = 0; k < 64; ++k) CHECK(longer.values()[k] == a.values()[k]);
}

TEST_CASE("nodes are the running sums of the increments") {
    const IncrementStream s = generate(3, 11, 0.25, 40);
    REQUIRE(s.nodes().size() == 41);
    CHECK(s.nodes()[0] == 0.0);
    double run = 0.0;
    for (std::size_t k = 0; k < s.count(); ++k) {
        run += s.values()[k];  // same left-to-right order as generation
        CHECK(s.nodes()[k + 1] == run);
    }
}

TEST_CASE("the underlying unit-variance draws are independent of delta") {
    // Increments are z * sqrt(delta) with z fixed by the key, so streams at different
    // step sizes are exact scalings of each other: delta 4 = 2x the delta 1 stream.
    const IncrementStream unit = generate(9, 2, 1.0, 50);
    const IncrementStream quad = generate(9, 2, 4.0, 50);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(quad.values()[k] == 2.0 * unit.values()[k]);
    }
}

TEST_CASE("generation rejects empty or non-positive requests") {
    CHECK_THROWS_AS(generate(1, 0, 1e-2, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate(1, 0, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate(1, 0, -1e-2, 10), std::invalid_argument);
}

TEST_CASE("coarsening subsamples the Brownian nodes exactly") {
    const IncrementStream fine = generate(5, 3, 1e-3, 240);
    const IncrementStream coarse = coarsen(fine, 4);
    CHECK(coarse.seed() == 5);
    CHECK(coarse.path_id() == 3);
    CHECK(coarse.delta() == 4e-3);
    CHECK(coarse.count() == 60);
    REQUIRE(coarse.nodes().size() == 61);
    for (std::size_t j = 0; j <= 60; ++j) {
        CHECK(coarse.nodes()[j] == fine.nodes()[4 * j]);
    }
    for (std::size_t j = 0; j < 60; ++j) {
        CHECK(coarse.values()[j] == coarse.nodes()[j + 1] - coarse.nodes()[j]);
    }

    // Factor 1 is the identity.
    const IncrementStream same = coarsen(fine, 1);
    CHECK(same.values() == fine.values());
    CHECK(same.nodes() == fine.nodes());
}

TEST_CASE("coarsening composes exactly") {
    const IncrementStream fine = generate(17, 0, 5e-4, 320);
    const IncrementStream two_step = coarsen(coarsen(fine, 2), 2);
    const IncrementStream one_step = coarsen(fine, 4);
    CHECK(two_step.values() == one_step.values());
    CHECK(two_step.nodes() == one_step.nodes());
    CHECK(two_step.delta() == one_step.delta());
}

TEST_CASE("coarsening validates its factor") {
    const IncrementStream fine = generate(1, 0, 1e-3, 30);
    CHECK_THROWS_AS(coarsen(fine, 0), std::invalid_argument);
    CHECK_THROWS_AS(coarsen(fine, 7), std::invalid_argument);  // 7 does not divide 30
    CHECK_NOTHROW(coarsen(fine, 5));
}

TEST_CASE("marginal statistics of the increments are standard normal") {
    // 200k unit-variance draws pooled across paths: moments must sit near N(0, 1).
    std::vector<double> z;
    z.reserve(200000);
    for (std::uint64_t pid = 0; pid < 200; ++pid) {
        const IncrementStream s = generate(42, pid, 1.0, 1000);
        z.insert(z.end(), s.values().begin(), s.values().end());
    }
    const SummaryStats stats = summary_stats(z);
    CHECK(std::abs(stats.mean) < 0.01);
    CHECK(stats.sd == doctest::Approx(1.0).epsilon(0.01));
    REQUIRE(stats.kurt.has_value());
    REQUIRE(stats.skew.has_value());
    CHECK(*stats.kurt == doctest::Approx(3.0).epsilon(0.04));
    CHECK(std::abs(*stats.skew) < 0.025);

    // Serial correlation at lag 1 within a path must be negligible.
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::uint64_t pid = 0; pid < 200; ++pid) {
        const IncrementStream s = generate(42, pid, 1.0, 1000);
        for (std::size_t k = 0; k + 1 < s.count(); ++k) {
            acc += s.values()[k] * s.values()[k + 1];
            ++pairs;
        }
    }
    CHECK(std::abs(acc / static_cast<double>(pairs)) < 0.01);
}
