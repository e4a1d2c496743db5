#include <doctest.h>

#include <cmath>

#include "orbitlab/oracles.hpp"
#include "orbitlab/rng.hpp"

using namespace orbitlab;

TEST_CASE("indicator coefficients and their bounds") {
    Rng rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        FourierIndicator ind{0.25 * rng.next_double() + 1e-4};
        CHECK(ind.coefficient(0) == doctest::Approx(2.0 * ind.r));
        for (std::int64_t k = 1; k <= 10000; k = k * 3 + 1) {
            double c = ind.coefficient(k);
            CHECK(std::abs(c) <= std::min(2.0 * ind.r, 1.0 / (M_PI * static_cast<double>(k))) + 1e-15);
            CHECK(c == ind.coefficient(-k)); // even in k
        }
    }
}

TEST_CASE("pair covariance vanishes exactly for unequal index gaps") {
    Rng rng(52);
    for (int trial = 0; trial < 50; ++trial) {
        int i1 = static_cast<int>(rng.next_below(12));
        int j1 = i1 + static_cast<int>(rng.next_below(8));
        int i2 = static_cast<int>(rng.next_below(12));
        int j2 = j1 + 1 + static_cast<int>(rng.next_below(8));
        if (j2 - j1 == i2 - i1) ++i2; // force unequal gaps
        PairCovariance pc = pair_covariance_doubling(i1, j1, i2, j2, 0.01, 0.02, 1024);
        CHECK(pc.value == 0.0);
        CHECK(pc.tail_bound == 0.0);
    }
}

TEST_CASE("pair covariance series converges to the closed form") {
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        int p = static_cast<int>(rng.next_below(5));
        double r1 = std::ldexp(1.0, -(2 + static_cast<int>(rng.next_below(5))));
        double r2 = std::ldexp(1.0, -(2 + static_cast<int>(rng.next_below(5)))) * 0.7;
        std::uint64_t kmax = pair_covariance_default_kmax(p, r1, r2);
        PairCovariance pc = pair_covariance_doubling(0, 1, p, 1 + p, r1, r2, kmax);
        double limit = pair_covariance_limit(p, r1, r2);
        CHECK(std::abs(pc.value - limit) <= pc.tail_bound + 1e-15);
        // doubling kmax moves the value by less than the reported tail bound
        PairCovariance pc2 = pair_covariance_doubling(0, 1, p, 1 + p, r1, r2, 2 * kmax);
        CHECK(std::abs(pc2.value - pc.value) <= pc.tail_bound);
    }
}

TEST_CASE("pair covariance example: adjacent events") {
    PairCovariance pc = pair_covariance_doubling(0, 1, 1, 2, 0.01, 0.01, 1u << 20);
    // well inside the proof's 8 sqrt(r1 r2) 2^{-p/2} envelope
    CHECK(std::abs(pc.value) <= 8.0 * 0.01 * std::exp2(-0.5));
    CHECK(pc.value == doctest::Approx(0.0096).epsilon(1e-5));
    // p = 0 is the variance of one event: 2r - 4r^2
    CHECK(pair_covariance_limit(0, 0.01, 0.01) == doctest::Approx(0.02 - 0.0004).epsilon(1e-12));
}

TEST_CASE("closed form equals an exact interval-measure computation") {
    // measure{u : ||u|| <= r1, ||2^p u|| <= r2} - 4 r1 r2 computed by hand for
    // p = 1, r1 = r2 = 0.01: the intersection is [-0.005, 0.005]
    CHECK(pair_covariance_limit(1, 0.01, 0.01) == doctest::Approx(0.01 - 0.0004).epsilon(1e-12));
}

TEST_CASE("short return measure") {
    CHECK(short_return_measure_doubling(0.01, 3) == doctest::Approx(0.02));
    CHECK(short_return_measure_doubling(0.6, 1) == 1.0);
    // monte carlo oracle in exact 128-bit arithmetic: x vs (2^n - 1) x
    Rng rng(54);
    const int samples = 200000;
    for (int n : {1, 3, 7}) {
        int hits = 0;
        RadiusThreshold t = radius_threshold(0.01);
        for (int i = 0; i < samples; ++i) {
            CirclePoint x = rng.next_point();
            CirclePoint image(x.frac * ((static_cast<u128>(1) << n) - 1));
            if (t.admits(circle_distance_ticks(image, CirclePoint(0)))) ++hits;
        }
        double est = static_cast<double>(hits) / samples;
        double sigma = std::sqrt(0.02 * 0.98 / samples);
        CHECK(std::abs(est - 0.02) <= 3.5 * sigma);
        // the bound mass <= 2 r^1 holds with equality below the clip
        CHECK(short_return_measure_doubling(0.01, n) <= 2.0 * 0.01);
    }
}

TEST_CASE("rotation minimal distances") {
    CirclePoint alpha = golden_angle();
    CHECK(rotation_min_distance(CirclePoint(0), alpha, 5) == 0.0);
    // n = 2: min over k in {-1, 0, 1} of ||0.5 + k alpha||
    double d = rotation_min_distance(CirclePoint::from_double(0.5), alpha, 2);
    CHECK(d == doctest::Approx(0.61803398874989484 - 0.5).epsilon(1e-12));
    // enumeration oracle on random cases
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        CirclePoint delta = rng.next_point();
        CirclePoint a = rng.next_point();
        std::uint64_t n = 1 + rng.next_below(200);
        u128 brute = ~static_cast<u128>(0);
        for (std::int64_t k = -(static_cast<std::int64_t>(n) - 1); k < static_cast<std::int64_t>(n); ++k) {
            u128 step = a.frac * static_cast<u128>(static_cast<std::uint64_t>(k < 0 ? -k : k));
            CirclePoint pos(k < 0 ? delta.frac - step : delta.frac + step);
            brute = std::min(brute, circle_distance_ticks(pos, CirclePoint(0)));
        }
        CHECK(rotation_min_distance_ticks(delta, a, n) == brute);
    }
}

TEST_CASE("single-orbit rotation minima sit at fibonacci denominators") {
    CirclePoint alpha = golden_angle();
    // argmin over k < n of ||k alpha|| is the largest fibonacci below n
    std::uint64_t fib_prev = 1, fib = 2;
    while (fib < 400) {
        std::uint64_t n = fib + 1;
        u128 best = rotation_single_min_ticks(alpha, n);
        CirclePoint at_fib(alpha.frac * static_cast<u128>(fib));
        CHECK(best == circle_distance_ticks(at_fib, CirclePoint(0)));
        std::uint64_t next = fib + fib_prev;
        fib_prev = fib;
        fib = next;
    }
}

TEST_CASE("continued fractions of the tagged irrationals") {
    DiophantineProfile golden = continued_fraction(QuadraticTag::Golden, 60);
    for (auto q : golden.quotients) CHECK(q == 1);
    DiophantineProfile s2 = continued_fraction(QuadraticTag::Sqrt2m1, 40);
    for (auto q : s2.quotients) CHECK(q == 2);
    // the Euclid route on the 128-bit value reproduces the symbolic quotients
    DiophantineProfile euclid = continued_fraction(golden_angle(), 60);
    for (std::size_t i = 0; i < 60; ++i) CHECK(euclid.quotients[i] == 1);
}

TEST_CASE("convergents satisfy the classical approximation inequality") {
    Rng rng(56);
    for (int trial = 0; trial < 10; ++trial) {
        CirclePoint alpha = rng.next_point();
        DiophantineProfile prof = continued_fraction(alpha, 60);
        for (const auto& c : prof.convergents) {
            if (c.q > (static_cast<u128>(1) << 62)) break;
            // ||q alpha|| < 1/q, exactly in integers: err * q < 2^128
            CHECK(c.err_ticks <= (~static_cast<u128>(0)) / c.q);
        }
    }
    CHECK_THROWS_AS(continued_fraction(golden_angle(), 181), PrecisionExhausted);
}

TEST_CASE("diophantine margins for the golden rotation") {
    DiophantineProfile prof = continued_fraction(QuadraticTag::Golden, 90);
    DiophantineMargin m = diophantine_condition(prof, DiophForm::Exponent, 0.0, 1e6);
    // global minimum over convergents q >= 2 sits at q = 3
    CHECK(m.argmin_q == 3.0);
    CHECK(m.min_margin == doctest::Approx(0.43769).epsilon(1e-3));
    // the tail of the margin trace settles at the classical liminf 1/sqrt(5)
    double tail_min = 1e9;
    for (auto [q, margin] : m.trace)
        if (q > 100.0) tail_min = std::min(tail_min, margin);
    CHECK(tail_min == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-3));

    // constant-type angles fail the log-squared form only by log factors:
    // the margin trace decays
    DiophantineMargin weak = diophantine_condition(prof, DiophForm::LogSquared, 0.1, 1e9);
    CHECK(weak.trace.back().second < weak.trace.front().second);
}

TEST_CASE("growing partial quotients defeat the exponent condition") {
    // alpha = [0; 1, 2, 3, ...]: margins q ||q alpha|| ~ 1/a_{k+1} -> 0
    double value = 0.0;
    for (int a = 24; a >= 1; --a) value = 1.0 / (a + value);
    DiophantineProfile prof = continued_fraction(CirclePoint::from_double(value), 14);
    for (std::size_t i = 0; i < 12; ++i) CHECK(prof.quotients[i] == i + 1);
    DiophantineMargin m = diophantine_condition(prof, DiophForm::Exponent, 0.0, 1e9);
    CHECK(m.trace.back().second < 0.5 * m.trace.front().second);
}

TEST_CASE("unique return window for rotations") {
    CirclePoint alpha = golden_angle();
    UniqueReturnResult r = unique_return_check(alpha, 10, 0.01);
    CHECK(r.unique);
    CHECK(r.witness_j == 8);
    CHECK(ticks_to_double(r.min_ticks) == doctest::Approx(0.0557).epsilon(1e-2));
    CHECK(!unique_return_check(alpha, 10, 0.25).unique);
    UniqueReturnResult rational = unique_return_check(CirclePoint::from_double(0.5), 3, 0.01);
    CHECK(!rational.unique);
    CHECK(rational.witness_j == 2);
    CHECK(rational.min_ticks == static_cast<u128>(0));
}

TEST_CASE("cover sandwich inequalities") {
    CircleCover cover = build_cover(std::ldexp(1.0, -6));
    CHECK(cover.k == 64);
    Rng rng(57);
    int max_middle = 0;
    for (int i = 0; i < 10000; ++i) {
        CirclePoint x = rng.next_point(), y = rng.next_point();
        SandwichResult res = indicator_sandwich_check(cover, x, y);
        CHECK(res.lower_ok);
        CHECK(res.upper_ok);
        max_middle = std::max(max_middle, res.middle_sum);
        CHECK(res.middle_sum <= 5);
    }
    CHECK(max_middle >= 1);

    // targeted cases: inside r forces overlap, beyond 4r forbids it
    CirclePoint x = CirclePoint::from_double(0.37);
    CirclePoint y_close = CirclePoint::from_double(0.37 + 0.031 * std::ldexp(1.0, -6));
    CHECK(indicator_sandwich_check(cover, x, y_close).middle_sum >= 1);
    CirclePoint y_far = CirclePoint::from_double(0.37 + 5.0 * std::ldexp(1.0, -6));
    CHECK(indicator_sandwich_check(cover, x, y_far).middle_sum == 0);

    // interval metric variant
    CircleCover icover = build_cover(std::ldexp(1.0, -6), Metric::Interval);
    for (int i = 0; i < 2000; ++i) {
        SandwichResult res = indicator_sandwich_check(icover, rng.next_point(), rng.next_point());
        CHECK(res.lower_ok);
        CHECK(res.upper_ok);
    }
    CHECK_THROWS_AS(build_cover(0.2), ConfigError);
}

TEST_CASE("doubling lag covariance against an exact dyadic-overlap oracle") {
    // Leb(A cap T^-lag B) for dyadic intervals, enumerated exactly
    auto overlap = [](double a1, double b1, double a2, double b2, int lag) {
        double total = 0.0;
        double scale = std::exp2(lag);
        for (std::uint64_t t = 0; t < (1ull << lag); ++t) {
            double lo = (static_cast<double>(t) + a2) / scale;
            double hi = (static_cast<double>(t) + b2) / scale;
            total += std::max(0.0, std::min(hi, b1) - std::max(lo, a1));
        }
        return total;
    };
    struct Case {
        double a1, b1, a2, b2;
    };
    const Case cases[] = {{0.0, 0.5, 0.0, 0.5}, {0.0, 0.25, 0.0, 0.25}, {0.25, 0.5, 0.5, 0.875},
                          {0.125, 0.75, 0.0, 0.3125}};
    for (const auto& c : cases) {
        for (int lag = 1; lag <= 8; ++lag) {
            double expected = overlap(c.a1, c.b1, c.a2, c.b2, lag) - (c.b1 - c.a1) * (c.b2 - c.a2);
            CHECK(doubling_lag_covariance(c.a1, c.b1, c.a2, c.b2, lag) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
    // halves are independent after one step; quarters after two
    CHECK(doubling_lag_covariance(0.0, 0.5, 0.0, 0.5, 1) == doctest::Approx(0.0));
    CHECK(doubling_lag_covariance(0.0, 0.25, 0.0, 0.25, 1) == doctest::Approx(0.0625));
    CHECK(doubling_lag_covariance(0.0, 0.25, 0.0, 0.25, 2) == doctest::Approx(0.0));
}

TEST_CASE("u128 decimal rendering") {
    CHECK(u128_to_string(0) == "0");
    CHECK(u128_to_string(1234567890123456789ULL) == "1234567890123456789");
    u128 big = static_cast<u128>(1) << 100;
    CHECK(u128_to_string(big) == "1267650600228229401496703205376");
}
