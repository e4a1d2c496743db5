#include <doctest.h>

#include <cmath>

#include "orbitlab/engine.hpp"
#include "orbitlab/oracles.hpp"

using namespace orbitlab;

namespace {

// O(N^2) reference: both the checkpointed minima and the first hit.
struct BruteResult {
    std::vector<u128> m_at_checkpoints;
    std::optional<std::uint64_t> first_hit;
};

BruteResult brute_force(const OrbitStream* o1, const OrbitStream* o2, std::uint64_t N,
                        const RadiusSchedule* sched, std::span<const std::uint64_t> cps, bool single) {
    BruteResult out;
    Metric metric = o1->metric();
    u128 best = ~static_cast<u128>(0);
    std::size_t ci = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        if (single) {
            for (std::uint64_t i = 0; i + 1 < n; ++i)
                best = std::min(best, distance_ticks(o1->point(i), o1->point(n - 1), metric));
        } else {
            for (std::uint64_t i = 0; i < n; ++i) {
                best = std::min(best, distance_ticks(o1->point(i), o2->point(n - 1), metric));
                best = std::min(best, distance_ticks(o1->point(n - 1), o2->point(i), metric));
            }
        }
        bool have_pair = single ? n >= 2 : true;
        if (sched && have_pair && !out.first_hit && radius_threshold(sched->eval(n)).admits(best)) out.first_hit = n;
        if (ci < cps.size() && cps[ci] == n) {
            out.m_at_checkpoints.push_back(best);
            ++ci;
        }
    }
    return out;
}

BitStreamPoint bitstream_of(CirclePoint p, std::size_t length) {
    std::vector<std::uint8_t> bits(length, 0);
    for (int b = 0; b < 128 && static_cast<std::size_t>(b) < length; ++b)
        bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((p.frac >> (127 - b)) & 1);
    return BitStreamPoint(2, std::move(bits));
}

OrbitStream random_system_orbit(int which, std::uint64_t horizon, Rng& rng) {
    switch (which % 4) {
        case 0: return OrbitStream::random(SystemSpec::kary(2), horizon, rng);
        case 1: return OrbitStream::random(SystemSpec::rotation(golden_angle()), horizon, rng);
        case 2: return OrbitStream::random(SystemSpec::logistic4(), horizon, rng);
        default: return OrbitStream::random(SystemSpec::gauss(), horizon, rng);
    }
}

} // namespace

TEST_CASE("nearest neighbor index equals a linear scan") {
    Rng rng(61);
    for (Metric metric : {Metric::Circle, Metric::Interval}) {
        NearestNeighborIndex index(metric);
        std::vector<CirclePoint> stored;
        CHECK(!index.nearest_ticks(rng.next_point()));
        for (int i = 0; i < 1024; ++i) {
            CirclePoint p = rng.next_point();
            index.insert(p);
            stored.push_back(p);
            if (i % 7 == 0) {
                CirclePoint q = rng.next_point();
                u128 brute = ~static_cast<u128>(0);
                for (auto s : stored) brute = std::min(brute, distance_ticks(q, s, metric));
                CHECK(*index.nearest_ticks(q) == brute);
            }
        }
    }
}

TEST_CASE("identical seeds collapse the profile to zero") {
    Rng rng(62);
    auto seed = rng.next_digits(2, 300);
    OrbitStream a(SystemSpec::kary(2), BitStreamPoint(2, seed), 128);
    OrbitStream b(SystemSpec::kary(2), BitStreamPoint(2, seed), 128);
    ClosenessProfile prof = closeness_profile(a, b, 128, nullptr);
    for (const auto& cp : prof.checkpoints) CHECK(cp.m_ticks == static_cast<u128>(0));
}

TEST_CASE("two-orbit doubling example at N = 2") {
    OrbitStream a(SystemSpec::kary(2), bitstream_of(CirclePoint::from_double(0.1), 300), 64);
    OrbitStream b(SystemSpec::kary(2), bitstream_of(CirclePoint::from_double(0.3), 300), 64);
    ClosenessProfile prof = closeness_profile(a, b, 2, nullptr);
    REQUIRE(prof.checkpoints.size() >= 2);
    CHECK(prof.checkpoints[1].n == 2);
    CHECK(prof.checkpoints[1].m_value() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("single-orbit profile basics") {
    // period-3 point 1/7 = 0.001001... meets itself first at n = 4
    std::vector<std::uint8_t> bits;
    for (int i = 0; i < 400; ++i) bits.push_back(i % 3 == 2 ? 1 : 0);
    OrbitStream orbit(SystemSpec::kary(2), BitStreamPoint(2, bits), 200);
    RadiusSchedule tiny = RadiusSchedule::custom({{1, 1e-30}});
    ClosenessProfile prof = single_orbit_profile(orbit, 16, &tiny);
    REQUIRE(prof.first_hit.has_value());
    CHECK(*prof.first_hit == 4);
    for (const auto& cp : prof.checkpoints) {
        if (cp.n < 4 && !cp.empty) CHECK(cp.m_ticks != static_cast<u128>(0));
        if (cp.n >= 4) CHECK(cp.m_ticks == static_cast<u128>(0));
    }

    // N = 1 has no pairs
    ClosenessProfile empty = single_orbit_profile(orbit, 1, nullptr);
    CHECK(empty.checkpoints.size() == 1);
    CHECK(empty.checkpoints[0].empty);
    CHECK(!empty.first_hit);
}

TEST_CASE("engine equals brute force on random draws across all systems") {
    Rng rng(63);
    RadiusSchedule sched = RadiusSchedule::parse("powerlog:1,-1,0,2");
    auto cps = dyadic_checkpoints(256);
    for (int trial = 0; trial < 24; ++trial) {
        OrbitStream o1 = random_system_orbit(trial, 256, rng);
        Rng rng2(split_seed(630, static_cast<std::uint64_t>(trial)));
        OrbitStream o2 = random_system_orbit(trial, 256, rng2);

        ClosenessProfile pair = closeness_profile(o1, o2, 256, &sched);
        BruteResult brute_pair = brute_force(&o1, &o2, 256, &sched, cps, false);
        REQUIRE(pair.checkpoints.size() == brute_pair.m_at_checkpoints.size());
        for (std::size_t i = 0; i < pair.checkpoints.size(); ++i)
            CHECK(pair.checkpoints[i].m_ticks == brute_pair.m_at_checkpoints[i]);
        CHECK(pair.first_hit == brute_pair.first_hit);

        ClosenessProfile single = single_orbit_profile(o1, 256, &sched);
        BruteResult brute_single = brute_force(&o1, nullptr, 256, &sched, cps, true);
        for (std::size_t i = 1; i < single.checkpoints.size(); ++i)
            CHECK(single.checkpoints[i].m_ticks == brute_single.m_at_checkpoints[i]);
        CHECK(single.first_hit == brute_single.first_hit);
    }
}

TEST_CASE("rotation profiles match the closed-form oracle exactly") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        CirclePoint alpha = rng.next_point();
        SystemSpec rot = SystemSpec::rotation(alpha);
        CirclePoint x = rng.next_point(), y = rng.next_point();
        OrbitStream o1(rot, x, 1024), o2(rot, y, 1024);
        ClosenessProfile prof = closeness_profile(o1, o2, 1024, nullptr);
        for (const auto& cp : prof.checkpoints)
            CHECK(cp.m_ticks == rotation_min_distance_ticks(x - y, alpha, cp.n));
        ClosenessProfile single = single_orbit_profile(o1, 1024, nullptr);
        for (const auto& cp : single.checkpoints)
            if (!cp.empty) CHECK(cp.m_ticks == rotation_single_min_ticks(alpha, cp.n));
    }
}

TEST_CASE("monotone schedule domination orders first hits") {
    Rng rng(65);
    RadiusSchedule big = RadiusSchedule::parse("powerlog:2,-1,0,2");
    RadiusSchedule small = RadiusSchedule::parse("powerlog:1,-1,0,2");
    for (int trial = 0; trial < 10; ++trial) {
        OrbitStream o1 = OrbitStream::random(SystemSpec::kary(2), 512, rng);
        OrbitStream o2 = OrbitStream::random(SystemSpec::kary(2), 512, rng);
        auto hit_big = closeness_profile(o1, o2, 512, &big).first_hit;
        auto hit_small = closeness_profile(o1, o2, 512, &small).first_hit;
        if (hit_small) {
            REQUIRE(hit_big.has_value());
            CHECK(*hit_big <= *hit_small);
        }
    }
}

TEST_CASE("membership persists at checkpoints with larger radii") {
    Rng rng(66);
    RadiusSchedule sched = RadiusSchedule::parse("powerlog:1,-1,0,2");
    for (int trial = 0; trial < 10; ++trial) {
        OrbitStream o1 = OrbitStream::random(SystemSpec::kary(2), 512, rng);
        OrbitStream o2 = OrbitStream::random(SystemSpec::kary(2), 512, rng);
        ClosenessProfile prof = closeness_profile(o1, o2, 512, &sched);
        if (!prof.first_hit) continue;
        double r_hit = sched.eval(*prof.first_hit);
        for (const auto& cp : prof.checkpoints) {
            if (cp.n >= *prof.first_hit && sched.eval(cp.n) >= r_hit)
                CHECK(radius_threshold(sched.eval(cp.n)).admits(cp.m_ticks));
        }
    }
}

TEST_CASE("cross pair counts: everything within a half circle") {
    Rng rng(67);
    OrbitStream o1 = OrbitStream::random(SystemSpec::kary(2), 64, rng);
    OrbitStream o2 = OrbitStream::random(SystemSpec::kary(2), 64, rng);
    RadiusSchedule half = RadiusSchedule::custom({{1, 0.5001}});
    CounterStatistics s = count_statistics(&o1, &o2, 64, half, CounterKind::CrossPairs);
    for (auto [n, count] : s.values) CHECK(count == n * n);
}

TEST_CASE("pair counters agree with direct double loops") {
    Rng rng(68);
    RadiusSchedule sched = RadiusSchedule::parse("powerlog:1,0,0,1");
    for (int trial = 0; trial < 8; ++trial) {
        OrbitStream o1 = random_system_orbit(trial, 128, rng);
        Rng rng2(split_seed(680, static_cast<std::uint64_t>(trial)));
        OrbitStream o2 = random_system_orbit(trial, 128, rng2);
        Metric metric = o1.metric();
        CounterStatistics cross = count_statistics(&o1, &o2, 128, sched, CounterKind::CrossPairs);
        for (auto [n, count] : cross.values) {
            RadiusThreshold t = radius_threshold(sched.eval(n));
            std::uint64_t brute = 0;
            for (std::uint64_t i = 0; i < n; ++i)
                for (std::uint64_t j = 0; j < n; ++j)
                    if (t.admits(distance_ticks(o1.point(i), o2.point(j), metric))) ++brute;
            CHECK(count == brute);
        }
        CounterStatistics self = count_statistics(&o1, nullptr, 128, sched, CounterKind::SelfPairs);
        for (auto [n, count] : self.values) {
            RadiusThreshold t = radius_threshold(sched.eval(n));
            std::uint64_t brute = 0;
            for (std::uint64_t i = 0; i < n; ++i)
                for (std::uint64_t j = i + 1; j < n; ++j)
                    if (t.admits(distance_ticks(o1.point(i), o1.point(j), metric))) ++brute;
            CHECK(count == brute);
        }
    }
}

TEST_CASE("positive cross counts coincide with profile hits") {
    Rng rng(69);
    RadiusSchedule sched = RadiusSchedule::parse("powerlog:1,-1,0,2");
    for (int trial = 0; trial < 10; ++trial) {
        OrbitStream o1 = OrbitStream::random(SystemSpec::kary(2), 128, rng);
        OrbitStream o2 = OrbitStream::random(SystemSpec::kary(2), 128, rng);
        CounterStatistics counts = count_statistics(&o1, &o2, 128, sched, CounterKind::CrossPairs);
        ClosenessProfile prof = closeness_profile(o1, o2, 128, &sched);
        REQUIRE(counts.values.size() == prof.checkpoints.size());
        for (std::size_t i = 0; i < counts.values.size(); ++i) {
            auto [n, count] = counts.values[i];
            bool m_below = radius_threshold(sched.eval(n)).admits(prof.checkpoints[i].m_ticks);
            CHECK((count >= 1) == m_below);
        }
    }
}

TEST_CASE("window cover counts imply nearby self-pairs at radius 4r") {
    Rng rng(70);
    RadiusSchedule sched = RadiusSchedule::parse("powerlog:4,0,0,1"); // r_n = 4/n, decreasing
    for (int trial = 0; trial < 6; ++trial) {
        OrbitStream orbit = OrbitStream::random(SystemSpec::kary(2), 1024, rng);
        CounterStatistics qhat = count_statistics(&orbit, nullptr, 512, sched, CounterKind::WindowCoverPairs, 0.25);
        for (auto [m, count] : qhat.values) {
            if (count == 0) continue;
            std::uint64_t window = 1ull << m;
            double rbar = sched.eval(2 * window);
            // some pair inside [0, 2^m) must sit within 4 rbar
            ClosenessProfile prof = single_orbit_profile(orbit, window, nullptr);
            CHECK(radius_threshold(4.0 * rbar).admits(prof.checkpoints.back().m_ticks));
        }
    }
}

TEST_CASE("profile requires matching metrics and horizons") {
    Rng rng(71);
    OrbitStream a = OrbitStream::random(SystemSpec::kary(2), 64, rng);
    OrbitStream b = OrbitStream::random(SystemSpec::gauss(), 64, rng);
    CHECK_THROWS_AS(closeness_profile(a, b, 64, nullptr), ConfigError);
    OrbitStream c = OrbitStream::random(SystemSpec::kary(2), 32, rng);
    CHECK_THROWS_AS(closeness_profile(a, c, 64, nullptr), ConfigError);
}
