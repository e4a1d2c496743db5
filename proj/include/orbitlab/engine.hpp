#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "orbitlab/dynamics.hpp"
#include "orbitlab/schedules.hpp"

namespace orbitlab {

/// Ordered set over 128-bit keys; nearest distance is the best of the
/// predecessor and successor, with wraparound under the circle metric.
class NearestNeighborIndex {
public:
    explicit NearestNeighborIndex(Metric metric) : metric_(metric) {}

    void insert(CirclePoint p) { points_.insert(p.frac); }
    std::size_t size() const { return points_.size(); }
    Metric metric() const { return metric_; }

    // min distance from q to any stored point; nullopt when empty
    std::optional<u128> nearest_ticks(CirclePoint q) const;

private:
    std::set<u128> points_;
    Metric metric_;
};

struct ProfileCheckpoint {
    std::uint64_t n = 0;
    u128 m_ticks = 0;
    bool empty = false; // no pairs yet (single-orbit n < 2)
    double m_value() const { return empty ? std::numeric_limits<double>::infinity() : ticks_to_double(m_ticks); }
};

/// Per-schedule outcome of one profile run: the first n with M_n < r_n, and
/// which dyadic windows [2^k, 2^{k+1}) saw a hit (the hit test runs at every
/// n, not only at checkpoints).
struct ScheduleOutcome {
    std::optional<std::uint64_t> first_hit;
    std::vector<std::uint8_t> window_hits;

    bool any_hit_at_or_after(std::uint64_t n0) const;
};

enum class ProfileMode { TwoOrbits, SingleOrbit };

struct ClosenessProfile {
    ProfileMode mode = ProfileMode::TwoOrbits;
    std::vector<ProfileCheckpoint> checkpoints;
    std::vector<ScheduleOutcome> outcomes; // one per requested schedule
    std::optional<std::uint64_t> first_hit; // outcome of the first schedule
};

/// Precomputed strict-comparison thresholds r_n (optionally scaled) for
/// n = 1..N; shared across trials.
struct ScheduleThresholds {
    std::vector<RadiusThreshold> per_n; // index n, [0] unused

    static ScheduleThresholds make(const RadiusSchedule& schedule, std::uint64_t N, double radius_factor = 1.0);
};

std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t N);

/// M_n = min over 0 <= i,j < n of d(o1(i), o2(j)), maintained incrementally:
/// each step inserts one point per orbit and queries the other side's index,
/// so the whole profile costs O(N log N).
ClosenessProfile closeness_profile(const OrbitStream& o1, const OrbitStream& o2, std::uint64_t N,
                                   std::span<const ScheduleThresholds* const> schedules,
                                   std::span<const std::uint64_t> checkpoints);

/// Same with one orbit and pairs i < j; the new point is queried before it is
/// inserted, so the diagonal is never compared.
ClosenessProfile single_orbit_profile(const OrbitStream& o, std::uint64_t N,
                                      std::span<const ScheduleThresholds* const> schedules,
                                      std::span<const std::uint64_t> checkpoints);

// Spec-shaped conveniences with a single schedule and dyadic checkpoints.
ClosenessProfile closeness_profile(const OrbitStream& o1, const OrbitStream& o2, std::uint64_t N,
                                   const RadiusSchedule* schedule);
ClosenessProfile single_orbit_profile(const OrbitStream& o, std::uint64_t N, const RadiusSchedule* schedule);

enum class CounterKind {
    CrossPairs,       // #{(i,j) in [0,n)^2 : d(o1_i, o2_j) < r_n} at checkpoints n
    CrossPairsDyadic, // the same over [0, 2^m)^2 with radius r_{2^{m+1}}, per exponent m
    SelfPairs,        // #{i < j < n : d(o_i, o_j) < r_n}
    WindowCoverPairs, // cover-mediated count over the windows [0, gamma 2^m) x [(1-gamma) 2^m, 2^m)
};

struct CounterStatistics {
    CounterKind kind = CounterKind::CrossPairs;
    double gamma = 0.0;
    // (n, count) rows; for the dyadic kinds n is the window exponent m
    std::vector<std::pair<std::uint64_t, std::uint64_t>> values;
};

CounterStatistics count_statistics(const OrbitStream* o1, const OrbitStream* o2, std::uint64_t N,
                                   const RadiusSchedule& schedule, CounterKind kind, double gamma = 0.25);

// Exact pair counts used by the counters and tests.
std::uint64_t count_cross_pairs(std::span<const CirclePoint> a, std::span<const CirclePoint> b, RadiusThreshold r,
                                Metric metric);
std::uint64_t count_self_pairs(std::span<const CirclePoint> pts, RadiusThreshold r, Metric metric);

} // namespace orbitlab
