#include "orbitlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "orbitlab/errors.hpp"
#include "orbitlab/oracles.hpp"

namespace orbitlab {

namespace {

constexpr u128 kMaxTicks = ~static_cast<u128>(0);

int log2_floor(std::uint64_t n) {
    int k = -1;
    while (n) {
        n >>= 1;
        ++k;
    }
    return k;
}

// Sorted-ticks range counting.  D is the inclusive bound |a-b| <= D that
// realizes the strict comparison distance < T with D = T-1.
struct SortedTicks {
    std::vector<u128> v;

    explicit SortedTicks(std::span<const CirclePoint> pts) {
        v.reserve(pts.size());
        for (auto p : pts) v.push_back(p.frac);
        std::sort(v.begin(), v.end());
    }

    std::size_t first_at_least(u128 x) const {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
    }
    std::size_t first_greater(u128 x) const {
        return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
    }
};

// ordered cross pairs with |a-b| <= D on the line
std::uint64_t cross_pairs_within(const SortedTicks& A, const SortedTicks& B, u128 D) {
    std::uint64_t count = 0;
    std::size_t lo = 0, hi = 0;
    for (u128 a : A.v) {
        u128 lower = a >= D ? a - D : 0;
        while (lo < B.v.size() && B.v[lo] < lower) ++lo;
        bool upper_open = a > kMaxTicks - D; // a + D wraps: no upper cut
        if (upper_open) {
            hi = B.v.size();
        } else {
            u128 upper = a + D;
            if (hi < lo) hi = lo;
            while (hi < B.v.size() && B.v[hi] <= upper) ++hi;
        }
        count += hi - lo;
    }
    return count;
}

// ordered cross pairs with b - a >= W (wrap band), W > 2^127
std::uint64_t cross_pairs_wrapped_one_side(const SortedTicks& A, const SortedTicks& B, u128 W) {
    std::uint64_t count = 0;
    for (u128 a : A.v) {
        if (a > kMaxTicks - W) break; // a + W wraps: no b can satisfy b >= a + W
        count += B.v.size() - B.first_at_least(a + W);
    }
    return count;
}

} // namespace

std::optional<u128> NearestNeighborIndex::nearest_ticks(CirclePoint q) const {
    if (points_.empty()) return std::nullopt;
    auto it = points_.lower_bound(q.frac);
    u128 best = kMaxTicks;
    if (metric_ == Metric::Circle) {
        u128 succ = (it == points_.end()) ? *points_.begin() : *it;
        u128 pred = (it == points_.begin()) ? *points_.rbegin() : *std::prev(it);
        best = std::min(circle_distance_ticks(q, CirclePoint(succ)), circle_distance_ticks(q, CirclePoint(pred)));
    } else {
        if (it != points_.end()) best = std::min(best, *it - q.frac);
        if (it != points_.begin()) best = std::min(best, q.frac - *std::prev(it));
    }
    return best;
}

bool ScheduleOutcome::any_hit_at_or_after(std::uint64_t n0) const {
    int k0 = log2_floor(n0);
    for (std::size_t k = static_cast<std::size_t>(k0); k < window_hits.size(); ++k)
        if (window_hits[k]) return true;
    return false;
}

ScheduleThresholds ScheduleThresholds::make(const RadiusSchedule& schedule, std::uint64_t N, double radius_factor) {
    ScheduleThresholds t;
    t.per_n.resize(N + 1);
    for (std::uint64_t n = 1; n <= N; ++n) t.per_n[n] = radius_threshold(radius_factor * schedule.eval(n));
    return t;
}

std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t N) {
    std::vector<std::uint64_t> cps;
    for (std::uint64_t n = 1; n <= N; n *= 2) {
        cps.push_back(n);
        if (n > N / 2) break;
    }
    if (cps.empty() || cps.back() != N) cps.push_back(N);
    return cps;
}

namespace {

ClosenessProfile run_profile(const OrbitStream* o1, const OrbitStream* o2, std::uint64_t N,
                             std::span<const ScheduleThresholds* const> schedules,
                             std::span<const std::uint64_t> checkpoints, ProfileMode mode) {
    const OrbitStream& a = *o1;
    Metric metric = a.metric();
    if (mode == ProfileMode::TwoOrbits && o2->metric() != metric)
        throw ConfigError("orbit pair must share a metric");
    if (a.horizon() < N || (o2 && o2->horizon() < N)) throw ConfigError("orbit horizon below N");

    ClosenessProfile prof;
    prof.mode = mode;
    prof.outcomes.resize(schedules.size());
    const int windows = log2_floor(N) + 1;
    for (auto& oc : prof.outcomes) oc.window_hits.assign(static_cast<std::size_t>(windows), 0);

    NearestNeighborIndex idx1(metric);
    NearestNeighborIndex idx2(metric);

    u128 running = kMaxTicks;
    bool have_pair = false;
    std::size_t next_cp = 0;
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == 0) ++next_cp;

    for (std::uint64_t n = 1; n <= N; ++n) {
        if (mode == ProfileMode::TwoOrbits) {
            CirclePoint p1 = o1->point(n - 1);
            CirclePoint p2 = o2->point(n - 1);
            if (auto d = idx2.nearest_ticks(p1)) running = std::min(running, *d);
            if (auto d = idx1.nearest_ticks(p2)) running = std::min(running, *d);
            running = std::min(running, distance_ticks(p1, p2, metric));
            have_pair = true;
            idx1.insert(p1);
            idx2.insert(p2);
        } else {
            CirclePoint p = o1->point(n - 1);
            if (auto d = idx1.nearest_ticks(p)) {
                running = std::min(running, *d);
                have_pair = true;
            }
            idx1.insert(p);
        }

        if (have_pair) {
            auto window = static_cast<std::size_t>(log2_floor(n));
            for (std::size_t s = 0; s < schedules.size(); ++s) {
                if (schedules[s]->per_n[n].admits(running)) {
                    auto& oc = prof.outcomes[s];
                    if (!oc.first_hit) oc.first_hit = n;
                    oc.window_hits[window] = 1;
                }
            }
        }
        if (next_cp < checkpoints.size() && n == checkpoints[next_cp]) {
            ProfileCheckpoint cp;
            cp.n = n;
            cp.m_ticks = running;
            cp.empty = !have_pair;
            prof.checkpoints.push_back(cp);
            ++next_cp;
        }
    }
    if (!prof.outcomes.empty()) prof.first_hit = prof.outcomes.front().first_hit;
    return prof;
}

} // namespace

ClosenessProfile closeness_profile(const OrbitStream& o1, const OrbitStream& o2, std::uint64_t N,
                                   std::span<const ScheduleThresholds* const> schedules,
                                   std::span<const std::uint64_t> checkpoints) {
    return run_profile(&o1, &o2, N, schedules, checkpoints, ProfileMode::TwoOrbits);
}

ClosenessProfile single_orbit_profile(const OrbitStream& o, std::uint64_t N,
                                      std::span<const ScheduleThresholds* const> schedules,
                                      std::span<const std::uint64_t> checkpoints) {
    return run_profile(&o, nullptr, N, schedules, checkpoints, ProfileMode::SingleOrbit);
}

ClosenessProfile closeness_profile(const OrbitStream& o1, const OrbitStream& o2, std::uint64_t N,
                                   const RadiusSchedule* schedule) {
    std::vector<const ScheduleThresholds*> scheds;
    ScheduleThresholds t;
    if (schedule) {
        t = ScheduleThresholds::make(*schedule, N);
        scheds.push_back(&t);
    }
    auto cps = dyadic_checkpoints(N);
    return closeness_profile(o1, o2, N, scheds, cps);
}

ClosenessProfile single_orbit_profile(const OrbitStream& o, std::uint64_t N, const RadiusSchedule* schedule) {
    std::vector<const ScheduleThresholds*> scheds;
    ScheduleThresholds t;
    if (schedule) {
        t = ScheduleThresholds::make(*schedule, N);
        scheds.push_back(&t);
    }
    auto cps = dyadic_checkpoints(N);
    return single_orbit_profile(o, N, scheds, cps);
}

std::uint64_t count_cross_pairs(std::span<const CirclePoint> a, std::span<const CirclePoint> b, RadiusThreshold r,
                                Metric metric) {
    if (a.empty() || b.empty()) return 0;
    if (r.everything) return static_cast<std::uint64_t>(a.size()) * b.size();
    if (r.ticks == 0) return 0;
    u128 D = r.ticks - 1; // |a-b| <= D realizes distance < r
    SortedTicks A(a), B(b);
    if (metric == Metric::Interval) return cross_pairs_within(A, B, D);
    if (r.ticks > (static_cast<u128>(1) << 127)) // circle distance never exceeds 1/2
        return static_cast<std::uint64_t>(a.size()) * b.size();
    u128 W = static_cast<u128>(0) - D; // 2^128 - D
    return cross_pairs_within(A, B, D) + cross_pairs_wrapped_one_side(A, B, W) +
           cross_pairs_wrapped_one_side(B, A, W);
}

std::uint64_t count_self_pairs(std::span<const CirclePoint> pts, RadiusThreshold r, Metric metric) {
    const std::uint64_t n = pts.size();
    if (n < 2) return 0;
    const std::uint64_t all = n * (n - 1) / 2;
    if (r.everything) return all;
    if (r.ticks == 0) return 0;
    u128 D = r.ticks - 1;
    SortedTicks S(pts);
    std::uint64_t direct = 0;
    std::size_t lo = 0;
    for (std::size_t j = 0; j < S.v.size(); ++j) {
        while (S.v[j] - S.v[lo] > D) ++lo;
        direct += j - lo;
    }
    if (metric == Metric::Interval) return direct;
    if (r.ticks > (static_cast<u128>(1) << 127)) return all;
    u128 W = static_cast<u128>(0) - D;
    std::uint64_t wrapped = 0;
    for (std::size_t i = 0; i < S.v.size(); ++i) {
        if (S.v[i] > kMaxTicks - W) break;
        // values past the cut are strictly larger, so the index pairs are i < j
        wrapped += S.v.size() - S.first_at_least(S.v[i] + W);
    }
    return direct + wrapped;
}

CounterStatistics count_statistics(const OrbitStream* o1, const OrbitStream* o2, std::uint64_t N,
                                   const RadiusSchedule& schedule, CounterKind kind, double gamma) {
    CounterStatistics stats;
    stats.kind = kind;
    Metric metric = o1->metric();
    auto prefix = [&](const OrbitStream& o, std::uint64_t count) {
        std::vector<CirclePoint> pts;
        pts.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) pts.push_back(o.point(i));
        return pts;
    };
    switch (kind) {
        case CounterKind::CrossPairs: {
            if (!o2) throw ConfigError("cross pair counts need two orbits");
            for (std::uint64_t n : dyadic_checkpoints(N)) {
                auto a = prefix(*o1, n);
                auto b = prefix(*o2, n);
                stats.values.emplace_back(n, count_cross_pairs(a, b, schedule.threshold(n), metric));
            }
            break;
        }
        case CounterKind::CrossPairsDyadic: {
            if (!o2) throw ConfigError("cross pair counts need two orbits");
            for (std::uint64_t m = 0; (1ull << m) <= N; ++m) {
                std::uint64_t window = 1ull << m;
                auto a = prefix(*o1, window);
                auto b = prefix(*o2, window);
                stats.values.emplace_back(m, count_cross_pairs(a, b, schedule.threshold(2 * window), metric));
            }
            break;
        }
        case CounterKind::SelfPairs: {
            for (std::uint64_t n : dyadic_checkpoints(N)) {
                auto pts = prefix(*o1, n);
                stats.values.emplace_back(n, count_self_pairs(pts, schedule.threshold(n), metric));
            }
            break;
        }
        case CounterKind::WindowCoverPairs: {
            if (!(gamma > 0.0 && gamma < 0.5)) throw ConfigError("gamma must lie in (0, 1/2)");
            stats.gamma = gamma;
            for (std::uint64_t m = 0; (1ull << m) <= N; ++m) {
                std::uint64_t window = 1ull << m;
                auto left_end = static_cast<std::uint64_t>(gamma * static_cast<double>(window));
                auto right_begin = static_cast<std::uint64_t>(
                    std::ceil((1.0 - gamma) * static_cast<double>(window)));
                if (left_end == 0 || right_begin >= window) continue;
                double rbar = schedule.eval(2 * window);
                if (!(rbar > 0.0 && rbar <= 0.125)) continue; // cover needs r <= 1/8
                CircleCover cover = build_cover(rbar, metric);
                std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> balls;
                for (std::uint64_t i = 0; i < left_end; ++i)
                    for (auto p : cover.covering_balls(o1->point(i))) balls[p].first++;
                for (std::uint64_t j = right_begin; j < window; ++j)
                    for (auto p : cover.covering_balls(o1->point(j))) balls[p].second++;
                std::uint64_t total = 0;
                for (const auto& [p, counts] : balls) total += counts.first * counts.second;
                stats.values.emplace_back(m, total);
            }
            break;
        }
    }
    return stats;
}

} // namespace orbitlab
