#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orbitlab/circle_point.hpp"

namespace orbitlab {

/// Fourier coefficients of the periodized indicator of B(0, r) on the circle:
/// c_0 = 2r, c_k = sin(2 pi k r) / (pi k).  Always |c_k| <= min(2r, 1/(pi|k|)).
struct FourierIndicator {
    double r = 0.0;
    double coefficient(std::int64_t k) const;
};

struct PairCovariance {
    double value = 0.0;
    double tail_bound = 0.0; // rigorous bound on the dropped series tail
};

/// Covariance of the events {d(k^i1 x, k^j1 y) <= r1} and {d(k^i2 x, k^j2 y) <= r2}
/// under Lebesgue x Lebesgue for the doubling map: exactly 0 unless the index
/// gaps agree, else the two-sided coefficient series truncated at kmax with
/// tail bound 2/(kmax 2^p pi^2), p = |j2 - j1|.
PairCovariance pair_covariance_doubling(int i1, int j1, int i2, int j2, double r1, double r2, std::uint64_t kmax);

/// The same series summed in closed form (kmax -> infinity):
///   2^{-p} (B2({2^p r1 - r2}) - B2({2^p r1 + r2})),  B2(t) = t^2 - t + 1/6.
/// Beyond gap 50 the magnitude is below 2^{-49} r2 and is reported as 0 with
/// that bound folded into the caller-visible contract.
double pair_covariance_limit(int gap, double r1, double r2);

// Default truncation index used where the contract does not supply one.
std::uint64_t pair_covariance_default_kmax(int gap, double r1, double r2);

/// Lebesgue measure of {x : circle distance(x, 2^n x) < r}: multiplication by
/// 2^n - 1 preserves Lebesgue measure on the circle, so the answer is
/// min(2r, 1) for every n >= 1.
double short_return_measure_doubling(double r, int n);

/// Covariance of indicator observables 1_[a1,b1) and 1_[a2,b2) o T^lag under
/// the doubling map, from the closed-form Fourier sum.
double doubling_lag_covariance(double a1, double b1, double a2, double b2, int lag);

// Exact minimal rotation distances in 128-bit arithmetic.
u128 rotation_min_distance_ticks(CirclePoint delta, CirclePoint alpha, std::uint64_t n);
u128 rotation_single_min_ticks(CirclePoint alpha, std::uint64_t n);
double rotation_min_distance(CirclePoint delta, CirclePoint alpha, std::uint64_t n);

enum class QuadraticTag { Golden, Sqrt2m1 };

struct DiophantineProfile {
    CirclePoint alpha{};
    std::optional<QuadraticTag> tag;
    std::vector<std::uint64_t> quotients; // partial quotients after the integer part
    struct Convergent {
        u128 p = 0;
        u128 q = 0;
        u128 err_ticks = 0;   // ||q alpha|| in ticks of 2^-128
        double q_norm = 0.0;  // q * ||q alpha||
    };
    std::vector<Convergent> convergents;
    bool precision_exhausted = false;
    std::size_t requested_depth = 0;
};

/// Exact continued fraction of the 128-bit rational alpha via the Euclidean
/// algorithm; quotients and convergents are exact integers.
DiophantineProfile continued_fraction(CirclePoint alpha, std::size_t depth);

/// Tagged quadratic irrationals carry their periodic expansion symbolically,
/// so the quotients never exhaust; convergents stop at 128-bit overflow.
DiophantineProfile continued_fraction(QuadraticTag tag, std::size_t depth);

CirclePoint quadratic_angle(QuadraticTag tag);

enum class DiophForm {
    LogSquared, // weight (log q)^2 (loglog q)^{1+eps}
    LogPhi,     // weight (log q) phi(q)
    Exponent,   // weight q^{1-sigma}, i.e. margin q^{1+sigma} ||q alpha||
};

struct DiophantineMargin {
    double min_margin = 0.0;
    double argmin_q = 0.0;
    std::vector<std::pair<double, double>> trace; // (q, margin) at convergents
};

/// min over convergent denominators q <= qmax of q^2 ||q alpha|| / weight(q);
/// checking convergents suffices because best approximations are convergents
/// and q^2/weight(q) increases.
DiophantineMargin diophantine_condition(const DiophantineProfile& profile, DiophForm form, double param, double qmax,
                                        const std::function<double(double)>& phi = {});

struct UniqueReturnResult {
    bool unique = false;       // no two of the first n rotation iterates are within 2r
    std::uint64_t witness_j = 0;
    u128 min_ticks = 0;        // min_{1<=j<=n} ||j alpha||
};

UniqueReturnResult unique_return_check(CirclePoint alpha, std::uint64_t n, double r);

/// Grid cover of the circle/interval: k(r) = ceil(1/r) centers x_p = p*r; the
/// membership balls have radius 2r, and no point lies in more than five of
/// them.
struct CircleCover {
    double r = 0.0;
    Metric metric = Metric::Circle;
    std::uint64_t k = 0;
    u128 spacing_ticks = 0;
    RadiusThreshold ball_2r;

    // Ball indices p whose 2r-ball contains the point (at most 5).
    std::vector<std::uint64_t> covering_balls(CirclePoint x) const;
    CirclePoint center(std::uint64_t p) const;
};

CircleCover build_cover(double r, Metric metric = Metric::Circle);

struct SandwichResult {
    int middle_sum = 0;   // sum_p 1_p(x) 1_p(y)
    bool lower_ok = true; // 1_{B(x,r)}(y) <= middle
    bool upper_ok = true; // middle <= 5 * 1_{B(x,4r)}(y)
};

SandwichResult indicator_sandwich_check(const CircleCover& cover, CirclePoint x, CirclePoint y);

// Decimal rendering for 128-bit integers (convergents in JSON output).
std::string u128_to_string(u128 v);

} // namespace orbitlab
