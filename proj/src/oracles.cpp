#include "orbitlab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orbitlab/dynamics.hpp"
#include "orbitlab/errors.hpp"

namespace orbitlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double frac(double x) { return x - std::floor(x); }

// Bernoulli polynomial B2 on [0,1); sum_{k>=1} cos(2 pi k t)/k^2 = pi^2 B2({t}).
double bernoulli2(double t) { return t * t - t + 1.0 / 6.0; }

constexpr int kGapCutoff = 50;

// Convergent denominators past 2^62 outrun the 128-bit quantization of a
// tagged irrational angle; values there would be noise, so generation stops.
const u128 kConvergentQCap = static_cast<u128>(1) << 62;

double u128_to_double(u128 v) {
    auto hi = static_cast<std::uint64_t>(v >> 64);
    auto lo = static_cast<std::uint64_t>(v);
    return std::ldexp(static_cast<double>(hi), 64) + static_cast<double>(lo);
}

void push_convergents_from_quotients(DiophantineProfile& profile, bool cap_at_quantization) {
    // p_k = a_k p_{k-1} + p_{k-2}, same for q; stop at 128-bit overflow.
    u128 p_prev = 1, q_prev = 0;
    u128 p_cur = 0, q_cur = 1;
    const u128 umax = ~static_cast<u128>(0);
    for (std::uint64_t a : profile.quotients) {
        u128 au = a;
        if (q_cur != 0 && au != 0 && q_cur > (umax - q_prev) / au) {
            profile.precision_exhausted = true;
            break;
        }
        u128 p_next = au * p_cur + p_prev;
        u128 q_next = au * q_cur + q_prev;
        if (cap_at_quantization && q_next > kConvergentQCap) {
            profile.precision_exhausted = true;
            break;
        }
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
        DiophantineProfile::Convergent c;
        c.p = p_cur;
        c.q = q_cur;
        c.err_ticks = circle_distance_ticks(CirclePoint(profile.alpha.frac * q_cur), CirclePoint(0));
        c.q_norm = ticks_to_double(c.err_ticks) * u128_to_double(q_cur);
        profile.convergents.push_back(c);
    }
}

} // namespace

double FourierIndicator::coefficient(std::int64_t k) const {
    if (k == 0) return 2.0 * r;
    double kk = static_cast<double>(k);
    return std::sin(2.0 * kPi * kk * r) / (kPi * kk);
}

std::uint64_t pair_covariance_default_kmax(int gap, double r1, double r2) {
    // Four times the series split index (4 r1 r2)^{-1/2} 2^{-p/2}, floored at 2^20.
    double split = std::pow(4.0 * r1 * r2, -0.5) * std::exp2(-0.5 * std::abs(gap));
    double k = std::max(std::exp2(20.0), 4.0 * split);
    return static_cast<std::uint64_t>(std::min(k, 1e9));
}

PairCovariance pair_covariance_doubling(int i1, int j1, int i2, int j2, double r1, double r2, std::uint64_t kmax) {
    PairCovariance out;
    if (j2 - j1 != i2 - i1) return out; // exactly zero, nothing truncated
    int p = j2 - j1;
    if (p < 0) { // symmetric under swapping the two events
        std::swap(r1, r2);
        p = -p;
    }
    if (p > kGapCutoff) {
        out.tail_bound = std::ldexp(2.0 * r2, -p); // |value| bound, series untouched
        return out;
    }
    if (kmax < 1) throw ConfigError("pair covariance needs kmax >= 1");
    const double scale = std::exp2(static_cast<double>(p));
    double sum = 0.0;
    for (std::uint64_t k = kmax; k >= 1; --k) { // ascend in magnitude for stable summation
        double kk = static_cast<double>(k);
        double c1 = std::sin(2.0 * kPi * kk * scale * r1) / (kPi * kk * scale);
        double c2 = std::sin(2.0 * kPi * kk * r2) / (kPi * kk);
        sum += 2.0 * c1 * c2; // +-k pairs; coefficients are even in k
    }
    out.value = sum;
    out.tail_bound = 2.0 / (static_cast<double>(kmax) * scale * kPi * kPi);
    return out;
}

double pair_covariance_limit(int gap, double r1, double r2) {
    if (gap < 0) {
        std::swap(r1, r2);
        gap = -gap;
    }
    if (gap > kGapCutoff) return 0.0; // |true value| <= 2^{1-gap} r2
    // sum_{k!=0} c1(k 2^p) c2(k) = 2^{-p} (B2({2^p r1 - r2}) - B2({2^p r1 + r2}))
    double a = std::ldexp(r1, gap);
    return std::ldexp(bernoulli2(frac(a - r2)) - bernoulli2(frac(a + r2)), -gap);
}

double short_return_measure_doubling(double r, int n) {
    if (n < 1) throw ConfigError("short returns need n >= 1");
    if (!(r > 0.0)) return 0.0;
    // {x : ||(2^n - 1) x|| < r} is the preimage of B(0,r) under a
    // measure-preserving integer multiplication of the circle.
    return std::min(2.0 * r, 1.0);
}

double doubling_lag_covariance(double a1, double b1, double a2, double b2, int lag) {
    if (lag < 0) throw ConfigError("lag must be nonnegative");
    if (lag > kGapCutoff) return 0.0;
    double len1 = b1 - a1, len2 = b2 - a2;
    if (lag == 0) {
        double lo = std::max(a1, a2), hi = std::min(b1, b2);
        return std::max(0.0, hi - lo) - len1 * len2;
    }
    // sum_{k!=0} psi_hat(-k s) phi_hat(k) with s = 2^lag, summed via B2
    double s = std::exp2(lag);
    double v = bernoulli2(frac(s * a1 - a2)) - bernoulli2(frac(s * a1 - b2)) - bernoulli2(frac(s * b1 - a2)) +
               bernoulli2(frac(s * b1 - b2));
    return v / (2.0 * s);
}

u128 rotation_min_distance_ticks(CirclePoint delta, CirclePoint alpha, std::uint64_t n) {
    if (n < 1) throw ConfigError("need n >= 1");
    // min over |k| <= n-1 of ||delta + k alpha||
    u128 best = circle_distance_ticks(delta, CirclePoint(0));
    CirclePoint up = delta, down = delta;
    for (std::uint64_t k = 1; k < n; ++k) {
        up = up + alpha;
        down = down - alpha;
        best = std::min(best, circle_distance_ticks(up, CirclePoint(0)));
        best = std::min(best, circle_distance_ticks(down, CirclePoint(0)));
    }
    return best;
}

u128 rotation_single_min_ticks(CirclePoint alpha, std::uint64_t n) {
    if (n < 2) throw ConfigError("single-orbit minimum needs n >= 2");
    CirclePoint pos(0);
    u128 best = ~static_cast<u128>(0);
    for (std::uint64_t k = 1; k < n; ++k) {
        pos = pos + alpha;
        best = std::min(best, circle_distance_ticks(pos, CirclePoint(0)));
    }
    return best;
}

double rotation_min_distance(CirclePoint delta, CirclePoint alpha, std::uint64_t n) {
    return ticks_to_double(rotation_min_distance_ticks(delta, alpha, n));
}

CirclePoint quadratic_angle(QuadraticTag tag) {
    return tag == QuadraticTag::Golden ? golden_angle() : sqrt2m1_angle();
}

DiophantineProfile continued_fraction(CirclePoint alpha, std::size_t depth) {
    if (alpha.frac == 0) throw DomainError("continued fraction of 0 has no quotients");
    if (depth > 180) throw PrecisionExhausted("128-bit inputs support depth <= 180");
    DiophantineProfile profile;
    profile.alpha = alpha;
    profile.requested_depth = depth;
    // Euclid on (2^128, frac).  2^128 itself is not representable, so the
    // first step computes 2^128 = a1 * frac + rem through 2^128 - 1.
    u128 num = alpha.frac;
    u128 q0 = (~static_cast<u128>(0)) / num;
    u128 s = (~static_cast<u128>(0)) % num;
    if (q0 >= (static_cast<u128>(1) << 63)) throw PrecisionExhausted("first quotient exceeds 63 bits");
    u128 rem;
    std::uint64_t a1;
    if (s + 1 == num) {
        a1 = static_cast<std::uint64_t>(q0) + 1;
        rem = 0;
    } else {
        a1 = static_cast<std::uint64_t>(q0);
        rem = s + 1;
    }
    profile.quotients.push_back(a1);
    u128 a = num, b = rem;
    while (profile.quotients.size() < depth && b != 0) {
        u128 q = a / b;
        u128 r2 = a % b;
        if (q >= (static_cast<u128>(1) << 63)) {
            profile.precision_exhausted = true;
            break;
        }
        profile.quotients.push_back(static_cast<std::uint64_t>(q));
        a = b;
        b = r2;
    }
    if (profile.quotients.size() < depth) profile.precision_exhausted = true; // expansion terminated
    push_convergents_from_quotients(profile, /*cap_at_quantization=*/false);
    return profile;
}

DiophantineProfile continued_fraction(QuadraticTag tag, std::size_t depth) {
    DiophantineProfile profile;
    profile.alpha = quadratic_angle(tag);
    profile.tag = tag;
    profile.requested_depth = depth;
    profile.quotients.assign(depth, tag == QuadraticTag::Golden ? 1u : 2u);
    push_convergents_from_quotients(profile, /*cap_at_quantization=*/true);
    return profile;
}

DiophantineMargin diophantine_condition(const DiophantineProfile& profile, DiophForm form, double param, double qmax,
                                        const std::function<double(double)>& phi) {
    DiophantineMargin out;
    out.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& c : profile.convergents) {
        double q = u128_to_double(c.q);
        if (q > qmax) break;
        if (q < 2.0) continue;
        double weight = 0.0;
        switch (form) {
            case DiophForm::LogSquared:
                weight = std::pow(std::log(q), 2.0) * std::pow(std::log(std::log(q)), 1.0 + param);
                break;
            case DiophForm::LogPhi:
                weight = std::log(q) * (phi ? phi(q) : std::log(q));
                break;
            case DiophForm::Exponent:
                weight = std::pow(q, 1.0 - param);
                break;
        }
        if (!(weight > 0.0)) continue; // before loglog q turns positive
        double margin = q * q * ticks_to_double(c.err_ticks) / weight;
        out.trace.emplace_back(q, margin);
        if (margin < out.min_margin) {
            out.min_margin = margin;
            out.argmin_q = q;
        }
    }
    if (out.trace.empty()) throw ConfigError("no usable convergents below qmax");
    return out;
}

UniqueReturnResult unique_return_check(CirclePoint alpha, std::uint64_t n, double r) {
    UniqueReturnResult out;
    out.min_ticks = ~static_cast<u128>(0);
    CirclePoint pos(0);
    for (std::uint64_t j = 1; j <= n; ++j) {
        pos = pos + alpha;
        u128 d = circle_distance_ticks(pos, CirclePoint(0));
        if (d < out.min_ticks) {
            out.min_ticks = d;
            out.witness_j = j;
        }
    }
    // At most one iterate per r-ball iff no two iterates are within 2r of
    // each other, i.e. min ||j alpha|| >= 2r.
    out.unique = !radius_threshold(2.0 * r).admits(out.min_ticks);
    return out;
}

CircleCover build_cover(double r, Metric metric) {
    if (!(r > 0.0 && r <= 0.125)) throw ConfigError("covers are built for r in (0, 1/8]");
    if (r < 0x1p-60) throw ConfigError("cover spacing below 2^-60 is not supported");
    CircleCover cover;
    cover.r = r;
    cover.metric = metric;
    cover.k = static_cast<std::uint64_t>(std::ceil(1.0 / r));
    cover.spacing_ticks = radius_threshold(r).ticks; // ceil(r * 2^128)
    cover.ball_2r = radius_threshold(2.0 * r);
    return cover;
}

CirclePoint CircleCover::center(std::uint64_t p) const { return CirclePoint(spacing_ticks * static_cast<u128>(p)); }

std::vector<std::uint64_t> CircleCover::covering_balls(CirclePoint x) const {
    std::vector<std::uint64_t> out;
    // Candidate centers sit within two-and-change grid steps of x.
    auto idx = static_cast<std::int64_t>(x.frac / spacing_ticks);
    for (std::int64_t d = -3; d <= 3; ++d) {
        std::int64_t pi = idx + d;
        std::uint64_t p;
        if (metric == Metric::Circle) {
            auto kk = static_cast<std::int64_t>(k);
            p = static_cast<std::uint64_t>(((pi % kk) + kk) % kk);
        } else {
            if (pi < 0 || pi >= static_cast<std::int64_t>(k)) continue;
            p = static_cast<std::uint64_t>(pi);
        }
        u128 dist = distance_ticks(x, center(p), metric);
        if (ball_2r.admits(dist) && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    return out;
}

SandwichResult indicator_sandwich_check(const CircleCover& cover, CirclePoint x, CirclePoint y) {
    SandwichResult res;
    auto bx = cover.covering_balls(x);
    auto by = cover.covering_balls(y);
    int middle = 0;
    for (auto p : bx)
        if (std::find(by.begin(), by.end(), p) != by.end()) ++middle;
    res.middle_sum = middle;
    u128 d = distance_ticks(x, y, cover.metric);
    bool in_r = radius_threshold(cover.r).admits(d);
    bool in_4r = radius_threshold(4.0 * cover.r).admits(d);
    res.lower_ok = !in_r || middle >= 1;
    res.upper_ok = middle <= (in_4r ? 5 : 0);
    return res;
}

std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v != 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

} // namespace orbitlab
