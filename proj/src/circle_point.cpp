#include "orbitlab/circle_point.hpp"

#include <cmath>
#include <cstdio>

namespace orbitlab {

namespace {

constexpr u128 u128_max() { return ~static_cast<u128>(0); }

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ConfigError("invalid hex digit in point literal");
}

} // namespace

CirclePoint CirclePoint::from_double(double x) {
    if (!(x >= 0.0) || !(x <= 1.0)) throw DomainError("point outside [0,1]");
    if (x >= 1.0) return CirclePoint(u128_max()); // clamp 1.0 to the last tick
    // x has a 53-bit mantissa, so both scaled halves below are exact.
    double hi_d = std::floor(std::ldexp(x, 64));
    double lo_d = std::ldexp(x, 64) - hi_d;
    auto hi = static_cast<std::uint64_t>(hi_d);
    auto lo = static_cast<std::uint64_t>(std::ldexp(lo_d, 64));
    return CirclePoint((static_cast<u128>(hi) << 64) | lo);
}

CirclePoint CirclePoint::from_hex(std::string_view s) {
    if (s.size() != 32) throw ConfigError("point literal must be 32 hex digits");
    u128 f = 0;
    for (char c : s) f = (f << 4) | static_cast<u128>(hex_digit(c));
    return CirclePoint(f);
}

double CirclePoint::value() const { return ticks_to_double(frac); }

std::string CirclePoint::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(32, '0');
    u128 f = frac;
    for (int i = 31; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[static_cast<unsigned>(f & 0xf)];
        f >>= 4;
    }
    return out;
}

double ticks_to_double(u128 ticks) {
    auto hi = static_cast<std::uint64_t>(ticks >> 64);
    auto lo = static_cast<std::uint64_t>(ticks);
    return std::ldexp(static_cast<double>(hi), -64) + std::ldexp(static_cast<double>(lo), -128);
}

u128 circle_distance_ticks(CirclePoint a, CirclePoint b) {
    u128 d = a.frac - b.frac; // exact mod 1
    u128 e = static_cast<u128>(0) - d;
    return d < e ? d : e; // min(d, 1-d); both zero iff a == b
}

u128 interval_distance_ticks(CirclePoint a, CirclePoint b) {
    return a.frac > b.frac ? a.frac - b.frac : b.frac - a.frac;
}

u128 distance_ticks(CirclePoint a, CirclePoint b, Metric metric) {
    return metric == Metric::Circle ? circle_distance_ticks(a, b) : interval_distance_ticks(a, b);
}

double circle_distance(CirclePoint a, CirclePoint b) { return ticks_to_double(circle_distance_ticks(a, b)); }
double interval_distance(CirclePoint a, CirclePoint b) { return ticks_to_double(interval_distance_ticks(a, b)); }

RadiusThreshold radius_threshold(double r) {
    RadiusThreshold t;
    if (r >= 1.0) {
        t.everything = true;
        return t;
    }
    if (!(r > 0.0)) return t; // ticks 0: nothing admitted
    // ceil(r * 2^128): for d an exact multiple of 2^-128, d < r iff
    // d_ticks < ceil(r * 2^128).
    int ex = 0;
    double m = std::frexp(r, &ex); // r = m * 2^ex, m in [0.5, 1)
    auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53)); // 53-bit integer
    bool mant_exact = std::ldexp(static_cast<double>(mant), ex - 53) == r;
    (void)mant_exact; // by construction always exact for finite doubles
    int shift = ex - 53 + 128; // r * 2^128 = mant * 2^shift
    if (shift >= 0) {
        t.ticks = static_cast<u128>(mant) << shift; // exact, fits: shift <= 75
    } else {
        int s = -shift;
        if (s >= 64) {
            t.ticks = 1; // r below one tick: only exact-zero distances qualify... ceil is 1
        } else {
            u128 q = static_cast<u128>(mant) >> s;
            u128 rem = static_cast<u128>(mant) & ((static_cast<u128>(1) << s) - 1);
            t.ticks = q + (rem != 0 ? 1 : 0);
        }
    }
    return t;
}

BitStreamPoint::BitStreamPoint(int base, std::vector<std::uint8_t> digits)
    : base_(base), digits_(std::move(digits)) {
    if (base_ < 2 || base_ > 255) throw ConfigError("digit base must be in [2,255]");
    for (auto d : digits_)
        if (d >= base_) throw ConfigError("digit out of range for base");
}

BitStreamPoint BitStreamPoint::from_digit_string(int base, std::string_view s, std::size_t pad_to) {
    std::vector<std::uint8_t> ds;
    ds.reserve(std::max(s.size(), pad_to));
    for (char c : s) {
        int v = hex_digit(c);
        ds.push_back(static_cast<std::uint8_t>(v));
    }
    while (ds.size() < pad_to) ds.push_back(0);
    return BitStreamPoint(base, std::move(ds));
}

CirclePoint BitStreamPoint::materialize(std::size_t offset) const {
    auto v = materialize_range(offset, 1);
    return v.front();
}

std::vector<CirclePoint> BitStreamPoint::materialize_range(std::size_t first, std::size_t count) const {
    if (count == 0) return {};
    std::size_t last = first + count - 1;
    if (last + 128 > digits_.size())
        throw InsufficientDigits("digit stream too short: need " + std::to_string(last + 128) +
                                 " digits, have " + std::to_string(digits_.size()));
    std::vector<CirclePoint> out(count);
    const auto k = static_cast<u128>(base_);
    // Backward recurrence: acc_i = floor((d_i * 2^128 + acc_{i+1}) / k).
    // Because d_i*2^128 + acc_{i+1} differs from the true scaled tail by less
    // than 1, the floor after division by k is exact at every step.
    u128 acc = 0;
    for (std::size_t idx = digits_.size(); idx-- > first;) {
        if (base_ == 2) {
            acc = (acc >> 1) | (static_cast<u128>(digits_[idx]) << 127);
        } else {
            u128 d = digits_[idx];
            // (d * 2^128 + acc) / k via two 128/64 limb divisions
            u128 top = (d << 64) | (acc >> 64);
            u128 q_hi = top / k;
            u128 rem = top % k;
            u128 bottom = (rem << 64) | (acc & 0xffffffffffffffffULL);
            u128 q_lo = bottom / k;
            acc = (q_hi << 64) | q_lo;
        }
        if (idx >= first && idx <= last) out[idx - first] = CirclePoint(acc);
    }
    return out;
}

} // namespace orbitlab
