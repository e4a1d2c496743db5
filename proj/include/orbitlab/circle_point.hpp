#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "orbitlab/errors.hpp"

namespace orbitlab {

using u128 = unsigned __int128;

enum class Metric { Circle, Interval };

/// A point of the unit circle/interval as an unsigned 128-bit fixed-point
/// fraction: value = frac / 2^128.  Wraparound arithmetic is exact mod 1,
/// so expanding-map orbits never degenerate the way binary-64 iteration does.
struct CirclePoint {
    u128 frac = 0;

    CirclePoint() = default;
    explicit constexpr CirclePoint(u128 f) : frac(f) {}

    // Quantizes x in [0,1] to the grid 2^-128; error at most one tick.
    static CirclePoint from_double(double x);
    static CirclePoint from_hex(std::string_view hex32);

    double value() const;
    std::string hex() const; // 32 hex digits, fixed width

    friend CirclePoint operator+(CirclePoint a, CirclePoint b) { return CirclePoint(a.frac + b.frac); }
    friend CirclePoint operator-(CirclePoint a, CirclePoint b) { return CirclePoint(a.frac - b.frac); }
    friend bool operator==(CirclePoint a, CirclePoint b) { return a.frac == b.frac; }
    friend bool operator<(CirclePoint a, CirclePoint b) { return a.frac < b.frac; }
};

// One wrap multiply-add: seed + k*step (mod 1), exact.
inline CirclePoint mul_add_wrap(CirclePoint seed, std::uint64_t k, CirclePoint step) {
    return CirclePoint(seed.frac + step.frac * static_cast<u128>(k));
}

// Distances in ticks of 2^-128.  Circle distance is min(|a-b|, 1-|a-b|),
// interval distance plain |a-b|.
u128 circle_distance_ticks(CirclePoint a, CirclePoint b);
u128 interval_distance_ticks(CirclePoint a, CirclePoint b);
u128 distance_ticks(CirclePoint a, CirclePoint b, Metric metric);

double circle_distance(CirclePoint a, CirclePoint b);
double interval_distance(CirclePoint a, CirclePoint b);

double ticks_to_double(u128 ticks);

/// Strict-inequality radius threshold: for every distance d that is an exact
/// multiple of 2^-128, d < r holds iff d_ticks < ticks (or `everything` when
/// r >= 1, in which case every distance qualifies).
struct RadiusThreshold {
    u128 ticks = 0;
    bool everything = false;

    bool admits(u128 distance_ticks) const {
        return everything || distance_ticks < ticks;
    }
};

RadiusThreshold radius_threshold(double r);

/// A point given by its base-k digit expansion: value = sum digits[i] k^-(i+1).
/// Shifting the read-out offset by one applies x -> kx mod 1 exactly, which is
/// how k-ary expanding orbits are generated without rounding.
class BitStreamPoint {
public:
    BitStreamPoint(int base, std::vector<std::uint8_t> digits);

    // "1101" -> 0.1101 in the given base; optionally zero-padded to pad_to digits.
    static BitStreamPoint from_digit_string(int base, std::string_view digits, std::size_t pad_to = 0);

    int base() const { return base_; }
    std::size_t size() const { return digits_.size(); }
    const std::vector<std::uint8_t>& digits() const { return digits_; }

    /// Exact leading-128-bit value of the point shifted `offset` digits.
    /// Requires at least 128 digits past the offset.
    CirclePoint materialize(std::size_t offset) const;

    /// Exact 128-bit truncations for offsets [first, first+count), in one
    /// backward pass over the digits (cost O(size), not O(count * size)).
    std::vector<CirclePoint> materialize_range(std::size_t first, std::size_t count) const;

private:
    int base_;
    std::vector<std::uint8_t> digits_;
};

} // namespace orbitlab
