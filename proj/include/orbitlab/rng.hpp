#pragma once

#include <cstdint>
#include <vector>

#include "orbitlab/circle_point.hpp"

namespace orbitlab {

// splitmix64 finalizer; the one fixed scrambler everything else derives from.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Splittable seeding contract: stream t of a base seed is
///   split_seed(base, t) = splitmix64 applied twice to base + (t+1)*GOLDEN64.
/// Trials draw nothing from a shared sequence, so any execution order (or
/// thread count) sees identical per-trial randomness.  Test vectors live in
/// docs/formats.md and tests/test_rng.cpp.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    (void)splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256** with splitmix64 seeding.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // 53-bit uniform in [0,1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    u128 next_u128() {
        u128 hi = next_u64();
        return (hi << 64) | next_u64();
    }

    CirclePoint next_point() { return CirclePoint(next_u128()); }

    // unbiased uniform integer in [0, bound)
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint64_t threshold = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= threshold);
        return static_cast<std::uint32_t>(v % bound);
    }

    std::vector<std::uint8_t> next_digits(int base, std::size_t count) {
        std::vector<std::uint8_t> out(count);
        for (auto& d : out) d = static_cast<std::uint8_t>(next_below(static_cast<std::uint32_t>(base)));
        return out;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace orbitlab
