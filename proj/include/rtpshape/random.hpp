#pragma once

#include <cmath>
#include <cstdint>

namespace rtpshape {

/// SplitMix64 (Steele, Lea, Flood). Fixed algorithm so seeded runs are bit-identical everywhere.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// floor(draw * n / 2^64): maps a 64-bit draw onto [0, n).
inline std::uint64_t scale_draw(std::uint64_t draw, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(draw) * n) >> 64);
}

/// Uniform integer in [lo, hi].
inline std::int64_t uniform_in(std::uint64_t draw, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(scale_draw(draw, span));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_interval(std::uint64_t draw) {
    return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

} // namespace rtpshape
