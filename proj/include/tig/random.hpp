#pragma once

#include <cmath>
#include <cstdint>

namespace tig {

// SplitMix64 (Steele, Lea & Flood 2014). Fully specified integer arithmetic, so
// a seed produces the same stream on every platform; the standard library
// distributions do not give that guarantee, hence the hand-rolled helpers.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Independent child stream; the parent advances by one draw.
    SplitMix64 split() { return SplitMix64(next() ^ 0xD1B54A32D192ED03ULL); }

private:
    std::uint64_t state_;
};

// Stable per-item seed derived from a base seed and a small integer tag.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    SplitMix64 g(base ^ (tag * 0xA24BAED4963EE407ULL));
    return g.next();
}

} // namespace tig
