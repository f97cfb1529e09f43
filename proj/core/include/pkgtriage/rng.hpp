#ifndef PKGTRIAGE_RNG_HPP
#define PKGTRIAGE_RNG_HPP

#include <cstdint>

namespace pkgtriage {

// Seedable generator with a fixed algorithm identity: the state update and
// output function are SplitMix64 (Steele, Lea & Flood 2014). The standard
// library engines would pin the stream but not the distributions, which vary
// across implementations, so bounded draws and unit doubles are implemented
// here as well. Every random decision in the library flows through this type,
// which is what makes fitted models bit-reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). Lemire's multiply-shift; the tiny modulo
    // bias of the plain product is removed by rejection.
    std::uint64_t below(std::uint64_t n) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t floor = (0 - n) % n;
            while (lo < floor) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + unit() * (hi - lo); }

private:
    std::uint64_t state_;
};

// Derives the seed of a substream (ensemble member, fold, model) from a root
// seed. Members seeded this way can be fitted in parallel with results
// identical to sequential execution.
inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace pkgtriage

#endif // PKGTRIAGE_RNG_HPP
