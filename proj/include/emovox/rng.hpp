#ifndef EMOVOX_RNG_HPP
#define EMOVOX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace emovox {

// SplitMix64. Used everywhere randomness is needed so that results do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % n);
    }

    // Standard normal via Box-Muller.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

// Stable seed derivation: mixes a parent seed with a string tag (FNV-1a) so
// per-fold / per-class streams are independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ULL ^ parent;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    // final avalanche
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    std::uint64_t h = parent ^ (0x9e3779b97f4a7c15ULL + index);
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

} // namespace emovox

#endif
