#pragma once

#include <cstdint>
#include <random>

namespace peye {

/// SplitMix64 finalizer. Used to derive independent per-frame and per-purpose
/// seeds from one master seed, so frames can be generated in any order.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t frame_seed(std::uint64_t master, std::uint64_t frame_index) {
    return mix64(master ^ frame_index);
}

/// Seed for a named sub-stream (e.g. vehicle placement vs. prop jitter).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

inline constexpr std::uint64_t kDefaultSeed = 20170801ULL;

/// Thin wrapper over mt19937_64 with distribution code spelled out here, since
/// the standard distributions are not guaranteed identical across libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace peye
