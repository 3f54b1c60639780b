#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace mmcf {

/// Derives an independent child seed from a parent seed and a stream id.
/// Used everywhere a component needs its own generator (per episode, per run,
/// per model) so results never depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

/// xoshiro256** with SplitMix64 seeding. All distributions are implemented
/// here rather than taken from <random> so outputs are identical across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t s_[4];
};

}  // namespace mmcf
