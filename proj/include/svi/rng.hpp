#pragma once

// Seeded random number generation with reproducible substreams.
//
// The standard <random> distributions are implementation-defined, so the
// library draws uniforms and normals itself from a xoshiro256** engine. All
// results are therefore bit-identical across standard libraries. Seeding is
// cheap, which the sample-average oracle relies on: it reseeds one generator
// per fixed sample on every map evaluation.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace svi {

/// SplitMix64 step; used for seeding and for deriving substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of substream `stream` under `seed`. Distinct (seed, stream) pairs give
/// statistically independent generators.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t s = seed ^ 0xD1B54A32D192ED03ull;
    std::uint64_t a = splitmix64(s);
    std::uint64_t t = stream + 0x8CB92BA72F3D8DD7ull * (a | 1ull);
    return splitmix64(t) ^ a;
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

    static Rng substream(std::uint64_t seed, std::uint64_t stream) noexcept {
        return Rng(substream_seed(seed, stream));
    }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        has_spare_ = false;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Box-Muller, both variates used).
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Child generator seeded from this one's stream and a tag.
    Rng split(std::uint64_t tag) noexcept { return Rng(substream_seed(next_u64(), tag)); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace svi
