#pragma once

#include <cstdint>
#include <limits>

namespace rgg {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive the seed of child stream `index` from `parent`.
///
/// Streams form a tree: a trial seed is child_seed(child_seed(master, cell), trial).
/// The result depends only on its arguments, never on call order, so parallel
/// trials are reproducible regardless of scheduling.
constexpr std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent ^ 0x6a09e667f3bcc909ULL) + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

/// xoshiro256** seeded through SplitMix64. Satisfies UniformRandomBitGenerator.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = mix64(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
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

    /// Uniform double in the open interval (0, 1).
    constexpr double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

}  // namespace rgg
