#pragma once

// Reproducible random streams: SplitMix64 derives per-substream seeds, xoshiro256**
// produces the stream. Every sampler below uses only integer arithmetic or exactly
// rounded IEEE operations, so a (seed, substream) pair yields the same draws on any
// conforming platform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace eforensics::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t &state) noexcept {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of substream `index` under master `seed`.
inline constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(t);
}

class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto &w : state_) {
            w = splitmix64(sm);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
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

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform01() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by rejection (n > 0).
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = max() - (max() % n + 1) % n;
        std::uint64_t x = (*this)();
        while (x > limit) {
            x = (*this)();
        }
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

/// 64-bit fixed-point threshold t with P(u64 < t) = p up to 2^-64.
inline std::uint64_t probability_threshold(double p) noexcept {
    if (p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

/// Binomial(n, p) as a sum of n Bernoulli trials.
inline std::int64_t binomial(Xoshiro256 &gen, std::int64_t n, double p) noexcept {
    const std::uint64_t t = probability_threshold(p);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        hits += gen() < t ? 1 : 0;
    }
    return hits;
}

/// Beta(a, b) for integer shapes: the a-th smallest of a + b - 1 uniforms.
inline double beta_int(Xoshiro256 &gen, int a, int b) {
    std::vector<double> u(static_cast<std::size_t>(a + b - 1));
    for (auto &x : u) {
        x = gen.uniform01();
    }
    auto nth = u.begin() + (a - 1);
    std::nth_element(u.begin(), nth, u.end());
    return *nth;
}

}  // namespace eforensics::rng
