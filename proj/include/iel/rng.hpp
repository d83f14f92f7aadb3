#pragma once

#include <cstdint>

namespace iel {

// splitmix64, used to expand user seeds into well-mixed generator states
// and to derive independent substreams (datasets, noise, shuffles).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic xorshift64* generator. All randomness in the project goes
/// through this type, so datasets and experiments reproduce bit-for-bit on
/// any platform (no std::random engines, whose streams are not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
        if (state_ == 0) state_ = 0x6a09e667f3bcc909ULL;
    }

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    /// Uniform in [0, 1) with 24 bits of mantissa.
    float uniform() {
        return static_cast<float>(next_u64() >> 40) * (1.0f / 16777216.0f);
    }

    /// Uniform in [lo, hi).
    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be >= 1. Plain modulo: the bias is
    /// irrelevant here and the stream stays trivially portable.
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    /// Derive an independent substream; `stream` tags the purpose.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return splitmix64(seed ^ splitmix64(stream + 0x51ed2701a9b3c5f7ULL));
    }

private:
    std::uint64_t state_;
};

}  // namespace iel
