#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace slate {

// Deterministic randomness.  The engine is std::mt19937_64 (its output
// sequence is pinned by the standard); all distributions are hand-rolled
// because the std:: distribution objects are implementation-defined and
// would break cross-toolchain reproducibility.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stable sub-stream derivation: mixes a master seed with up to three stream
// coordinates (e.g. epoch, example index).
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = splitmix64(master ^ 0x5851f42d4c957f2dull);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], rejection-sampled to avoid modulo bias.
    long long uniform_int(long long lo, long long hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<long long>(eng_()); // full 64-bit range
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return lo + static_cast<long long>(r % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller without the cached spare, so copies of an Rng stay in sync.
    double normal(double mean, double sd) {
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        double u2 = uniform01();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + sd * z;
    }

    // Index drawn according to the discrete distribution p[0..n-1] (sums to ~1).
    int categorical(const double* p, int n) {
        double u = uniform01();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        // Guard against rounding: return the last index with positive mass.
        for (int i = n - 1; i >= 0; --i)
            if (p[i] > 0.0) return i;
        throw std::invalid_argument("categorical: no positive mass");
    }

private:
    std::mt19937_64 eng_;
};

} // namespace slate
