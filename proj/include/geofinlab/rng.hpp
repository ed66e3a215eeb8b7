// Deterministic, platform-independent random streams.
//
// Everything stochastic in this project is keyed by (seed, stream index):
// worker threads pull independent streams, so results do not depend on the
// thread count or scheduling.  std::uniform_*_distribution is deliberately
// avoided -- the standard leaves its output implementation-defined, which
// would break byte-identical reports across toolchains.

#pragma once

#include <cmath>
#include <cstdint>

namespace geofinlab {

// splitmix64: tiny, well-mixed, and exactly reproducible everywhere.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    // Stream constructor: decorrelates (seed, stream) pairs by running the
    // mixer on the concatenation.  Streams for adjacent indices share no
    // visible structure.
    Rng(std::uint64_t seed, std::uint64_t stream) : state(seed) {
        state = next() ^ (stream + 0x9e3779b97f4a7c15ULL);
        (void)next();
    }

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller (deterministic: consumes exactly two
    // uniforms per pair, caches the second value).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace geofinlab
