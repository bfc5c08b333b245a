#pragma once

#include <cstdint>

namespace bidlab {

/// SplitMix64 (Steele, Lea & Flood 2014). Chosen because the update rule is
/// a short, fixed sequence of integer operations, so streams are
/// bit-reproducible on every platform. Independent substreams are derived
/// with split(), which reseeds through the same output function.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0,1), 53 random bits.
    double next_uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double strictly inside (0,1); safe as an inverse-CDF argument.
    double next_uniform_open() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Independent stream keyed by (current seed, stream id).
    SplitMix64 split(uint64_t stream) const {
        SplitMix64 s(state_ ^ (0x94d049bb133111ebULL * (stream + 1)));
        s.next();
        return s;
    }

private:
    uint64_t state_;
};

/// Inverse of the standard normal CDF, Wichura's algorithm AS 241 (PPND16).
/// Relative accuracy about 1e-16 on (0,1); deterministic across platforms.
double inverse_normal_cdf(double p);

/// Standard normal variate via inverse-CDF transform of the uniform stream.
inline double next_normal(SplitMix64& rng) { return inverse_normal_cdf(rng.next_uniform_open()); }

}  // namespace bidlab
