#pragma once

#include <cstdint>

namespace pollcast {

// SplitMix64 generator. Streams derived from (seed, stream) are independent
// of evaluation order, so parallel consumers reproduce serial results.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    SplitMix64(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    // Uniform in [0, bound) without modulo bias; bound > 0.
    std::uint64_t below(std::uint64_t bound);
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Standard normal (Box-Muller, one value per call).
    double normal();
    // Poisson(mean) by inversion for small means, normal approximation above 500.
    std::uint64_t poisson(double mean);

  private:
    std::uint64_t state_;
};

}  // namespace pollcast
