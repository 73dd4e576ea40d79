#pragma once

#include <cstdint>
#include <random>

namespace daclin {

// Seeded generator with portable derived distributions.
//
// std::mt19937_64 has a standardized output sequence, but the <random>
// distributions do not, so uniform/normal/bounded draws are derived here to
// keep every simulation bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform();

    // Uniform integer in [0, bound), bound > 0, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    // Standard normal via Box-Muller; the second variate is cached.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Derive an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace daclin
