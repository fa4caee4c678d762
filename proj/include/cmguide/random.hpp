#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "cmguide/linalg.hpp"

namespace cmguide {

/// Whether a sampler draws its Gaussian noises or replaces them by zero
/// (the degenerate limit used for deterministic runs and exactness checks).
enum class Noise { Sampled, Zero };

/// SplitMix64 mixing of (seed, index) into an independent substream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Seedable Gaussian source. std::mt19937_64 output is fixed by the standard
/// and boost's normal distribution has a fixed algorithm, so draws are
/// reproducible across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream `index` of the family rooted at `seed` (e.g. one per Monte Carlo run).
    static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(derive_seed(seed, index)); }

    double normal() { return normal_(engine_); }
    double uniform(double lo, double hi) { return boost::random::uniform_real_distribution<double>(lo, hi)(engine_); }
    int uniform_int(int lo, int hi) { return boost::random::uniform_int_distribution<int>(lo, hi)(engine_); }
    Vec standard_normal(Eigen::Index n);

    /// Draw from N(0, L L') given the factor L.
    Vec correlated(const Mat& factor) { return factor * standard_normal(factor.cols()); }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace cmguide
