#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dkvkoga/matrix.hpp"

namespace dkv {

/// Deterministic random generator: xoshiro256** seeded through splitmix64.
/// The algorithm is pinned here (not delegated to std::mt19937 or libc) so
/// that a given seed produces the same stream on every platform and build.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64();
    /// Uniform in [0,1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);

    /// Fisher-Yates shuffle.
    void shuffle(std::vector<std::size_t>& items);
    /// k distinct indices from [0, n), in selection order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// Independent generator for a named substream (fold index, timing run, ...).
    SeededRng derive(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
};

/// n samples, uniform in the box [low, high); row i is one sample.
/// Throws InvalidBox unless low < high componentwise.
Matrix sample_uniform(SeededRng& rng, std::span<const double> low, std::span<const double> high,
                      std::size_t n);

} // namespace dkv
