#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace optiplan::num {

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a master seed and a stream index.
/// Used so per-tunnel / per-split work can run in any order (or in parallel)
/// and still reproduce the serial output exactly.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Deterministic 64-bit generator: xoshiro256++ with its state expanded from
/// the seed by SplitMix64 (the reference seeding procedure). Uniform doubles
/// take the top 53 bits; normals come from the Box-Muller transform of two
/// uniforms. The algorithm identity is fixed so golden files stay stable
/// across platforms.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal sample.
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Independent child generator for the given stream index; depends only
    /// on the construction seed, not on how much this generator has produced.
    SeededRng derive(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// n standard-normal samples drawn from rng (n may be 0).
std::vector<double> normal_samples(SeededRng& rng, std::size_t n);

}  // namespace optiplan::num
