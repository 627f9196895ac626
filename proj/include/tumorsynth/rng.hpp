#pragma once

#include <cstdint>

namespace tumorsynth {

/// Named draw streams. Every random decision in the toolkit is a pure
/// function of (seed, stream, a, b, c), so results never depend on the
/// order voxels are visited in, and parallel sweeps reproduce sequential
/// ones exactly.
enum class rng_stream : std::uint64_t {
    proliferate = 1,  // a = step, b = voxel index
    invade = 2,       // a = step, b = source voxel index, c = direction 0..5
    seed_sample = 3,  // a = attempt
    hu_base = 4,
    texture = 5,      // a = scale index, b = lattice node index
    shape_noise = 6,  // a = scale index, b = lattice node index
    recipe_sample = 7,
    placement = 8,    // a = attempt, b = sub-draw
};

std::uint64_t splitmix64(std::uint64_t x);

/// Splittable 64-bit hash used to derive per-row / per-epoch seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

/// 64-bit FNV-1a, used to key manifest rows by case identity.
std::uint64_t fnv1a64(const char* data, std::size_t n);

/// Stateless counter-based generator: each draw hashes its full key, so
/// draws commute and skipped keys cost nothing.
class counter_rng {
  public:
    explicit counter_rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t raw(rng_stream s, std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) const;

    /// Uniform double in [0, 1).
    double uniform(rng_stream s, std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) const;

    /// Uniform double in [-1, 1).
    double uniform_pm1(rng_stream s, std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) const;

    /// True with probability p (p <= 0 never, p >= 1 always).
    bool bernoulli(double p, rng_stream s, std::uint64_t a, std::uint64_t b,
                   std::uint64_t c = 0) const;

  private:
    std::uint64_t seed_;
};

} // namespace tumorsynth
