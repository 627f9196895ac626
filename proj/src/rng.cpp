#include "tumorsynth/rng.hpp"

namespace tumorsynth {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

std::uint64_t fnv1a64(const char* data, std::size_t n) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t counter_rng::raw(rng_stream s, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ static_cast<std::uint64_t>(s));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

double counter_rng::uniform(rng_stream s, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) const {
    // Top 53 bits -> [0, 1).
    return static_cast<double>(raw(s, a, b, c) >> 11) * 0x1.0p-53;
}

double counter_rng::uniform_pm1(rng_stream s, std::uint64_t a, std::uint64_t b,
                                std::uint64_t c) const {
    return 2.0 * uniform(s, a, b, c) - 1.0;
}

bool counter_rng::bernoulli(double p, rng_stream s, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) const {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform(s, a, b, c) < p;
}

} // namespace tumorsynth
