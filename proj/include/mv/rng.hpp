#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mv {

// Deterministic random stream. mt19937_64 output is pinned by the standard,
// and doubles are derived from raw bits rather than std::uniform_real_distribution
// (whose output is implementation-defined), so a seed reproduces bit-identical
// runs everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t bits() { return engine_(); }

    // Uniform in [0, 1), 53 random mantissa bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard Gaussian via Box-Muller; draws are consumed in pairs.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stream derivation, so independent substreams (lifting vs. flag) can be
// re-seeded without disturbing each other.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream, uint64_t attempt = 0) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * attempt;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace mv
