#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rme {

// Seeded RNG with hand-derived float draws. std::mt19937_64 output is pinned
// by the standard, while the std distributions are implementation-defined;
// deriving uniforms from raw bits keeps generated models identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 24 bits of mantissa.
    float unit() {
        return static_cast<float>(gen_() >> 40) * (1.0f / 16777216.0f);
    }

    float uniform(float lo, float hi) { return lo + (hi - lo) * unit(); }

    // Box-Muller; avoids log(0) by offsetting into (0, 1].
    float normal() {
        float u1 = 1.0f - unit();
        float u2 = unit();
        return std::sqrt(-2.0f * std::log(u1)) *
               std::cos(6.28318530717958647692f * u2);
    }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace rme
