#pragma once

#include <span>
#include <vector>

#include "rme/geometry.hpp"
#include "rme/tensor.hpp"

namespace rme {

struct LatentCode {
    std::vector<float> values;
};

struct RadianceSample {
    Vec3 color{0.0f, 0.0f, 0.0f}; // in [0,1]
    float occupancy = 0.0f;       // in [0,1]
    std::vector<float> feature;   // d_f entries when requested, empty otherwise
};

// Per-trunk-layer sine conditioning (frequency, phase), a pure function of z.
struct FilmConditioning {
    std::vector<std::vector<float>> frequency;
    std::vector<std::vector<float>> phase;
};

inline constexpr int kTrunkLayers = 8;
inline constexpr int kTrunkWidth = 256;
inline constexpr int kFeatureTaps = 4; // taps after trunk layers 1,3,5,7

FilmConditioning map_film_conditioning(const LatentCode& latent, const NetParams& params);

// Forward pass of the latent-conditioned radiance network: sine trunk with
// per-layer FiLM conditioning, a view-conditioned color head, a
// view-independent occupancy head, and optional skip-projected features
// (d_f-dimensional, accumulated over the taps).
std::vector<RadianceSample> generate_radiance(const LatentCode& latent,
                                              std::span<const Vec3> points, const Vec3& view_dir,
                                              const NetParams& params, bool with_features);

} // namespace rme
