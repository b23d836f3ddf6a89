#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "rme/camera.hpp"
#include "rme/gridding.hpp"
#include "rme/image.hpp"

namespace rme {

struct ShadeSample {
    Vec3 color{0.0f, 0.0f, 0.0f};
    float alpha = 0.0f;
};

struct CompositeResult {
    Eigen::Vector3d color{0.0, 0.0, 0.0};
    std::vector<double> weights;       // w_i = T_i * alpha_i
    std::vector<double> transmittance; // T_i
};

// Front-to-back over-compositing: C = sum_i T_i a_i c_i, T_i = prod_{j<i}(1-a_j).
// Samples must already be sorted front to back.
CompositeResult composite(std::span<const ShadeSample> samples);

struct CompositeGradients {
    std::vector<double> d_color;           // dC/dc_i, per channel (equals w_i)
    std::vector<Eigen::Vector3d> d_alpha;  // dC/da_i
};

CompositeGradients composite_gradients(std::span<const ShadeSample> samples);

// Continuous grid-coordinate lookup with miss semantics outside
// [0, W-1] x [0, H-1]; writes maps.c channels. Returns false on a miss.
bool sample_map_bilinear(const MapStack& maps, int surface, double u, double v, float* out);

// Inverse of the gridding ray placement: world (x, y) on the surface to
// continuous (u, v). Background points beyond the warp range are misses.
bool project_to_map(const Vec3& point, const SurfaceMapMeta& meta, int h, int w, double* u,
                    double* v);

struct RenderConfig {
    float t_near = 0.1f;
    float t_far = 6.0f;
    int mlp_samples = 64;
};

Image render_image(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                   const RenderConfig& config = {});

DepthMap render_depth(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                      const RenderConfig& config = {});

// Stacks one fixed row segment across a yaw-ordered frame sequence: output
// row k is frames[k]'s selected segment.
Image build_epi(std::span<const Image> frames, int row, int col_begin, int col_end);

} // namespace rme
