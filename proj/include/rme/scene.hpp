#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rme/camera.hpp"
#include "rme/geometry.hpp"
#include "rme/gridding.hpp"
#include "rme/radiance.hpp"

namespace rme {

// Line-oriented `key = value` scene configuration. Unknown keys are rejected
// with the offending line number.
struct SceneConfig {
    int n_surfaces = 24;
    float r_min = 0.5f;
    float r_max = 2.6f;
    float plane_z = -1.0f;
    std::string field = "analytic"; // analytic | mlp
    int d_z = 256;
    int d_f = 32;
    int lr_size = 64;
    int sr_factor = 16;
    float fg_half_width = 1.0f;
    float bg_half_width = 3.0f;
    float t_near = 0.1f;
    float t_far = 6.0f;
    float orbit_radius = 2.7f;
    Vec3 look_at{0.0f, 0.0f, -1.5f};
    float fov_deg = 12.0f;
    int width = 256;
    int height = 256;
    std::uint64_t seed = 1234;
    float consistency_image_weight = 1.0f;
    float consistency_map_weight = 1.0f;
    float r1_lambda = 10.0f;

    std::string to_text() const;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

SceneConfig parse_scene_config(const std::string& text);
SceneConfig load_scene_config(const std::filesystem::path& path);

GriddingConfig gridding_config(const SceneConfig& config);
Camera make_camera(const SceneConfig& config, float yaw = 0.0f, float pitch = 0.0f,
                   float roll = 0.0f);

// Seeded, reproducible stand-in weights for every network plus the latent
// code ("latent.z") and surface-set description; same seed, same bits.
NetParams gen_test_model(std::uint64_t seed, const SceneConfig& config);

// Surface set embedding inside the weight container ("surfaces.*" tensors).
void store_surfaces(NetParams& params, const SurfaceSet& surfaces);
SurfaceSet load_surfaces(const NetParams& params);

LatentCode load_latent(const NetParams& params);

} // namespace rme
