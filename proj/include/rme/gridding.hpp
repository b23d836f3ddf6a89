#pragma once

#include <vector>

#include "rme/geometry.hpp"
#include "rme/radiance.hpp"

namespace rme {

enum class Warp { Linear, BgTrans };

struct SurfaceMapMeta {
    float half_width = 1.0f;
    bool is_background = false;
    Warp warp = Warp::Linear;
};

// N per-surface 2D grids, channels [r, g, b, occupancy, features...].
// Storage is planar per surface: data[((s*C + c)*H + y)*W + x]; row y maps to
// grid coordinate linspace(-half_width, half_width, H)[y] along +y, likewise
// for columns along +x.
struct MapStack {
    int n = 0, h = 0, w = 0, c = 0;
    std::vector<float> data;
    std::vector<SurfaceMapMeta> meta;

    MapStack() = default;
    MapStack(int n_, int h_, int w_, int c_) : n(n_), h(h_), w(w_), c(c_) {
        data.assign(static_cast<std::size_t>(n) * h * w * c, 0.0f);
        meta.assign(n, SurfaceMapMeta{});
    }

    float* plane(int surface, int channel) {
        return data.data() + (static_cast<std::size_t>(surface) * c + channel) * h * w;
    }
    const float* plane(int surface, int channel) const {
        return data.data() + (static_cast<std::size_t>(surface) * c + channel) * h * w;
    }
    float& at(int surface, int channel, int y, int x) {
        return plane(surface, channel)[static_cast<std::size_t>(y) * w + x];
    }
    float at(int surface, int channel, int y, int x) const {
        return plane(surface, channel)[static_cast<std::size_t>(y) * w + x];
    }
};

// Piecewise tangent warp used for the background plane. Odd, continuous,
// strictly increasing; poles at |x| = 0.5 + pi/2.
double bg_transform(double x);
double bg_transform_inverse(double y);

struct GriddingConfig {
    float fg_half_width = 1.0f;
    float bg_half_width = 3.0f;
    float t_near = 0.1f;
    float t_far = 6.0f;
    int mlp_samples = 64;
};

// height*width rays pointing down -z from the z=1 plane. Linear warp places
// origins on linspace(-half_width, half_width, .); BgTrans draws coordinates
// from linspace(-1, 1, .), warps them, then scales by half_width.
std::vector<Ray> grid_rays(int height, int width, float half_width, Warp warp,
                           float t_near = 0.1f, float t_far = 6.0f);

// Flattens every surface to its 2D grid: front-most hit of each grid ray
// against that surface alone, shaded at view direction (0,0,-1). Cells whose
// ray misses get occupancy 0 and color 0.
MapStack grid_manifolds(const LatentCode& latent, const SurfaceSet& surfaces,
                        const NetParams& params, int height, int width, bool with_features,
                        const GriddingConfig& config = {});

// First four channels only (drops the feature planes).
MapStack radiance_only(const MapStack& maps);

} // namespace rme
