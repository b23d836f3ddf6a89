#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "rme/camera.hpp"
#include "rme/gridding.hpp"
#include "rme/image.hpp"

namespace rme {

struct GridSpec {
    int nx = 128, ny = 128, nz = 128;
    Vec3 box_min{-1.0f, -1.0f, -2.5f};
    Vec3 box_max{1.0f, 1.0f, -0.5f};
    double k = 10.0; // sigmoid sharpness of the depth test
};

// Node-centered scalar grid in [0,1] over an axis-aligned box.
struct OccupancyGrid {
    int nx = 0, ny = 0, nz = 0;
    Vec3 box_min{0, 0, 0}, box_max{0, 0, 0};
    std::vector<float> values; // [(z*ny + y)*nx + x]

    float at(int x, int y, int z) const {
        return values[(static_cast<std::size_t>(z) * ny + y) * nx + x];
    }
    Vec3 node(int x, int y, int z) const;
};

// Mean over views of Sigmoid(k * (projected depth - observed depth)); grid
// points outside every frustum get the uninformative 0.5.
OccupancyGrid fuse_occupancy(std::span<const std::pair<DepthMap, Camera>> views,
                             const GridSpec& spec);

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Eigen::Vector2f> uv; // continuous map-grid coordinates, optional
    int surface_index = -1;
};

// 256-case table extraction with linear edge interpolation. Levels outside
// the grid's value range yield an empty mesh.
Mesh marching_cubes(const OccupancyGrid& grid, float level);

// Tessellates every surface on its gridding lattice (two triangles per cell,
// cells dropped when a corner ray misses); uv are the lattice coordinates, so
// the surface's radiance map acts as the texture (occupancy as alpha).
std::vector<Mesh> bake_textured_mesh(const SurfaceSet& surfaces, const MapStack& maps,
                                     const GriddingConfig& config = {});

// Software rasterizer over the baked meshes: per-surface nearest-fragment
// layers, then per-pixel depth-ordered compositing with texture lookup from
// `maps`. Matches render_image up to rasterization error.
Image render_cached(std::span<const Mesh> meshes, const MapStack& maps, const Camera& camera);

} // namespace rme
