#include "rme/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "rme/render.hpp"

namespace rme {

Vec3 OccupancyGrid::node(int x, int y, int z) const {
    const Vec3 e = box_max - box_min;
    return Vec3(box_min.x() + e.x() * static_cast<float>(x) / static_cast<float>(nx - 1),
                box_min.y() + e.y() * static_cast<float>(y) / static_cast<float>(ny - 1),
                box_min.z() + e.z() * static_cast<float>(z) / static_cast<float>(nz - 1));
}

OccupancyGrid fuse_occupancy(std::span<const std::pair<DepthMap, Camera>> views,
                             const GridSpec& spec) {
    if (views.empty()) throw std::invalid_argument("fuse_occupancy: need at least one view");
    OccupancyGrid grid;
    grid.nx = spec.nx;
    grid.ny = spec.ny;
    grid.nz = spec.nz;
    grid.box_min = spec.box_min;
    grid.box_max = spec.box_max;
    grid.values.assign(static_cast<std::size_t>(spec.nx) * spec.ny * spec.nz, 0.5f);

#pragma omp parallel for schedule(static)
    for (int z = 0; z < spec.nz; ++z) {
        for (int y = 0; y < spec.ny; ++y) {
            for (int x = 0; x < spec.nx; ++x) {
                const Vec3 p = grid.node(x, y, z);
                double sum = 0.0;
                int used = 0;
                for (const auto& [depth_map, camera] : views) {
                    double col, row, depth;
                    if (!camera.project(p, &col, &row, &depth)) continue;
                    if (col < 0.0 || col > depth_map.w - 1 || row < 0.0 ||
                        row > depth_map.h - 1)
                        continue;
                    // bilinear depth lookup
                    const int x0 = static_cast<int>(col), y0 = static_cast<int>(row);
                    const int x1 = std::min(x0 + 1, depth_map.w - 1);
                    const int y1 = std::min(y0 + 1, depth_map.h - 1);
                    const double fx = col - x0, fy = row - y0;
                    const double d = (1 - fx) * (1 - fy) * depth_map.at(y0, x0) +
                                     fx * (1 - fy) * depth_map.at(y0, x1) +
                                     (1 - fx) * fy * depth_map.at(y1, x0) +
                                     fx * fy * depth_map.at(y1, x1);
                    sum += 1.0 / (1.0 + std::exp(-spec.k * (depth - d)));
                    ++used;
                }
                if (used > 0)
                    grid.values[(static_cast<std::size_t>(z) * spec.ny + y) * spec.nx + x] =
                        static_cast<float>(sum / used);
            }
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Marching cubes. The 256-entry triangle table is built once at startup by
// pairing cut edges per cube face and walking the pairings into closed loops;
// ambiguous faces (two diagonal inside corners) always pair the edges that
// share an inside corner, the same decision on both sides of the face, so
// adjacent cells cannot produce cracks.
// ---------------------------------------------------------------------------

namespace {

// Corner i position bit layout: (x, y, z) each 0/1.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
constexpr int kFaceEdges[6][4] = {
    {0, 1, 2, 3},   // z = 0
    {4, 5, 6, 7},   // z = 1
    {0, 9, 4, 8},   // y = 0
    {2, 11, 6, 10}, // y = 1
    {3, 11, 7, 8},  // x = 0
    {1, 10, 5, 9},  // x = 1
};

struct TriTable {
    // Flattened (a,b,c) edge triples per config, -1 terminated.
    std::array<std::array<signed char, 34>, 256> rows;

    TriTable() {
        for (int config = 0; config < 256; ++config) build(config);
    }

    void build(int config) {
        auto& row = rows[config];
        row.fill(-1);
        auto inside = [&](int corner) { return (config >> corner) & 1; };

        bool cut[12];
        for (int e = 0; e < 12; ++e)
            cut[e] = inside(kEdge[e][0]) != inside(kEdge[e][1]);

        // partner[e][0/1]: the paired edge of e within each of its two faces.
        int partner[12][2];
        int partner_count[12] = {0};
        for (const auto& face : kFaceEdges) {
            std::vector<int> cut_edges;
            for (int e : face)
                if (cut[e]) cut_edges.push_back(e);
            auto pair_up = [&](int a, int b) {
                partner[a][partner_count[a]++] = b;
                partner[b][partner_count[b]++] = a;
            };
            if (cut_edges.size() == 2) {
                pair_up(cut_edges[0], cut_edges[1]);
            } else if (cut_edges.size() == 4) {
                // join edges that share an inside corner
                auto inside_corner = [&](int e) {
                    return inside(kEdge[e][0]) ? kEdge[e][0] : kEdge[e][1];
                };
                const int first = cut_edges[0];
                bool matched = false;
                for (std::size_t i = 1; i < 4; ++i) {
                    if (!matched && inside_corner(cut_edges[i]) == inside_corner(first)) {
                        pair_up(first, cut_edges[i]);
                        std::vector<int> rest;
                        for (std::size_t j = 1; j < 4; ++j)
                            if (j != i) rest.push_back(cut_edges[j]);
                        pair_up(rest[0], rest[1]);
                        matched = true;
                    }
                }
            }
        }

        // Walk pairings into loops; every cut edge has exactly two partners.
        bool used[12] = {false};
        int out = 0;
        for (int start = 0; start < 12; ++start) {
            if (!cut[start] || used[start]) continue;
            std::vector<int> loop{start};
            used[start] = true;
            int prev = -1, cur = start;
            while (true) {
                const int next = (partner[cur][0] != prev) ? partner[cur][0] : partner[cur][1];
                if (next == start) break;
                loop.push_back(next);
                used[next] = true;
                prev = cur;
                cur = next;
            }

            orient(loop, config);
            for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
                row[out++] = static_cast<signed char>(loop[0]);
                row[out++] = static_cast<signed char>(loop[i]);
                row[out++] = static_cast<signed char>(loop[i + 1]);
            }
        }
    }

    // Flip the loop so triangle normals point from inside (bit set) to outside.
    static void orient(std::vector<int>& loop, int config) {
        auto midpoint = [&](int e) {
            return Eigen::Vector3d(
                (kCorner[kEdge[e][0]][0] + kCorner[kEdge[e][1]][0]) * 0.5,
                (kCorner[kEdge[e][0]][1] + kCorner[kEdge[e][1]][1]) * 0.5,
                (kCorner[kEdge[e][0]][2] + kCorner[kEdge[e][1]][2]) * 0.5);
        };
        Eigen::Vector3d normal = Eigen::Vector3d::Zero();
        const Eigen::Vector3d v0 = midpoint(loop[0]);
        for (std::size_t i = 1; i + 1 < loop.size(); ++i)
            normal += (midpoint(loop[i]) - v0).cross(midpoint(loop[i + 1]) - v0);

        double agree = 0.0;
        for (int e : loop) {
            const int c_in = ((config >> kEdge[e][0]) & 1) ? kEdge[e][0] : kEdge[e][1];
            const int c_out = (c_in == kEdge[e][0]) ? kEdge[e][1] : kEdge[e][0];
            const Eigen::Vector3d dir(kCorner[c_out][0] - kCorner[c_in][0],
                                      kCorner[c_out][1] - kCorner[c_in][1],
                                      kCorner[c_out][2] - kCorner[c_in][2]);
            agree += normal.dot(dir);
        }
        if (agree < 0.0) std::reverse(loop.begin(), loop.end());
    }
};

const TriTable& tri_table() {
    static const TriTable table;
    return table;
}

} // namespace

Mesh marching_cubes(const OccupancyGrid& grid, float level) {
    Mesh mesh;
    if (grid.values.empty()) return mesh;
    const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
    if (!(level > *lo && level < *hi)) return mesh;

    const TriTable& table = tri_table();
    std::unordered_map<std::uint64_t, int> edge_vertex;
    auto edge_key = [&](int x, int y, int z, int axis) {
        return ((static_cast<std::uint64_t>(z) * grid.ny + y) * grid.nx + x) * 4 + axis;
    };

    auto vertex_on_edge = [&](int cx, int cy, int cz, int e) {
        const int* a = kCorner[kEdge[e][0]];
        const int* b = kCorner[kEdge[e][1]];
        // Canonical key: lower node plus axis of variation.
        const int ox = cx + std::min(a[0], b[0]);
        const int oy = cy + std::min(a[1], b[1]);
        const int oz = cz + std::min(a[2], b[2]);
        const int axis = (a[0] != b[0]) ? 0 : (a[1] != b[1]) ? 1 : 2;
        const std::uint64_t key = edge_key(ox, oy, oz, axis);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;

        int nx2 = ox, ny2 = oy, nz2 = oz;
        if (axis == 0) ++nx2;
        if (axis == 1) ++ny2;
        if (axis == 2) ++nz2;
        const float f0 = grid.at(ox, oy, oz);
        const float f1 = grid.at(nx2, ny2, nz2);
        const float t = (level - f0) / (f1 - f0);
        const Vec3 p0 = grid.node(ox, oy, oz);
        const Vec3 p1 = grid.node(nx2, ny2, nz2);
        const int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(p0 + t * (p1 - p0));
        edge_vertex.emplace(key, idx);
        return idx;
    };

    for (int z = 0; z + 1 < grid.nz; ++z) {
        for (int y = 0; y + 1 < grid.ny; ++y) {
            for (int x = 0; x + 1 < grid.nx; ++x) {
                int config = 0;
                for (int c = 0; c < 8; ++c) {
                    if (grid.at(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]) > level)
                        config |= 1 << c;
                }
                if (config == 0 || config == 255) continue;
                const auto& row = table.rows[config];
                for (int i = 0; row[i] >= 0; i += 3) {
                    const int va = vertex_on_edge(x, y, z, row[i]);
                    const int vb = vertex_on_edge(x, y, z, row[i + 1]);
                    const int vc = vertex_on_edge(x, y, z, row[i + 2]);
                    if (va == vb || vb == vc || va == vc) continue;
                    mesh.triangles.push_back({va, vb, vc});
                }
            }
        }
    }
    return mesh;
}

std::vector<Mesh> bake_textured_mesh(const SurfaceSet& surfaces, const MapStack& maps,
                                     const GriddingConfig& config) {
    if (maps.c != 4)
        throw std::invalid_argument("bake_textured_mesh: maps must be radiance-only");
    if (maps.n != surfaces.count())
        throw std::invalid_argument("bake_textured_mesh: map stack does not match surfaces");

    std::vector<Mesh> meshes(maps.n);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < maps.n; ++s) {
        Mesh& mesh = meshes[s];
        mesh.surface_index = s;
        const SurfaceMapMeta& meta = maps.meta[s];
        const std::vector<Ray> rays =
            grid_rays(maps.h, maps.w, meta.half_width, meta.warp, config.t_near, config.t_far);

        std::vector<int> node_index(rays.size(), -1);
        for (int row = 0; row < maps.h; ++row) {
            for (int col = 0; col < maps.w; ++col) {
                const std::size_t j = static_cast<std::size_t>(row) * maps.w + col;
                Intersection isect;
                if (!intersect_surface_front(rays[j], surfaces, s, &isect, config.mlp_samples))
                    continue;
                node_index[j] = static_cast<int>(mesh.vertices.size());
                mesh.vertices.push_back(isect.point);
                mesh.uv.emplace_back(static_cast<float>(col), static_cast<float>(row));
            }
        }
        for (int row = 0; row + 1 < maps.h; ++row) {
            for (int col = 0; col + 1 < maps.w; ++col) {
                const int i00 = node_index[static_cast<std::size_t>(row) * maps.w + col];
                const int i10 = node_index[static_cast<std::size_t>(row) * maps.w + col + 1];
                const int i01 = node_index[static_cast<std::size_t>(row + 1) * maps.w + col];
                const int i11 = node_index[static_cast<std::size_t>(row + 1) * maps.w + col + 1];
                if (i00 < 0 || i10 < 0 || i01 < 0 || i11 < 0) continue;
                mesh.triangles.push_back({i00, i10, i11});
                mesh.triangles.push_back({i00, i11, i01});
            }
        }
    }
    return meshes;
}

namespace {

struct Fragment {
    float depth = std::numeric_limits<float>::infinity();
    float u = 0.0f, v = 0.0f;
    bool valid = false;
};

// Nearest-fragment rasterization of one mesh with perspective-correct uv.
void rasterize_layer(const Mesh& mesh, const Camera& camera, std::vector<Fragment>& layer) {
    const int w = camera.width, h = camera.height;
    layer.assign(static_cast<std::size_t>(w) * h, Fragment{});

    struct Projected {
        double x, y, z;
        bool ok;
    };
    std::vector<Projected> proj(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        double col, row, depth;
        proj[i].ok = camera.project(mesh.vertices[i], &col, &row, &depth);
        proj[i].x = col;
        proj[i].y = row;
        proj[i].z = depth;
    }

    for (const auto& tri : mesh.triangles) {
        const Projected& a = proj[tri[0]];
        const Projected& b = proj[tri[1]];
        const Projected& c = proj[tri[2]];
        if (!a.ok || !b.ok || !c.ok) continue;

        const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if (std::abs(area) < 1e-12) continue;

        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
        if (x0 > x1 || y0 > y1) continue;

        const Eigen::Vector2f uva = mesh.uv[tri[0]];
        const Eigen::Vector2f uvb = mesh.uv[tri[1]];
        const Eigen::Vector2f uvc = mesh.uv[tri[2]];
        const double inv_area = 1.0 / area;

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double px = x, py = y;
                double l0 = ((b.x - px) * (c.y - py) - (b.y - py) * (c.x - px)) * inv_area;
                double l1 = ((c.x - px) * (a.y - py) - (c.y - py) * (a.x - px)) * inv_area;
                double l2 = 1.0 - l0 - l1;
                if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
                const double inv_z = l0 / a.z + l1 / b.z + l2 / c.z;
                const double z = 1.0 / inv_z;
                Fragment& frag = layer[static_cast<std::size_t>(y) * w + x];
                if (z >= frag.depth) continue;
                const double u = (l0 * uva.x() / a.z + l1 * uvb.x() / b.z + l2 * uvc.x() / c.z) * z;
                const double v = (l0 * uva.y() / a.z + l1 * uvb.y() / b.z + l2 * uvc.y() / c.z) * z;
                frag.depth = static_cast<float>(z);
                frag.u = static_cast<float>(u);
                frag.v = static_cast<float>(v);
                frag.valid = true;
            }
        }
    }
}

} // namespace

Image render_cached(std::span<const Mesh> meshes, const MapStack& maps, const Camera& camera) {
    camera.validate();
    if (maps.c != 4) throw std::invalid_argument("render_cached: maps must be radiance-only");
    Image img(camera.height, camera.width);
    if (meshes.empty()) return img;

    const int w = camera.width, h = camera.height;
    std::vector<std::vector<Fragment>> layers(meshes.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(meshes.size()); ++m)
        rasterize_layer(meshes[m], camera, layers[m]);

#pragma omp parallel
    {
        std::vector<std::pair<float, int>> order;
        std::vector<ShadeSample> shades;
        std::vector<float> channels(maps.c);
#pragma omp for schedule(static)
        for (int p = 0; p < w * h; ++p) {
            order.clear();
            for (std::size_t m = 0; m < layers.size(); ++m)
                if (layers[m][p].valid)
                    order.emplace_back(layers[m][p].depth, static_cast<int>(m));
            std::sort(order.begin(), order.end());
            shades.clear();
            for (const auto& [depth, m] : order) {
                const Fragment& frag = layers[m][p];
                if (!sample_map_bilinear(maps, meshes[m].surface_index, frag.u, frag.v,
                                         channels.data()))
                    continue;
                ShadeSample s;
                s.color = Vec3(channels[0], channels[1], channels[2]);
                s.alpha = std::clamp(channels[3], 0.0f, 1.0f);
                shades.push_back(s);
            }
            const CompositeResult r = composite(shades);
            float* px = img.data.data() + static_cast<std::size_t>(p) * 3;
            px[0] = static_cast<float>(std::clamp(r.color.x(), 0.0, 1.0));
            px[1] = static_cast<float>(std::clamp(r.color.y(), 0.0, 1.0));
            px[2] = static_cast<float>(std::clamp(r.color.z(), 0.0, 1.0));
        }
    }
    return img;
}

} // namespace rme
