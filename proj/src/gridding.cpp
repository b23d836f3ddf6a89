#include "rme/gridding.hpp"

#include <cmath>
#include <stdexcept>

namespace rme {

namespace {

constexpr double kPi = 3.14159265358979323846;

double linspace_at(double lo, double hi, int count, int index) {
    if (count <= 1) return lo; // degenerate linspace keeps the lower endpoint
    return lo + (hi - lo) * static_cast<double>(index) / static_cast<double>(count - 1);
}

} // namespace

double bg_transform(double x) {
    const double ax = std::abs(x);
    if (ax <= 0.5) return 2.0 * x;
    const double arg = ax - 0.5;
    if (std::abs(arg - kPi / 2.0) < 1e-12)
        throw std::domain_error("bg_transform: argument at tangent pole");
    const double v = 2.0 * std::tan(arg) + 1.0;
    return x < 0.0 ? -v : v;
}

double bg_transform_inverse(double y) {
    const double ay = std::abs(y);
    if (ay <= 1.0) return y / 2.0;
    const double v = std::atan((ay - 1.0) / 2.0) + 0.5;
    return y < 0.0 ? -v : v;
}

std::vector<Ray> grid_rays(int height, int width, float half_width, Warp warp, float t_near,
                           float t_far) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("grid_rays: dimensions must be positive");
    if (half_width <= 0.0f)
        throw std::invalid_argument("grid_rays: half_width must be positive");

    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(height) * width);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            double x, y;
            if (warp == Warp::Linear) {
                x = linspace_at(-half_width, half_width, width, col);
                y = linspace_at(-half_width, half_width, height, row);
            } else {
                x = bg_transform(linspace_at(-1.0, 1.0, width, col)) * half_width;
                y = bg_transform(linspace_at(-1.0, 1.0, height, row)) * half_width;
            }
            Ray r;
            r.origin = Vec3(static_cast<float>(x), static_cast<float>(y), 1.0f);
            r.direction = Vec3(0.0f, 0.0f, -1.0f);
            r.t_near = t_near;
            r.t_far = t_far;
            rays.push_back(r);
        }
    }
    return rays;
}

MapStack grid_manifolds(const LatentCode& latent, const SurfaceSet& surfaces,
                        const NetParams& params, int height, int width, bool with_features,
                        const GriddingConfig& config) {
    const int n = surfaces.count();
    const int channels = 4 + (with_features ? params.d_f : 0);
    MapStack stack(n, height, width, channels);
    const Vec3 sample_dir(0.0f, 0.0f, -1.0f);

    for (int s = 0; s < n; ++s) {
        const bool is_bg = (s == surfaces.background_index);
        SurfaceMapMeta meta;
        meta.is_background = is_bg;
        meta.warp = is_bg ? Warp::BgTrans : Warp::Linear;
        meta.half_width = is_bg ? config.bg_half_width : config.fg_half_width;
        stack.meta[s] = meta;

        const std::vector<Ray> rays =
            grid_rays(height, width, meta.half_width, meta.warp, config.t_near, config.t_far);

        std::vector<Vec3> hit_points;
        std::vector<int> hit_cell;
        hit_points.reserve(rays.size());
        hit_cell.reserve(rays.size());
        for (std::size_t j = 0; j < rays.size(); ++j) {
            Intersection isect;
            if (intersect_surface_front(rays[j], surfaces, s, &isect, config.mlp_samples)) {
                hit_points.push_back(isect.point);
                hit_cell.push_back(static_cast<int>(j));
            }
        }

        const std::vector<RadianceSample> samples =
            generate_radiance(latent, hit_points, sample_dir, params, with_features);

        for (std::size_t k = 0; k < samples.size(); ++k) {
            const int cell = hit_cell[k];
            const int y = cell / width;
            const int x = cell % width;
            const RadianceSample& r = samples[k];
            stack.at(s, 0, y, x) = r.color.x();
            stack.at(s, 1, y, x) = r.color.y();
            stack.at(s, 2, y, x) = r.color.z();
            stack.at(s, 3, y, x) = r.occupancy;
            if (with_features)
                for (int f = 0; f < params.d_f; ++f) stack.at(s, 4 + f, y, x) = r.feature[f];
        }
    }
    return stack;
}

MapStack radiance_only(const MapStack& maps) {
    if (maps.c < 4) throw std::invalid_argument("radiance_only: need at least 4 channels");
    if (maps.c == 4) return maps;
    MapStack out(maps.n, maps.h, maps.w, 4);
    out.meta = maps.meta;
    for (int s = 0; s < maps.n; ++s)
        for (int c = 0; c < 4; ++c)
            std::copy(maps.plane(s, c), maps.plane(s, c) + static_cast<std::size_t>(maps.h) * maps.w,
                      out.plane(s, c));
    return out;
}

} // namespace rme
