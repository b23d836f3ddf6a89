#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rme::ref {

void conv2d_naive(const nn::FeatureMap& in, const Tensor& weights, std::span<const float> bias,
                  nn::FeatureMap& out) {
    const int oc = static_cast<int>(weights.dims[0]);
    const int ic = static_cast<int>(weights.dims[1]);
    const int k = static_cast<int>(weights.dims[2]);
    const int r = k / 2;
    out = nn::FeatureMap(oc, in.h, in.w);
    for (int o = 0; o < oc; ++o) {
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                double acc = bias[o];
                for (int i = 0; i < ic; ++i) {
                    for (int ky = 0; ky < k; ++ky) {
                        for (int kx = 0; kx < k; ++kx) {
                            const int yy = y + ky - r;
                            const int xx = x + kx - r;
                            if (yy < 0 || yy >= in.h || xx < 0 || xx >= in.w) continue;
                            acc += static_cast<double>(
                                       weights.data[((static_cast<std::size_t>(o) * ic + i) * k +
                                                     ky) *
                                                        k +
                                                    kx]) *
                                   in.plane(i)[static_cast<std::size_t>(yy) * in.w + xx];
                        }
                    }
                }
                out.plane(o)[static_cast<std::size_t>(y) * in.w + x] = static_cast<float>(acc);
            }
        }
    }
}

Eigen::Vector3d composite_direct(std::span<const ShadeSample> samples) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double t = 1.0;
        for (std::size_t j = 0; j < i; ++j) t *= 1.0 - static_cast<double>(samples[j].alpha);
        c += t * static_cast<double>(samples[i].alpha) * samples[i].color.cast<double>();
    }
    return c;
}

CompositeGradients composite_fd(std::span<const ShadeSample> samples, double h) {
    CompositeGradients g;
    const std::size_t n = samples.size();
    g.d_color.resize(n);
    g.d_alpha.resize(n);
    std::vector<ShadeSample> work(samples.begin(), samples.end());

    for (std::size_t i = 0; i < n; ++i) {
        // color: all channels share the same scalar weight
        const float saved = work[i].color.x();
        work[i].color.x() = saved + static_cast<float>(h);
        const double up = composite_direct(work).x();
        work[i].color.x() = saved - static_cast<float>(h);
        const double dn = composite_direct(work).x();
        work[i].color.x() = saved;
        g.d_color[i] = (up - dn) / (2.0 * h);

        const float a = work[i].alpha;
        work[i].alpha = a + static_cast<float>(h);
        const Eigen::Vector3d cu = composite_direct(work);
        work[i].alpha = a - static_cast<float>(h);
        const Eigen::Vector3d cd = composite_direct(work);
        work[i].alpha = a;
        g.d_alpha[i] = (cu - cd) / (2.0 * h);
    }
    return g;
}

nn::FeatureMap pixel_shuffle_naive(const nn::FeatureMap& in, int r) {
    const int oc = in.c / (r * r);
    nn::FeatureMap out(oc, in.h * r, in.w * r);
    for (int c = 0; c < in.c; ++c) {
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                const int base = c / (r * r);
                const int dy = (c % (r * r)) / r;
                const int dx = c % r;
                out.plane(base)[static_cast<std::size_t>(r * y + dy) * out.w + (r * x + dx)] =
                    in.plane(c)[static_cast<std::size_t>(y) * in.w + x];
            }
        }
    }
    return out;
}

namespace {

bool bilinear4(const MapStack& maps, int surface, double u, double v, float* out) {
    if (!(u >= 0.0 && u <= maps.w - 1 && v >= 0.0 && v <= maps.h - 1)) return false;
    const int x0 = static_cast<int>(u), y0 = static_cast<int>(v);
    const int x1 = std::min(x0 + 1, maps.w - 1), y1 = std::min(y0 + 1, maps.h - 1);
    const double fx = u - x0, fy = v - y0;
    for (int c = 0; c < 4; ++c) {
        const float* p = maps.plane(surface, c);
        out[c] = static_cast<float>((1 - fx) * (1 - fy) * p[y0 * maps.w + x0] +
                                    fx * (1 - fy) * p[y0 * maps.w + x1] +
                                    (1 - fx) * fy * p[y1 * maps.w + x0] +
                                    fx * fy * p[y1 * maps.w + x1]);
    }
    return true;
}

} // namespace

Image render_image_serial(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                          const RenderConfig& config) {
    Image img(camera.height, camera.width);
    float ch[4];
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const Ray ray = camera.pixel_ray(y, x, config.t_near, config.t_far);
            const auto hits = intersect_ray(ray, surfaces, config.mlp_samples);
            double c[3] = {0, 0, 0};
            double t = 1.0;
            for (const Intersection& isect : hits) {
                double u, v;
                if (!project_to_map(isect.point, maps.meta[isect.surface_index], maps.h, maps.w,
                                    &u, &v))
                    continue;
                if (!bilinear4(maps, isect.surface_index, u, v, ch)) continue;
                const double a = std::clamp<double>(ch[3], 0.0, 1.0);
                for (int k = 0; k < 3; ++k) c[k] += t * a * ch[k];
                t *= 1.0 - a;
            }
            float* px = img.pixel(y, x);
            for (int k = 0; k < 3; ++k)
                px[k] = static_cast<float>(std::clamp(c[k], 0.0, 1.0));
        }
    }
    return img;
}

namespace {

// Moller-Trumbore
bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c,
                  double* t, double* bu, double* bv) {
    const Eigen::Vector3d e1 = (b - a).cast<double>();
    const Eigen::Vector3d e2 = (c - a).cast<double>();
    const Eigen::Vector3d dir = d.cast<double>();
    const Eigen::Vector3d p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-14) return false;
    const double inv = 1.0 / det;
    const Eigen::Vector3d s = (o - a).cast<double>();
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) return false;
    const Eigen::Vector3d q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    const double tt = e2.dot(q) * inv;
    if (tt <= 0.0) return false;
    *t = tt;
    *bu = u;
    *bv = v;
    return true;
}

} // namespace

Image raycast_mesh(std::span<const Mesh> meshes, const MapStack& maps, const Camera& camera) {
    Image img(camera.height, camera.width);
    float ch[4];
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const Ray ray = camera.pixel_ray(y, x, 1e-4f, 1e9f);
            struct Hit {
                double t;
                int mesh;
                float u, v;
            };
            std::vector<Hit> hits;
            for (std::size_t m = 0; m < meshes.size(); ++m) {
                double best_t = std::numeric_limits<double>::infinity();
                float best_u = 0, best_v = 0;
                for (const auto& tri : meshes[m].triangles) {
                    double t, bu, bv;
                    if (!ray_triangle(ray.origin, ray.direction, meshes[m].vertices[tri[0]],
                                      meshes[m].vertices[tri[1]], meshes[m].vertices[tri[2]], &t,
                                      &bu, &bv))
                        continue;
                    if (t < best_t) {
                        best_t = t;
                        const Eigen::Vector2f uv = (1.0 - bu - bv) * meshes[m].uv[tri[0]] +
                                                   bu * meshes[m].uv[tri[1]] +
                                                   bv * meshes[m].uv[tri[2]];
                        best_u = uv.x();
                        best_v = uv.y();
                    }
                }
                if (std::isfinite(best_t))
                    hits.push_back({best_t, static_cast<int>(m), best_u, best_v});
            }
            std::sort(hits.begin(), hits.end(),
                      [](const Hit& a, const Hit& b) { return a.t < b.t; });
            double c[3] = {0, 0, 0};
            double t = 1.0;
            for (const Hit& hit : hits) {
                if (!bilinear4(maps, meshes[hit.mesh].surface_index, hit.u, hit.v, ch)) continue;
                const double a = std::clamp<double>(ch[3], 0.0, 1.0);
                for (int k = 0; k < 3; ++k) c[k] += t * a * ch[k];
                t *= 1.0 - a;
            }
            float* px = img.pixel(y, x);
            for (int k = 0; k < 3; ++k)
                px[k] = static_cast<float>(std::clamp(c[k], 0.0, 1.0));
        }
    }
    return img;
}

} // namespace rme::ref
