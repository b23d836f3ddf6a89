#include "rme/render.hpp"

#include <cmath>
#include <stdexcept>

namespace rme {

CompositeResult composite(std::span<const ShadeSample> samples) {
    CompositeResult r;
    r.weights.resize(samples.size());
    r.transmittance.resize(samples.size());
    double t = 1.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double a = samples[i].alpha;
        const double w = t * a;
        r.transmittance[i] = t;
        r.weights[i] = w;
        r.color.x() += w * samples[i].color.x();
        r.color.y() += w * samples[i].color.y();
        r.color.z() += w * samples[i].color.z();
        t *= (1.0 - a);
    }
    return r;
}

CompositeGradients composite_gradients(std::span<const ShadeSample> samples) {
    const std::size_t n = samples.size();
    CompositeResult fwd = composite(samples);
    CompositeGradients g;
    g.d_color = fwd.weights;
    g.d_alpha.assign(n, Eigen::Vector3d::Zero());

    // Suffix sums of T_k a_k c_k let dC/da_i close in one backward pass; near
    // a_i = 1 the (1-a_i) division degenerates and products are recomputed.
    Eigen::Vector3d suffix = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> tail(n + 1, Eigen::Vector3d::Zero());
    for (std::size_t i = n; i-- > 0;) {
        const Eigen::Vector3d c = samples[i].color.cast<double>();
        suffix += fwd.weights[i] * c;
        tail[i] = tail[i + 1] + fwd.weights[i] * c;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double a = samples[i].alpha;
        const Eigen::Vector3d c = samples[i].color.cast<double>();
        Eigen::Vector3d grad = fwd.transmittance[i] * c;
        if (std::abs(1.0 - a) > 1e-6) {
            grad -= tail[i + 1] / (1.0 - a);
        } else {
            // T_k with the (1 - a_i) factor struck out, k > i.
            double t = fwd.transmittance[i];
            for (std::size_t k = i + 1; k < n; ++k) {
                grad -= t * static_cast<double>(samples[k].alpha) *
                        samples[k].color.cast<double>();
                t *= (1.0 - samples[k].alpha);
            }
        }
        g.d_alpha[i] = grad;
    }
    return g;
}

bool sample_map_bilinear(const MapStack& maps, int surface, double u, double v, float* out) {
    if (!(u >= 0.0 && u <= maps.w - 1 && v >= 0.0 && v <= maps.h - 1)) return false;
    const int x0 = static_cast<int>(u);
    const int y0 = static_cast<int>(v);
    const int x1 = std::min(x0 + 1, maps.w - 1);
    const int y1 = std::min(y0 + 1, maps.h - 1);
    const double fx = u - x0;
    const double fy = v - y0;
    const double w00 = (1.0 - fx) * (1.0 - fy);
    const double w10 = fx * (1.0 - fy);
    const double w01 = (1.0 - fx) * fy;
    const double w11 = fx * fy;
    for (int c = 0; c < maps.c; ++c) {
        const float* p = maps.plane(surface, c);
        const double v00 = p[static_cast<std::size_t>(y0) * maps.w + x0];
        const double v10 = p[static_cast<std::size_t>(y0) * maps.w + x1];
        const double v01 = p[static_cast<std::size_t>(y1) * maps.w + x0];
        const double v11 = p[static_cast<std::size_t>(y1) * maps.w + x1];
        out[c] = static_cast<float>(w00 * v00 + w10 * v10 + w01 * v01 + w11 * v11);
    }
    return true;
}

bool project_to_map(const Vec3& point, const SurfaceMapMeta& meta, int h, int w, double* u,
                    double* v) {
    double xn = point.x() / meta.half_width;
    double yn = point.y() / meta.half_width;
    if (meta.warp == Warp::BgTrans) {
        xn = bg_transform_inverse(xn);
        yn = bg_transform_inverse(yn);
        if (std::abs(xn) > 1.0 || std::abs(yn) > 1.0) return false;
    }
    *u = (xn + 1.0) * 0.5 * (w - 1);
    *v = (yn + 1.0) * 0.5 * (h - 1);
    return true;
}

namespace {

template <typename PixelFn>
void render_loop(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                 const RenderConfig& config, PixelFn&& fn) {
    camera.validate();
    if (maps.n != surfaces.count())
        throw std::invalid_argument("render: map stack does not match surface set");

#pragma omp parallel
    {
        std::vector<ShadeSample> shades;
        std::vector<float> channels(maps.c);
        std::vector<double> depths;
#pragma omp for schedule(static) collapse(2)
        for (int y = 0; y < camera.height; ++y) {
            for (int x = 0; x < camera.width; ++x) {
                const Ray ray = camera.pixel_ray(y, x, config.t_near, config.t_far);
                const std::vector<Intersection> hits =
                    intersect_ray(ray, surfaces, config.mlp_samples);
                shades.clear();
                depths.clear();
                for (const Intersection& isect : hits) {
                    double u, v;
                    if (!project_to_map(isect.point, maps.meta[isect.surface_index], maps.h,
                                        maps.w, &u, &v))
                        continue;
                    if (!sample_map_bilinear(maps, isect.surface_index, u, v, channels.data()))
                        continue;
                    ShadeSample s;
                    s.color = Vec3(channels[0], channels[1], channels[2]);
                    s.alpha = std::clamp(channels[3], 0.0f, 1.0f);
                    shades.push_back(s);
                    depths.push_back(isect.t); // pinhole rays: t is metric distance
                }
                fn(y, x, ray, shades, depths);
            }
        }
    }
}

} // namespace

Image render_image(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                   const RenderConfig& config) {
    if (maps.c != 4) throw std::invalid_argument("render_image: maps must be radiance-only");
    Image img(camera.height, camera.width);
    const Camera::Basis basis = camera.basis();
    (void)basis;
    render_loop(camera, surfaces, maps, config,
                [&](int y, int x, const Ray&, const std::vector<ShadeSample>& shades,
                    const std::vector<double>&) {
                    const CompositeResult r = composite(shades);
                    float* px = img.pixel(y, x);
                    px[0] = static_cast<float>(std::clamp(r.color.x(), 0.0, 1.0));
                    px[1] = static_cast<float>(std::clamp(r.color.y(), 0.0, 1.0));
                    px[2] = static_cast<float>(std::clamp(r.color.z(), 0.0, 1.0));
                });
    return img;
}

DepthMap render_depth(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                      const RenderConfig& config) {
    if (maps.c != 4) throw std::invalid_argument("render_depth: maps must be radiance-only");
    DepthMap depth(camera.height, camera.width);
    const Camera::Basis basis = camera.basis();
    const Vec3 eye = camera.position();
    render_loop(camera, surfaces, maps, config,
                [&](int y, int x, const Ray& ray, const std::vector<ShadeSample>& shades,
                    const std::vector<double>& ts) {
                    const CompositeResult r = composite(shades);
                    double d = 0.0;
                    const double cos_axis =
                        static_cast<double>(ray.direction.dot(basis.forward));
                    for (std::size_t i = 0; i < shades.size(); ++i) {
                        // projected depth: distance along the forward axis
                        const Vec3 p = eye + static_cast<float>(ts[i]) * ray.direction;
                        (void)p;
                        d += r.weights[i] * (ts[i] * cos_axis);
                    }
                    depth.at(y, x) = static_cast<float>(d);
                });
    return depth;
}

Image build_epi(std::span<const Image> frames, int row, int col_begin, int col_end) {
    if (frames.size() < 2) throw std::invalid_argument("build_epi: need at least 2 frames");
    const int w = frames[0].w;
    const int h = frames[0].h;
    for (const Image& f : frames)
        if (f.w != w || f.h != h)
            throw std::invalid_argument("build_epi: frames must share dimensions");
    if (row < 0 || row >= h || col_begin < 0 || col_end > w || col_begin >= col_end)
        throw std::out_of_range("build_epi: row/column selection out of bounds");

    Image epi(static_cast<int>(frames.size()), col_end - col_begin);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        for (int x = col_begin; x < col_end; ++x) {
            const float* src = frames[k].pixel(row, x);
            float* dst = epi.pixel(static_cast<int>(k), x - col_begin);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return epi;
}

} // namespace rme
