#include "rme/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "rme/nn_ops.hpp"

namespace rme {

namespace {

float eval_mlp_field(const Vec3& point, const ScalarField& field) {
    if (field.params == nullptr)
        throw MissingWeightError(field.param_prefix + " (no parameter store attached)");
    const NetParams& p = *field.params;

    std::vector<float> h{point.x(), point.y(), point.z()};
    std::vector<float> next;
    for (std::size_t layer = 0; layer < field.mlp_hidden.size(); ++layer) {
        const std::string base = field.param_prefix + "." + std::to_string(layer);
        const Tensor& w = p.at(base + ".weight");
        const Tensor& b = p.at(base + ".bias");
        nn::affine(w, b, h, next);
        for (float& v : next) v = std::tanh(v);
        h.swap(next);
    }
    const std::string base = field.param_prefix + ".out";
    const Tensor& w = p.at(base + ".weight");
    const Tensor& b = p.at(base + ".bias");
    nn::affine(w, b, h, next);
    return next[0];
}

// Quadratic sphere test. Tangent rays (tiny discriminant) count as one hit.
void sphere_hits(const Ray& ray, const Vec3& center, float radius, int surface_index,
                 std::vector<Intersection>& out) {
    const Vec3 oc = ray.origin - center;
    const double b = 2.0 * static_cast<double>(oc.dot(ray.direction));
    const double c = static_cast<double>(oc.squaredNorm()) - static_cast<double>(radius) * radius;
    const double disc = b * b - 4.0 * c;
    if (disc < -1e-10) return;
    auto push = [&](double t) {
        if (t < ray.t_near || t > ray.t_far) return;
        Intersection isect;
        isect.t = static_cast<float>(t);
        isect.point = ray.origin + isect.t * ray.direction;
        isect.surface_index = surface_index;
        out.push_back(isect);
    };
    if (std::abs(disc) < 1e-10) {
        push(-b / 2.0);
        return;
    }
    const double s = std::sqrt(disc);
    push((-b - s) / 2.0);
    push((-b + s) / 2.0);
}

void plane_hits(const Ray& ray, float plane_z, int surface_index,
                std::vector<Intersection>& out) {
    const float dz = ray.direction.z();
    if (std::abs(dz) < 1e-12f) return;
    const float t = (plane_z - ray.origin.z()) / dz;
    if (t < ray.t_near || t > ray.t_far) return;
    Intersection isect;
    isect.t = t;
    isect.point = ray.origin + t * ray.direction;
    isect.point.z() = plane_z;
    isect.surface_index = surface_index;
    out.push_back(isect);
}

constexpr int kSecantMaxIter = 20;
constexpr float kSecantTol = 1e-5f;

// Refine a bracketed crossing of (field - level) along the ray.
void mlp_hits(const Ray& ray, const SurfaceSet& surfaces, int surface_index, int samples,
              std::span<const float> field_values, std::span<const float> ts,
              std::vector<Intersection>& out) {
    const float level = surfaces.levels[surface_index];
    for (int k = 0; k + 1 <= samples; ++k) {
        const float f0 = field_values[k] - level;
        const float f1 = field_values[k + 1] - level;
        if (f0 == 0.0f) {
            if (k == 0) {
                Intersection isect{ray.origin + ts[k] * ray.direction, surface_index, ts[k]};
                out.push_back(isect);
            }
            continue;
        }
        if (f1 == 0.0f) {
            Intersection isect{ray.origin + ts[k + 1] * ray.direction, surface_index, ts[k + 1]};
            out.push_back(isect);
            continue;
        }
        if ((f0 > 0.0f) == (f1 > 0.0f)) continue;

        float ta = ts[k], tb = ts[k + 1];
        float fa = f0, fb = f1;
        float t = tb, ft = fb;
        for (int iter = 0; iter < kSecantMaxIter; ++iter) {
            t = tb - fb * (tb - ta) / (fb - fa);
            if (!(t >= std::min(ta, tb) && t <= std::max(ta, tb)))
                t = 0.5f * (ta + tb); // secant left the bracket; bisect
            const Vec3 x = ray.origin + t * ray.direction;
            ft = eval_scalar_field(x, surfaces.field) - level;
            if (std::abs(ft) < kSecantTol) break;
            if ((ft > 0.0f) == (fa > 0.0f)) {
                ta = t;
                fa = ft;
            } else {
                tb = t;
                fb = ft;
            }
        }
        Intersection isect{ray.origin + t * ray.direction, surface_index, t};
        out.push_back(isect);
    }
}

} // namespace

float eval_scalar_field(const Vec3& point, const ScalarField& field) {
    if (field.mode == FieldMode::AnalyticSpherePlane)
        return (point - field.center).norm();
    return eval_mlp_field(point, field);
}

std::vector<Intersection> intersect_ray(const Ray& ray, const SurfaceSet& surfaces,
                                        int mlp_samples) {
    std::vector<Intersection> hits;
    const int n = surfaces.count();
    if (surfaces.field.mode == FieldMode::AnalyticSpherePlane) {
        for (int i = 0; i < n; ++i) {
            if (i == surfaces.background_index)
                plane_hits(ray, surfaces.field.plane_z, i, hits);
            else
                sphere_hits(ray, surfaces.field.center, surfaces.levels[i], i, hits);
        }
    } else {
        std::vector<float> ts(mlp_samples + 1), values(mlp_samples + 1);
        for (int k = 0; k <= mlp_samples; ++k) {
            ts[k] = ray.t_near + (ray.t_far - ray.t_near) * static_cast<float>(k) /
                                     static_cast<float>(mlp_samples);
            values[k] = eval_scalar_field(ray.origin + ts[k] * ray.direction, surfaces.field);
        }
        for (int i = 0; i < n; ++i) mlp_hits(ray, surfaces, i, mlp_samples, values, ts, hits);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Intersection& a, const Intersection& b) { return a.t < b.t; });
    return hits;
}

bool intersect_surface_front(const Ray& ray, const SurfaceSet& surfaces, int surface_index,
                             Intersection* out, int mlp_samples) {
    std::vector<Intersection> hits;
    if (surfaces.field.mode == FieldMode::AnalyticSpherePlane) {
        if (surface_index == surfaces.background_index)
            plane_hits(ray, surfaces.field.plane_z, surface_index, hits);
        else
            sphere_hits(ray, surfaces.field.center, surfaces.levels[surface_index], surface_index,
                        hits);
    } else {
        std::vector<float> ts(mlp_samples + 1), values(mlp_samples + 1);
        for (int k = 0; k <= mlp_samples; ++k) {
            ts[k] = ray.t_near + (ray.t_far - ray.t_near) * static_cast<float>(k) /
                                     static_cast<float>(mlp_samples);
            values[k] = eval_scalar_field(ray.origin + ts[k] * ray.direction, surfaces.field);
        }
        mlp_hits(ray, surfaces, surface_index, mlp_samples, values, ts, hits);
    }
    if (hits.empty()) return false;
    *out = *std::min_element(hits.begin(), hits.end(),
                             [](const Intersection& a, const Intersection& b) { return a.t < b.t; });
    return true;
}

SurfaceSet init_default_surfaces(int n_surfaces, float r_min, float r_max, float plane_z) {
    if (n_surfaces < 2)
        throw std::invalid_argument("init_default_surfaces: need at least 2 surfaces");
    SurfaceSet set;
    set.field.mode = FieldMode::AnalyticSpherePlane;
    set.field.plane_z = plane_z;
    const int spheres = n_surfaces - 1;
    set.levels.resize(n_surfaces);
    float step = 0.0f;
    for (int i = 0; i < spheres; ++i) {
        set.levels[i] = (spheres == 1)
                            ? r_min
                            : r_min + (r_max - r_min) * static_cast<float>(i) /
                                          static_cast<float>(spheres - 1);
    }
    step = (spheres > 1) ? set.levels[1] - set.levels[0] : 1.0f;
    // The plane is not a level set; its slot just keeps the list increasing.
    set.levels[n_surfaces - 1] = set.levels[spheres - 1] + step;
    set.background_index = n_surfaces - 1;
    return set;
}

} // namespace rme
