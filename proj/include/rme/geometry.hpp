#pragma once

#include <Eigen/Core>
#include <vector>

#include "rme/tensor.hpp"

namespace rme {

using Vec3 = Eigen::Vector3f;

enum class FieldMode { AnalyticSpherePlane, MlpField };

// The scalar field whose iso-surfaces carry radiance. Analytic mode is the
// Euclidean distance to `center`; MLP mode evaluates a small dense network
// whose weights live in a NetParams store under `param_prefix`.
struct ScalarField {
    FieldMode mode = FieldMode::AnalyticSpherePlane;
    Vec3 center{0.0f, 0.0f, -1.5f};
    float plane_z = -1.0f;
    std::vector<int> mlp_hidden{64, 64, 64};
    const NetParams* params = nullptr;
    std::string param_prefix = "manifold.mlp";
};

// N iso-surfaces of one field. Levels are strictly increasing. In analytic
// mode the last surface is the plane z = plane_z instead of a level set.
struct SurfaceSet {
    ScalarField field;
    std::vector<float> levels;
    int background_index = 0;

    int count() const { return static_cast<int>(levels.size()); }
};

struct Ray {
    Vec3 origin{0.0f, 0.0f, 1.0f};
    Vec3 direction{0.0f, 0.0f, -1.0f}; // unit norm
    float t_near = 0.1f;
    float t_far = 6.0f;
};

struct Intersection {
    Vec3 point{0.0f, 0.0f, 0.0f};
    int surface_index = 0;
    float t = 0.0f;
};

float eval_scalar_field(const Vec3& point, const ScalarField& field);

// All ray/surface intersections inside [t_near, t_far], sorted by ascending t.
// Analytic mode is closed form; MLP mode takes `mlp_samples` uniform samples
// along the ray and refines sign changes of (field - level) with secant steps.
std::vector<Intersection> intersect_ray(const Ray& ray, const SurfaceSet& surfaces,
                                        int mlp_samples = 64);

// Front-most hit against a single surface; returns false on a miss.
bool intersect_surface_front(const Ray& ray, const SurfaceSet& surfaces, int surface_index,
                             Intersection* out, int mlp_samples = 64);

// n_surfaces-1 spheres centered at (0,0,-1.5) with radii evenly spaced over
// [r_min, r_max], plus the background plane at plane_z.
SurfaceSet init_default_surfaces(int n_surfaces, float r_min = 0.5f, float r_max = 2.6f,
                                 float plane_z = -1.0f);

} // namespace rme
