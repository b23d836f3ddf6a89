#include "rme/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace rme {

void Camera::validate() const {
    if (!(fov_deg > 0.0f && fov_deg < 120.0f))
        throw std::invalid_argument("camera: fov must lie in (0, 120) degrees");
    if (height < 1 || width < 1)
        throw std::invalid_argument("camera: resolution must be positive");
}

Vec3 Camera::position() const {
    const float cy = std::cos(yaw), sy = std::sin(yaw);
    const float cp = std::cos(pitch), sp = std::sin(pitch);
    return look_at + orbit_radius * Vec3(sy * cp, sp, cy * cp);
}

Camera::Basis Camera::basis() const {
    const Vec3 eye = position();
    Vec3 forward = (look_at - eye).normalized();
    const Vec3 world_up(0.0f, 1.0f, 0.0f);
    Vec3 right = forward.cross(world_up).normalized();
    Vec3 up = right.cross(forward);
    if (roll != 0.0f) {
        const float cr = std::cos(roll), sr = std::sin(roll);
        const Vec3 r2 = cr * right + sr * up;
        const Vec3 u2 = -sr * right + cr * up;
        right = r2;
        up = u2;
    }
    return {right, up, forward};
}

Ray Camera::pixel_ray(int row, int col, float t_near, float t_far) const {
    validate();
    const Basis b = basis();
    const float tan_half = std::tan(0.5f * fov_deg * 3.14159265358979323846f / 180.0f);
    const float aspect = static_cast<float>(width) / static_cast<float>(height);
    const float xn = (2.0f * (static_cast<float>(col) + 0.5f) / static_cast<float>(width) - 1.0f) *
                     tan_half * aspect;
    const float yn =
        (1.0f - 2.0f * (static_cast<float>(row) + 0.5f) / static_cast<float>(height)) * tan_half;
    Ray r;
    r.origin = position();
    r.direction = (b.forward + xn * b.right + yn * b.up).normalized();
    r.t_near = t_near;
    r.t_far = t_far;
    return r;
}

bool Camera::project(const Vec3& p, double* col, double* row, double* depth) const {
    const Basis b = basis();
    const Vec3 v = p - position();
    const double z = v.dot(b.forward);
    if (z <= 1e-9) return false;
    const double x = v.dot(b.right);
    const double y = v.dot(b.up);
    const double tan_half = std::tan(0.5 * static_cast<double>(fov_deg) * 3.14159265358979323846 / 180.0);
    const double aspect = static_cast<double>(width) / static_cast<double>(height);
    const double xn = x / (z * tan_half * aspect);
    const double yn = y / (z * tan_half);
    *col = (xn + 1.0) * 0.5 * width - 0.5;
    *row = (1.0 - yn) * 0.5 * height - 0.5;
    *depth = z;
    return true;
}

} // namespace rme
