#pragma once

#include <Eigen/Core>

#include "rme/geometry.hpp"

namespace rme {

// Orbit camera: pose angles place the eye on a sphere of orbit_radius around
// look_at, always facing it; roll spins about the optical axis. Pinhole
// projection with vertical field of view, rays through pixel centers.
struct Camera {
    float yaw = 0.0f;   // radians, about world +y
    float pitch = 0.0f; // radians, elevation
    float roll = 0.0f;  // radians, about the forward axis
    float orbit_radius = 2.7f;
    Vec3 look_at{0.0f, 0.0f, -1.5f};
    float fov_deg = 12.0f;
    int height = 256;
    int width = 256;

    void validate() const;

    Vec3 position() const;

    struct Basis {
        Vec3 right, up, forward;
    };
    Basis basis() const;

    // Ray through the center of pixel (row, col).
    Ray pixel_ray(int row, int col, float t_near = 0.1f, float t_far = 6.0f) const;

    // Continuous pixel coordinates and projected depth (distance along the
    // forward axis). Returns false behind the camera.
    bool project(const Vec3& p, double* col, double* row, double* depth) const;
};

} // namespace rme
