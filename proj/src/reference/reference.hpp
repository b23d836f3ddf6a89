#pragma once

// Serial reference implementations. These stay deliberately naive and
// independent of the engine's kernels; tests use them as oracles and the
// bench subcommand compares against them. Never linked into librme.

#include "rme/mesh.hpp"
#include "rme/nn_ops.hpp"
#include "rme/render.hpp"

namespace rme::ref {

// Four explicit loops over (ky, kx, ic, oc), zero padding, double accumulator.
void conv2d_naive(const nn::FeatureMap& in, const Tensor& weights, std::span<const float> bias,
                  nn::FeatureMap& out);

// C = sum_i alpha_i c_i prod_{j<i}(1 - alpha_j) with the product recomputed
// from scratch for every term.
Eigen::Vector3d composite_direct(std::span<const ShadeSample> samples);

// Central finite differences of the compositing output.
CompositeGradients composite_fd(std::span<const ShadeSample> samples, double h);

// Index-mapped depth-to-space with bounds-checked scalar copies.
nn::FeatureMap pixel_shuffle_naive(const nn::FeatureMap& in, int r);

// Single-threaded renderer with its own inlined bilinear lookup and
// front-to-back loop.
Image render_image_serial(const Camera& camera, const SurfaceSet& surfaces, const MapStack& maps,
                          const RenderConfig& config = {});

// Per-pixel ray casting against every triangle (nearest hit per mesh, then
// depth-ordered compositing); the rasterizer oracle.
Image raycast_mesh(std::span<const Mesh> meshes, const MapStack& maps, const Camera& camera);

} // namespace rme::ref
