#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "rme/gridding.hpp"
#include "rme/image.hpp"

namespace rme {

// Discriminator outputs consumed by the adversarial losses; no discriminator
// lives in this engine, scores arrive from outside.
struct ScorePack {
    std::vector<double> fake_scores;
    std::vector<double> real_scores;
    std::vector<double> real_grad_sqnorms; // |grad D(I)|^2 per real sample
    double lambda = 10.0;                  // R1 weight
};

struct PosePack {
    // (predicted, target) angle triples, radians.
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> generated;
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> real;
};

// max(x,0) + log1p(exp(-|x|)); stable for large |x|.
double softplus(double x);

// mean f(fake) + mean(f(-real) + lambda * |grad|^2)
double adversarial_loss(const ScorePack& scores);

// mean squared angle-triple distance, generated branch plus real branch
double pose_loss(const PosePack& poses);

// mean f(fake) + mean f(-real), no R1 term
double patch_adversarial_loss(std::span<const double> fake_patch_scores,
                              std::span<const double> real_patch_scores);

// Catmull-Rom (a = -0.5) downsampling, kernel scaled by the factor, weights
// normalized, area-aligned sampling, reflected borders.
Image bicubic_downsample(const Image& image, int factor);
MapStack bicubic_downsample(const MapStack& maps, int factor);
void bicubic_downsample_plane(const float* in, int h, int w, int factor, float* out);

// |Gamma(hr_image) - lr_image|^2 + |Gamma(hr_maps) - lr_maps|^2 (mean-squared,
// radiance channels only; term weights configurable).
double consistency_loss(const Image& hr_image, const Image& lr_image, const MapStack& hr_maps,
                        const MapStack& lr_maps, int factor, double image_weight = 1.0,
                        double map_weight = 1.0);

// Peak 1.0; identical inputs cap at 99 dB.
double psnr(const Image& a, const Image& b);

// 11x11 Gaussian window, sigma 1.5, standard constants, valid-region mean.
double ssim(const Image& a, const Image& b);

} // namespace rme
