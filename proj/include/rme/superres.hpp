#pragma once

#include <string>
#include <vector>

#include "rme/gridding.hpp"
#include "rme/nn_ops.hpp"
#include "rme/radiance.hpp"

namespace rme {

// One scaling vector per modulated convolution of a super-resolution net, in
// pipeline order: up.0 .. up.{S-1}, tail.conv, tail.proj.
struct StyleVector {
    std::vector<std::vector<float>> layers;
};

inline constexpr int kRrdbBlocks = 8;
inline constexpr int kFgWidth = 64;
inline constexpr int kFgGrowth = 32;
inline constexpr int kBgWidth = 32; // background net runs at half the channels
inline constexpr int kBgGrowth = 16;
inline constexpr float kResidualScale = 0.2f;
inline constexpr float kLeakySlope = 0.2f;

// Output channel schedule of the x2 sub-pixel stages; factors 4/8 drop
// stages from the tail.
std::vector<int> upsample_schedule(const std::string& net_prefix, int factor);

// Shared 3x256 mapping trunk, then one affine head per modulated conv layer
// of the net selected by `net_prefix` ("sr_fg" or "sr_bg").
StyleVector map_style(const LatentCode& latent, const NetParams& params,
                      const std::string& net_prefix);

// Residual-in-residual dense block: three dense sub-blocks of five
// 3x3 convolutions each, residual-scaled, plus a scaled outer residual.
// Shape preserving; channel count must equal the block width.
nn::FeatureMap rrdb_forward(const nn::FeatureMap& input, const NetParams& params,
                            const std::string& block_prefix, int width, int growth);

// Full super-resolution forward pass: the first N-1 maps go through the
// shared foreground net, the last through the half-width background net.
// Input must carry features (4+d_f channels); output is radiance-only.
MapStack superresolve(const LatentCode& latent, const MapStack& lr, const NetParams& params,
                      int factor);

} // namespace rme
