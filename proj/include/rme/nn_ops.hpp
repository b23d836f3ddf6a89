#pragma once

#include <span>
#include <vector>

#include "rme/tensor.hpp"

namespace rme::nn {

// One planar feature map, channel-major: data[c*h*w + y*w + x].
struct FeatureMap {
    int c = 0, h = 0, w = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int c_, int h_, int w_) : c(c_), h(h_), w(w_) {
        data.assign(static_cast<std::size_t>(c) * h * w, 0.0f);
    }

    float* plane(int ch) { return data.data() + static_cast<std::size_t>(ch) * h * w; }
    const float* plane(int ch) const { return data.data() + static_cast<std::size_t>(ch) * h * w; }
};

struct ConvLayerParams {
    Tensor weights;          // [out_ch, in_ch, k, k], k odd
    std::vector<float> bias; // out_ch
    bool modulated = false;
};

// y = W x + b, W row-major [out, in].
void affine(const Tensor& w, const Tensor& b, std::span<const float> x, std::vector<float>& y);

// Per-input-channel scale then per-output-channel normalization:
// w'[o][i][k] = style[i] * w[o][i][k]
// w''[o][i][k] = w'[o][i][k] / sqrt(sum_{i,k} w'[o][i][k]^2 + eps)
inline constexpr double kModulationEps = 1e-8;
Tensor modulate_weights(const ConvLayerParams& layer, std::span<const float> style);

// Zero-padded stride-1 convolution; `out` holds out_ch*h*w floats and is
// overwritten. Parallel over output rows, bit-stable for any thread count.
void conv2d(const FeatureMap& in, const Tensor& weights, std::span<const float> bias,
            FeatureMap& out);

void leaky_relu_inplace(FeatureMap& m, float slope);

// Depth-to-space: out(c, r*y+dy, r*x+dx) = in(c*r*r + dy*r + dx, y, x).
FeatureMap pixel_shuffle(const FeatureMap& in, int r);

inline float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

} // namespace rme::nn
