#include "rme/nn_ops.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace rme::nn {

void affine(const Tensor& w, const Tensor& b, std::span<const float> x, std::vector<float>& y) {
    if (w.dims.size() != 2)
        throw ModelFormatError("affine: weight must be rank 2");
    const int out_dim = static_cast<int>(w.dims[0]);
    const int in_dim = static_cast<int>(w.dims[1]);
    if (static_cast<int>(x.size()) != in_dim)
        throw ModelFormatError("affine: input size mismatch");
    if (static_cast<int>(b.size()) != out_dim)
        throw ModelFormatError("affine: bias size mismatch");
    y.assign(out_dim, 0.0f);
    const float* wp = w.data.data();
    for (int o = 0; o < out_dim; ++o) {
        const float* row = wp + static_cast<std::size_t>(o) * in_dim;
        float acc = b.data[o];
#pragma omp simd reduction(+ : acc)
        for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
}

Tensor modulate_weights(const ConvLayerParams& layer, std::span<const float> style) {
    const Tensor& w = layer.weights;
    if (w.dims.size() != 4)
        throw std::invalid_argument("modulate_weights: weight must be rank 4");
    const int oc = static_cast<int>(w.dims[0]);
    const int ic = static_cast<int>(w.dims[1]);
    const int k2 = static_cast<int>(w.dims[2] * w.dims[3]);
    if (static_cast<int>(style.size()) != ic)
        throw std::invalid_argument("modulate_weights: style length must equal input channels");

    Tensor out(w.dims);
    for (int o = 0; o < oc; ++o) {
        const std::size_t base = static_cast<std::size_t>(o) * ic * k2;
        double sq = 0.0;
        for (int i = 0; i < ic; ++i) {
            const double s = style[i];
            for (int t = 0; t < k2; ++t) {
                const double ws = s * w.data[base + static_cast<std::size_t>(i) * k2 + t];
                out.data[base + static_cast<std::size_t>(i) * k2 + t] = static_cast<float>(ws);
                sq += ws * ws;
            }
        }
        const float inv = static_cast<float>(1.0 / std::sqrt(sq + kModulationEps));
        for (int t = 0; t < ic * k2; ++t) out.data[base + t] *= inv;
    }
    return out;
}

namespace {

// One output row: acc[x] += w * in_row[x+dx] over all (ic, ky, kx) taps.
// Interior columns are branch-free; the <=1-wide borders take the guarded path.
inline void conv_row(const FeatureMap& in, const float* wbase, int ic, int k, int y, float* acc,
                     int w_img, int h_img) {
    const int r = k / 2;
    for (int i = 0; i < ic; ++i) {
        const float* plane = in.plane(i);
        const float* wk = wbase + static_cast<std::size_t>(i) * k * k;
        for (int ky = 0; ky < k; ++ky) {
            const int yy = y + ky - r;
            if (yy < 0 || yy >= h_img) continue;
            const float* row = plane + static_cast<std::size_t>(yy) * w_img;
            for (int kx = 0; kx < k; ++kx) {
                const float wv = wk[ky * k + kx];
                const int dx = kx - r;
                const int x0 = dx < 0 ? -dx : 0;
                const int x1 = dx > 0 ? w_img - dx : w_img;
                const float* src = row + dx;
#pragma omp simd
                for (int x = x0; x < x1; ++x) acc[x] += wv * src[x];
            }
        }
    }
}

} // namespace

void conv2d(const FeatureMap& in, const Tensor& weights, std::span<const float> bias,
            FeatureMap& out) {
    if (weights.dims.size() != 4)
        throw std::invalid_argument("conv2d: weight must be rank 4");
    const int oc = static_cast<int>(weights.dims[0]);
    const int ic = static_cast<int>(weights.dims[1]);
    const int k = static_cast<int>(weights.dims[2]);
    if (static_cast<int>(weights.dims[3]) != k || (k % 2) == 0)
        throw std::invalid_argument("conv2d: kernel must be square with odd size");
    if (ic != in.c)
        throw std::invalid_argument("conv2d: input channel mismatch");
    if (static_cast<int>(bias.size()) != oc)
        throw std::invalid_argument("conv2d: bias size mismatch");
    if (out.c != oc || out.h != in.h || out.w != in.w) out = FeatureMap(oc, in.h, in.w);

    const int h = in.h, w = in.w;
#pragma omp parallel for schedule(static) collapse(2)
    for (int o = 0; o < oc; ++o) {
        for (int y = 0; y < h; ++y) {
            float* acc = out.plane(o) + static_cast<std::size_t>(y) * w;
            const float bv = bias[o];
            for (int x = 0; x < w; ++x) acc[x] = bv;
            const float* wbase =
                weights.data.data() + static_cast<std::size_t>(o) * ic * k * k;
            conv_row(in, wbase, ic, k, y, acc, w, h);
        }
    }
}

void leaky_relu_inplace(FeatureMap& m, float slope) {
    const std::size_t n = m.data.size();
    float* p = m.data.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        p[i] = p[i] > 0.0f ? p[i] : slope * p[i];
}

FeatureMap pixel_shuffle(const FeatureMap& in, int r) {
    if (r < 1) throw std::invalid_argument("pixel_shuffle: factor must be >= 1");
    if (in.c % (r * r) != 0)
        throw std::invalid_argument("pixel_shuffle: channels not divisible by r^2");
    const int oc = in.c / (r * r);
    FeatureMap out(oc, in.h * r, in.w * r);
    for (int c = 0; c < oc; ++c) {
        for (int dy = 0; dy < r; ++dy) {
            for (int dx = 0; dx < r; ++dx) {
                const float* src = in.plane(c * r * r + dy * r + dx);
                for (int y = 0; y < in.h; ++y) {
                    float* dst = out.plane(c) +
                                 static_cast<std::size_t>(r * y + dy) * out.w + dx;
                    const float* s = src + static_cast<std::size_t>(y) * in.w;
                    for (int x = 0; x < in.w; ++x) dst[static_cast<std::size_t>(x) * r] = s[x];
                }
            }
        }
    }
    return out;
}

} // namespace rme::nn
