#include "rme/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace rme {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

namespace {

double mean_or_zero(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

} // namespace

double adversarial_loss(const ScorePack& scores) {
    if (scores.real_grad_sqnorms.size() != scores.real_scores.size())
        throw std::invalid_argument("adversarial_loss: gradient list must match real scores");
    if (scores.lambda < 0.0) throw std::invalid_argument("adversarial_loss: lambda must be >= 0");
    double fake = 0.0;
    for (double s : scores.fake_scores) fake += softplus(s);
    double real = 0.0;
    for (std::size_t i = 0; i < scores.real_scores.size(); ++i)
        real += softplus(-scores.real_scores[i]) + scores.lambda * scores.real_grad_sqnorms[i];
    return mean_or_zero(fake, scores.fake_scores.size()) +
           mean_or_zero(real, scores.real_scores.size());
}

double pose_loss(const PosePack& poses) {
    double gen = 0.0;
    for (const auto& [pred, target] : poses.generated) gen += (pred - target).squaredNorm();
    double real = 0.0;
    for (const auto& [pred, target] : poses.real) real += (pred - target).squaredNorm();
    return mean_or_zero(gen, poses.generated.size()) + mean_or_zero(real, poses.real.size());
}

double patch_adversarial_loss(std::span<const double> fake_patch_scores,
                              std::span<const double> real_patch_scores) {
    double fake = 0.0;
    for (double s : fake_patch_scores) fake += softplus(s);
    double real = 0.0;
    for (double s : real_patch_scores) real += softplus(-s);
    return mean_or_zero(fake, fake_patch_scores.size()) +
           mean_or_zero(real, real_patch_scores.size());
}

namespace {

double catmull_rom(double t) {
    const double a = -0.5;
    const double at = std::abs(t);
    if (at <= 1.0) return ((a + 2.0) * at - (a + 3.0)) * at * at + 1.0;
    if (at < 2.0) return (((at - 5.0) * at + 8.0) * at - 4.0) * a;
    return 0.0;
}

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

struct TapSet {
    std::vector<int> offsets;      // flattened taps per output index
    std::vector<double> weights;
    int taps_per_output = 0;
};

// Area-aligned source coordinate (j + 0.5) * f - 0.5 with the kernel widened
// by f and weights normalized.
TapSet make_taps(int in_size, int factor) {
    const int out_size = in_size / factor;
    const double f = factor;
    const int taps = 4 * factor; // support (-2f, 2f)
    TapSet set;
    set.taps_per_output = taps;
    set.offsets.resize(static_cast<std::size_t>(out_size) * taps);
    set.weights.resize(static_cast<std::size_t>(out_size) * taps);
    for (int j = 0; j < out_size; ++j) {
        const double x = (j + 0.5) * f - 0.5;
        const int k0 = static_cast<int>(std::ceil(x - 2.0 * f + 1e-12));
        double norm = 0.0;
        for (int t = 0; t < taps; ++t) {
            const int k = k0 + t;
            const double w = catmull_rom((k - x) / f);
            set.offsets[static_cast<std::size_t>(j) * taps + t] = reflect_index(k, in_size);
            set.weights[static_cast<std::size_t>(j) * taps + t] = w;
            norm += w;
        }
        for (int t = 0; t < taps; ++t) set.weights[static_cast<std::size_t>(j) * taps + t] /= norm;
    }
    return set;
}

} // namespace

void bicubic_downsample_plane(const float* in, int h, int w, int factor, float* out) {
    if (factor < 1) throw std::invalid_argument("bicubic_downsample: factor must be >= 1");
    if (h % factor != 0 || w % factor != 0)
        throw std::invalid_argument("bicubic_downsample: size must divide by factor");
    if (factor == 1) {
        std::copy(in, in + static_cast<std::size_t>(h) * w, out);
        return;
    }
    const int oh = h / factor, ow = w / factor;
    const TapSet cols = make_taps(w, factor);
    const TapSet rows = make_taps(h, factor);

    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y) {
        const float* src = in + static_cast<std::size_t>(y) * w;
        for (int j = 0; j < ow; ++j) {
            double acc = 0.0;
            const std::size_t base = static_cast<std::size_t>(j) * cols.taps_per_output;
            for (int t = 0; t < cols.taps_per_output; ++t)
                acc += cols.weights[base + t] * src[cols.offsets[base + t]];
            tmp[static_cast<std::size_t>(y) * ow + j] = acc;
        }
    }
    for (int i = 0; i < oh; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * rows.taps_per_output;
        for (int j = 0; j < ow; ++j) {
            double acc = 0.0;
            for (int t = 0; t < rows.taps_per_output; ++t)
                acc += rows.weights[base + t] * tmp[static_cast<std::size_t>(rows.offsets[base + t]) * ow + j];
            out[static_cast<std::size_t>(i) * ow + j] = static_cast<float>(acc);
        }
    }
}

Image bicubic_downsample(const Image& image, int factor) {
    if (factor == 1) return image;
    Image out(image.h / factor, image.w / factor);
    // Channels are interleaved in Image; de-interleave per channel.
    std::vector<float> plane(static_cast<std::size_t>(image.h) * image.w);
    std::vector<float> small(static_cast<std::size_t>(out.h) * out.w);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < image.h * image.w; ++i) plane[i] = image.data[static_cast<std::size_t>(i) * 3 + c];
        bicubic_downsample_plane(plane.data(), image.h, image.w, factor, small.data());
        for (int i = 0; i < out.h * out.w; ++i) out.data[static_cast<std::size_t>(i) * 3 + c] = small[i];
    }
    return out;
}

MapStack bicubic_downsample(const MapStack& maps, int factor) {
    if (factor == 1) return maps;
    MapStack out(maps.n, maps.h / factor, maps.w / factor, maps.c);
    out.meta = maps.meta;
    for (int s = 0; s < maps.n; ++s)
        for (int c = 0; c < maps.c; ++c)
            bicubic_downsample_plane(maps.plane(s, c), maps.h, maps.w, factor, out.plane(s, c));
    return out;
}

double consistency_loss(const Image& hr_image, const Image& lr_image, const MapStack& hr_maps,
                        const MapStack& lr_maps, int factor, double image_weight,
                        double map_weight) {
    if (hr_image.h != lr_image.h * factor || hr_image.w != lr_image.w * factor)
        throw std::invalid_argument("consistency_loss: image sizes do not match the factor");
    if (hr_maps.n != lr_maps.n || hr_maps.h != lr_maps.h * factor ||
        hr_maps.w != lr_maps.w * factor || hr_maps.c != 4 || lr_maps.c < 4)
        throw std::invalid_argument("consistency_loss: map stacks do not match the factor");

    const Image down = bicubic_downsample(hr_image, factor);
    double image_term = 0.0;
    for (std::size_t i = 0; i < down.data.size(); ++i) {
        const double d = static_cast<double>(down.data[i]) - lr_image.data[i];
        image_term += d * d;
    }
    image_term /= static_cast<double>(down.data.size());

    double map_term = 0.0;
    std::vector<float> small(static_cast<std::size_t>(lr_maps.h) * lr_maps.w);
    for (int s = 0; s < hr_maps.n; ++s) {
        for (int c = 0; c < 4; ++c) {
            bicubic_downsample_plane(hr_maps.plane(s, c), hr_maps.h, hr_maps.w, factor,
                                     small.data());
            const float* lr = lr_maps.plane(s, c);
            for (std::size_t i = 0; i < small.size(); ++i) {
                const double d = static_cast<double>(small[i]) - lr[i];
                map_term += d * d;
            }
        }
    }
    map_term /= static_cast<double>(hr_maps.n) * 4.0 * lr_maps.h * lr_maps.w;

    return image_weight * image_term + map_weight * map_term;
}

double psnr(const Image& a, const Image& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("psnr: size mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

namespace {

struct GaussianWindow {
    static constexpr int kSize = 11;
    double w[kSize];
    GaussianWindow() {
        const double sigma = 1.5;
        double sum = 0.0;
        for (int i = 0; i < kSize; ++i) {
            const double d = i - (kSize - 1) / 2.0;
            w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
            sum += w[i];
        }
        for (double& v : w) v /= sum;
    }
};

// Separable 11-tap Gaussian blur, valid region only.
void blur_valid(const std::vector<double>& in, int h, int w, std::vector<double>& out, int oh,
                int ow) {
    static const GaussianWindow win;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < GaussianWindow::kSize; ++t)
                acc += win.w[t] * in[static_cast<std::size_t>(y) * w + x + t];
            tmp[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < GaussianWindow::kSize; ++t)
                acc += win.w[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
}

} // namespace

double ssim(const Image& a, const Image& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("ssim: size mismatch");
    if (a.h < GaussianWindow::kSize || a.w < GaussianWindow::kSize)
        throw std::invalid_argument("ssim: image smaller than the window");
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    const int oh = a.h - GaussianWindow::kSize + 1;
    const int ow = a.w - GaussianWindow::kSize + 1;
    const std::size_t npix = static_cast<std::size_t>(a.h) * a.w;

    std::vector<double> x(npix), y(npix), xx(npix), yy(npix), xy(npix);
    std::vector<double> mx(static_cast<std::size_t>(oh) * ow), my(mx.size()), mxx(mx.size()),
        myy(mx.size()), mxy(mx.size());

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < npix; ++i) {
            x[i] = a.data[i * 3 + c];
            y[i] = b.data[i * 3 + c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        blur_valid(x, a.h, a.w, mx, oh, ow);
        blur_valid(y, a.h, a.w, my, oh, ow);
        blur_valid(xx, a.h, a.w, mxx, oh, ow);
        blur_valid(yy, a.h, a.w, myy, oh, ow);
        blur_valid(xy, a.h, a.w, mxy, oh, ow);
        double acc = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = mxx[i] - mx[i] * mx[i];
            const double vy = myy[i] - my[i] * my[i];
            const double cov = mxy[i] - mx[i] * my[i];
            const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
            const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
            acc += num / den;
        }
        total += acc / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

} // namespace rme
