#include "rme/radiance.hpp"

#include <cmath>

#include "rme/nn_ops.hpp"

namespace rme {

namespace {

void validate_latent(const LatentCode& latent, const NetParams& params) {
    if (static_cast<int>(latent.values.size()) != params.d_z)
        throw ModelFormatError("latent code has dimension " +
                               std::to_string(latent.values.size()) + ", model wants " +
                               std::to_string(params.d_z));
}

std::vector<float> mapping_trunk(const LatentCode& latent, const NetParams& params) {
    std::vector<float> h(latent.values.begin(), latent.values.end());
    std::vector<float> next;
    for (int i = 0; i < 3; ++i) {
        const std::string base = "radiance.map." + std::to_string(i);
        nn::affine(params.at(base + ".weight"), params.at(base + ".bias"), h, next);
        for (float& v : next) v = v > 0.0f ? v : 0.2f * v;
        h.swap(next);
    }
    return h;
}

} // namespace

FilmConditioning map_film_conditioning(const LatentCode& latent, const NetParams& params) {
    validate_latent(latent, params);
    const std::vector<float> code = mapping_trunk(latent, params);
    FilmConditioning cond;
    cond.frequency.resize(kTrunkLayers);
    cond.phase.resize(kTrunkLayers);
    std::vector<float> head;
    for (int layer = 0; layer < kTrunkLayers; ++layer) {
        const std::string base = "radiance.film." + std::to_string(layer);
        nn::affine(params.at(base + ".weight"), params.at(base + ".bias"), code, head);
        if (static_cast<int>(head.size()) != 2 * kTrunkWidth)
            throw ModelFormatError("film head " + std::to_string(layer) + " has wrong width");
        cond.frequency[layer].assign(head.begin(), head.begin() + kTrunkWidth);
        cond.phase[layer].assign(head.begin() + kTrunkWidth, head.end());
    }
    return cond;
}

std::vector<RadianceSample> generate_radiance(const LatentCode& latent,
                                              std::span<const Vec3> points, const Vec3& view_dir,
                                              const NetParams& params, bool with_features) {
    const FilmConditioning cond = map_film_conditioning(latent, params);
    const int d_f = params.d_f;

    // Resolve every tensor once, outside the per-point loop.
    std::vector<const Tensor*> trunk_w(kTrunkLayers), trunk_b(kTrunkLayers);
    for (int l = 0; l < kTrunkLayers; ++l) {
        const std::string base = "radiance.trunk." + std::to_string(l);
        trunk_w[l] = &params.at(base + ".weight");
        trunk_b[l] = &params.at(base + ".bias");
        const std::uint32_t in_dim = (l == 0) ? 3u : static_cast<std::uint32_t>(kTrunkWidth);
        params.expect_shape(base + ".weight", {kTrunkWidth, in_dim});
    }
    const Tensor& color_w = params.at("radiance.color.weight");
    const Tensor& color_b = params.at("radiance.color.bias");
    params.expect_shape("radiance.color.weight", {3u, kTrunkWidth + 3u});
    const Tensor& occ_w = params.at("radiance.occ.weight");
    const Tensor& occ_b = params.at("radiance.occ.bias");
    params.expect_shape("radiance.occ.weight", {1u, kTrunkWidth});
    std::vector<const Tensor*> feat_w(kFeatureTaps), feat_b(kFeatureTaps);
    if (with_features) {
        for (int j = 0; j < kFeatureTaps; ++j) {
            const std::string base = "radiance.feat." + std::to_string(j);
            feat_w[j] = &params.at(base + ".weight");
            feat_b[j] = &params.at(base + ".bias");
            params.expect_shape(base + ".weight",
                                {static_cast<std::uint32_t>(d_f), kTrunkWidth});
        }
    }

    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(points.size());
    std::vector<RadianceSample> out(points.size());

#pragma omp parallel
    {
        std::vector<float> h, next, head, feat_acc, tap;
#pragma omp for schedule(static)
        for (std::ptrdiff_t p = 0; p < n; ++p) {
            const Vec3& x = points[p];
            h.assign({x.x(), x.y(), x.z()});
            if (with_features) feat_acc.assign(d_f, 0.0f);
            int tap_index = 0;
            for (int l = 0; l < kTrunkLayers; ++l) {
                nn::affine(*trunk_w[l], *trunk_b[l], h, next);
                const float* freq = cond.frequency[l].data();
                const float* phase = cond.phase[l].data();
                for (int i = 0; i < kTrunkWidth; ++i)
                    next[i] = std::sin(freq[i] * next[i] + phase[i]);
                h.swap(next);
                if (with_features && (l % 2 == 1)) {
                    nn::affine(*feat_w[tap_index], *feat_b[tap_index], h, tap);
                    for (int i = 0; i < d_f; ++i) feat_acc[i] += tap[i];
                    ++tap_index;
                }
            }

            RadianceSample& s = out[p];
            std::vector<float> hv(h);
            hv.push_back(view_dir.x());
            hv.push_back(view_dir.y());
            hv.push_back(view_dir.z());
            nn::affine(color_w, color_b, hv, head);
            s.color = Vec3(nn::sigmoidf(head[0]), nn::sigmoidf(head[1]), nn::sigmoidf(head[2]));
            nn::affine(occ_w, occ_b, h, head);
            s.occupancy = nn::sigmoidf(head[0]);
            if (with_features) s.feature = feat_acc;
        }
    }
    return out;
}

} // namespace rme
