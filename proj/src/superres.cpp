#include "rme/superres.hpp"

#include <cmath>
#include <stdexcept>

namespace rme {

namespace {

struct NetSpec {
    std::string prefix;
    int width;
    int growth;
};

NetSpec net_spec(const std::string& prefix) {
    if (prefix == "sr_fg") return {prefix, kFgWidth, kFgGrowth};
    if (prefix == "sr_bg") return {prefix, kBgWidth, kBgGrowth};
    throw std::invalid_argument("unknown super-resolution net: " + prefix);
}

int stages_for_factor(int factor) {
    switch (factor) {
        case 4: return 2;
        case 8: return 3;
        case 16: return 4;
        default:
            throw std::invalid_argument("superresolve: factor must be 4, 8, or 16");
    }
}

std::vector<float> style_code(const LatentCode& latent, const NetParams& params) {
    if (static_cast<int>(latent.values.size()) != params.d_z)
        throw ModelFormatError("map_style: latent dimension mismatch");
    std::vector<float> h(latent.values.begin(), latent.values.end());
    std::vector<float> next;
    for (int i = 0; i < 3; ++i) {
        const std::string base = "style.map." + std::to_string(i);
        nn::affine(params.at(base + ".weight"), params.at(base + ".bias"), h, next);
        for (float& v : next) v = v > 0.0f ? v : 0.2f * v;
        h.swap(next);
    }
    return h;
}

std::vector<std::string> modulated_layer_names(const std::string& prefix, int stages) {
    std::vector<std::string> names;
    for (int s = 0; s < stages; ++s) names.push_back("up." + std::to_string(s));
    names.push_back("tail.conv");
    names.push_back("tail.proj");
    return names;
}

nn::ConvLayerParams load_conv(const NetParams& params, const std::string& name, bool modulated) {
    nn::ConvLayerParams layer;
    layer.weights = params.at(name + ".weight");
    const Tensor& b = params.at(name + ".bias");
    layer.bias.assign(b.data.begin(), b.data.end());
    layer.modulated = modulated;
    if (layer.weights.dims.size() != 4 ||
        layer.weights.dims[0] != layer.bias.size())
        throw ModelFormatError("conv layer " + name + " has inconsistent shapes");
    return layer;
}

void concat_into(nn::FeatureMap& dst, int offset, const nn::FeatureMap& src) {
    std::copy(src.data.begin(), src.data.end(),
              dst.data.begin() + static_cast<std::size_t>(offset) * src.h * src.w);
}

} // namespace

std::vector<int> upsample_schedule(const std::string& net_prefix, int factor) {
    const NetSpec spec = net_spec(net_prefix);
    const std::vector<int> full = (spec.width == kFgWidth) ? std::vector<int>{64, 64, 32, 16}
                                                           : std::vector<int>{32, 32, 16, 8};
    const int stages = stages_for_factor(factor);
    return {full.begin(), full.begin() + stages};
}

StyleVector map_style(const LatentCode& latent, const NetParams& params,
                      const std::string& net_prefix) {
    net_spec(net_prefix);
    const std::vector<float> code = style_code(latent, params);

    // Affine heads exist for however many stages the model was generated with.
    int stages = 0;
    while (params.has(net_prefix + ".up." + std::to_string(stages) + ".weight")) ++stages;
    if (stages == 0) throw ModelFormatError("map_style: no upsample stages in " + net_prefix);

    StyleVector sv;
    std::vector<float> s;
    for (const std::string& layer : modulated_layer_names(net_prefix, stages)) {
        const std::string base = net_prefix + ".style." + layer;
        nn::affine(params.at(base + ".weight"), params.at(base + ".bias"), code, s);
        sv.layers.push_back(s);
    }
    return sv;
}

nn::FeatureMap rrdb_forward(const nn::FeatureMap& input, const NetParams& params,
                            const std::string& block_prefix, int width, int growth) {
    if (input.c != width)
        throw std::invalid_argument("rrdb_forward: channel count must equal block width");

    nn::FeatureMap x = input;
    nn::FeatureMap cat(width + 4 * growth, input.h, input.w);
    nn::FeatureMap conv_out, stage_in;
    for (int d = 0; d < 3; ++d) {
        concat_into(cat, 0, x);
        int filled = width;
        for (int k = 0; k < 5; ++k) {
            const std::string name =
                block_prefix + ".d" + std::to_string(d) + ".c" + std::to_string(k);
            nn::ConvLayerParams conv = load_conv(params, name, false);
            if (static_cast<int>(conv.weights.dims[1]) != filled)
                throw ModelFormatError("rrdb dense conv " + name + " input width mismatch");
            stage_in = nn::FeatureMap(filled, input.h, input.w);
            std::copy(cat.data.begin(),
                      cat.data.begin() + static_cast<std::size_t>(filled) * input.h * input.w,
                      stage_in.data.begin());
            nn::conv2d(stage_in, conv.weights, conv.bias, conv_out);
            if (k < 4) {
                nn::leaky_relu_inplace(conv_out, kLeakySlope);
                concat_into(cat, filled, conv_out);
                filled += growth;
            }
        }
        // conv_out is the width-channel dense output; residual-scale into x.
        float* xp = x.data.data();
        const float* cp = conv_out.data.data();
        const std::size_t total = x.data.size();
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i)
            xp[i] += kResidualScale * cp[i];
    }

    // Outer residual on the accumulated delta keeps zero weights an identity.
    nn::FeatureMap out = input;
    float* op = out.data.data();
    const float* xp = x.data.data();
    const float* ip = input.data.data();
    const std::size_t total = out.data.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i)
        op[i] = ip[i] + kResidualScale * (xp[i] - ip[i]);
    return out;
}

namespace {

struct PreparedNet {
    NetSpec spec;
    nn::ConvLayerParams head;
    std::vector<Tensor> up_weights; // modulated
    std::vector<std::vector<float>> up_bias;
    std::vector<int> up_out_channels;
    Tensor tail_conv_w, tail_proj_w; // modulated
    std::vector<float> tail_conv_b, tail_proj_b;
};

PreparedNet prepare_net(const LatentCode& latent, const NetParams& params,
                        const std::string& prefix, int factor, int in_channels) {
    PreparedNet net{net_spec(prefix), {}, {}, {}, {}, {}, {}, {}, {}};
    net.head = load_conv(params, prefix + ".head", false);
    if (static_cast<int>(net.head.weights.dims[1]) != in_channels)
        throw ModelFormatError(prefix + ".head expects " +
                               std::to_string(net.head.weights.dims[1]) + " channels, got " +
                               std::to_string(in_channels));

    const std::vector<int> schedule = upsample_schedule(prefix, factor);
    const StyleVector style = map_style(latent, params, prefix);
    if (style.layers.size() < schedule.size() + 2)
        throw ModelFormatError(prefix + ": style vector shorter than modulated layer count");

    for (std::size_t s = 0; s < schedule.size(); ++s) {
        nn::ConvLayerParams conv =
            load_conv(params, prefix + ".up." + std::to_string(s), true);
        net.up_weights.push_back(nn::modulate_weights(conv, style.layers[s]));
        net.up_bias.push_back(conv.bias);
        net.up_out_channels.push_back(schedule[s]);
        if (static_cast<int>(conv.weights.dims[0]) != schedule[s] * 4)
            throw ModelFormatError(prefix + ".up." + std::to_string(s) +
                                   " does not match the channel schedule");
    }
    {
        nn::ConvLayerParams conv = load_conv(params, prefix + ".tail.conv", true);
        net.tail_conv_w = nn::modulate_weights(conv, style.layers[schedule.size()]);
        net.tail_conv_b = conv.bias;
    }
    {
        nn::ConvLayerParams conv = load_conv(params, prefix + ".tail.proj", true);
        net.tail_proj_w = nn::modulate_weights(conv, style.layers[schedule.size() + 1]);
        net.tail_proj_b = conv.bias;
        if (net.tail_proj_w.dims[0] != 4)
            throw ModelFormatError(prefix + ".tail.proj must produce 4 channels");
    }
    return net;
}

void run_net(const PreparedNet& net, const NetParams& params, nn::FeatureMap& x) {
    nn::FeatureMap tmp;
    nn::conv2d(x, net.head.weights, net.head.bias, tmp);
    x = std::move(tmp);
    tmp = nn::FeatureMap();

    for (int b = 0; b < kRrdbBlocks; ++b) {
        x = rrdb_forward(x, params, net.spec.prefix + ".rrdb." + std::to_string(b),
                         net.spec.width, net.spec.growth);
    }

    for (std::size_t s = 0; s < net.up_weights.size(); ++s) {
        nn::conv2d(x, net.up_weights[s], net.up_bias[s], tmp);
        x = nn::pixel_shuffle(tmp, 2);
        nn::leaky_relu_inplace(x, kLeakySlope);
    }

    nn::conv2d(x, net.tail_conv_w, net.tail_conv_b, tmp);
    nn::leaky_relu_inplace(tmp, kLeakySlope);
    nn::conv2d(tmp, net.tail_proj_w, net.tail_proj_b, x);

    float* p = x.data.data();
    const std::size_t total = x.data.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i)
        p[i] = nn::sigmoidf(p[i]);
}

} // namespace

MapStack superresolve(const LatentCode& latent, const MapStack& lr, const NetParams& params,
                      int factor) {
    stages_for_factor(factor);
    if (lr.c != 4 + params.d_f)
        throw std::invalid_argument("superresolve: input must carry 4+d_f channels");

    const PreparedNet fg = prepare_net(latent, params, "sr_fg", factor, lr.c);
    const PreparedNet bg = prepare_net(latent, params, "sr_bg", factor, lr.c);

    MapStack hr(lr.n, lr.h * factor, lr.w * factor, 4);
    hr.meta = lr.meta;

    for (int s = 0; s < lr.n; ++s) {
        nn::FeatureMap x(lr.c, lr.h, lr.w);
        std::copy(lr.plane(s, 0), lr.plane(s, 0) + x.data.size(), x.data.begin());
        run_net(lr.meta[s].is_background ? bg : fg, params, x);
        std::copy(x.data.begin(), x.data.end(), hr.plane(s, 0));
    }
    return hr;
}

} // namespace rme
