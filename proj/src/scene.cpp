#include "rme/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rme/rng.hpp"
#include "rme/superres.hpp"

namespace rme {

std::string SceneConfig::to_text() const {
    std::ostringstream os;
    os << "n_surfaces = " << n_surfaces << "\n";
    os << "r_min = " << r_min << "\n";
    os << "r_max = " << r_max << "\n";
    os << "plane_z = " << plane_z << "\n";
    os << "field = " << field << "\n";
    os << "d_z = " << d_z << "\n";
    os << "d_f = " << d_f << "\n";
    os << "lr_size = " << lr_size << "\n";
    os << "sr_factor = " << sr_factor << "\n";
    os << "fg_half_width = " << fg_half_width << "\n";
    os << "bg_half_width = " << bg_half_width << "\n";
    os << "t_near = " << t_near << "\n";
    os << "t_far = " << t_far << "\n";
    os << "orbit_radius = " << orbit_radius << "\n";
    os << "look_at = " << look_at.x() << "," << look_at.y() << "," << look_at.z() << "\n";
    os << "fov_deg = " << fov_deg << "\n";
    os << "width = " << width << "\n";
    os << "height = " << height << "\n";
    os << "seed = " << seed << "\n";
    os << "consistency_image_weight = " << consistency_image_weight << "\n";
    os << "consistency_map_weight = " << consistency_map_weight << "\n";
    os << "r1_lambda = " << r1_lambda << "\n";
    return os.str();
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& value, int line, const std::string& key) {
    std::istringstream is(value);
    T v;
    is >> v;
    if (is.fail() || !trim(value.substr(static_cast<std::size_t>(is.tellg()) == std::string::npos
                                            ? value.size()
                                            : static_cast<std::size_t>(is.eof() ? value.size() : is.tellg())))
             .empty())
        throw ConfigError("line " + std::to_string(line) + ": bad value for '" + key + "': " + value);
    return v;
}

Vec3 parse_vec3(const std::string& value, int line, const std::string& key) {
    std::istringstream is(value);
    float x, y, z;
    char c1, c2;
    is >> x >> c1 >> y >> c2 >> z;
    if (is.fail() || c1 != ',' || c2 != ',')
        throw ConfigError("line " + std::to_string(line) + ": bad vector for '" + key +
                          "' (want x,y,z): " + value);
    return Vec3(x, y, z);
}

} // namespace

SceneConfig parse_scene_config(const std::string& text) {
    SceneConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto comment = raw.find('#');
        if (comment != std::string::npos) raw = raw.substr(0, comment);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (value.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty value for '" + key + "'");

        if (key == "n_surfaces") cfg.n_surfaces = parse_number<int>(value, line, key);
        else if (key == "r_min") cfg.r_min = parse_number<float>(value, line, key);
        else if (key == "r_max") cfg.r_max = parse_number<float>(value, line, key);
        else if (key == "plane_z") cfg.plane_z = parse_number<float>(value, line, key);
        else if (key == "field") {
            if (value != "analytic" && value != "mlp")
                throw ConfigError("line " + std::to_string(line) +
                                  ": field must be 'analytic' or 'mlp'");
            cfg.field = value;
        }
        else if (key == "d_z") cfg.d_z = parse_number<int>(value, line, key);
        else if (key == "d_f") cfg.d_f = parse_number<int>(value, line, key);
        else if (key == "lr_size") cfg.lr_size = parse_number<int>(value, line, key);
        else if (key == "sr_factor") cfg.sr_factor = parse_number<int>(value, line, key);
        else if (key == "fg_half_width") cfg.fg_half_width = parse_number<float>(value, line, key);
        else if (key == "bg_half_width") cfg.bg_half_width = parse_number<float>(value, line, key);
        else if (key == "t_near") cfg.t_near = parse_number<float>(value, line, key);
        else if (key == "t_far") cfg.t_far = parse_number<float>(value, line, key);
        else if (key == "orbit_radius") cfg.orbit_radius = parse_number<float>(value, line, key);
        else if (key == "look_at") cfg.look_at = parse_vec3(value, line, key);
        else if (key == "fov_deg") cfg.fov_deg = parse_number<float>(value, line, key);
        else if (key == "width") cfg.width = parse_number<int>(value, line, key);
        else if (key == "height") cfg.height = parse_number<int>(value, line, key);
        else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, line, key);
        else if (key == "consistency_image_weight")
            cfg.consistency_image_weight = parse_number<float>(value, line, key);
        else if (key == "consistency_map_weight")
            cfg.consistency_map_weight = parse_number<float>(value, line, key);
        else if (key == "r1_lambda") cfg.r1_lambda = parse_number<float>(value, line, key);
        else
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (cfg.n_surfaces < 2) throw ConfigError("n_surfaces must be at least 2");
    if (cfg.lr_size < 1) throw ConfigError("lr_size must be positive");
    return cfg;
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scene_config(buf.str());
}

GriddingConfig gridding_config(const SceneConfig& config) {
    GriddingConfig g;
    g.fg_half_width = config.fg_half_width;
    g.bg_half_width = config.bg_half_width;
    g.t_near = config.t_near;
    g.t_far = config.t_far;
    return g;
}

Camera make_camera(const SceneConfig& config, float yaw, float pitch, float roll) {
    Camera cam;
    cam.yaw = yaw;
    cam.pitch = pitch;
    cam.roll = roll;
    cam.orbit_radius = config.orbit_radius;
    cam.look_at = config.look_at;
    cam.fov_deg = config.fov_deg;
    cam.width = config.width;
    cam.height = config.height;
    return cam;
}

// ---------------------------------------------------------------------------
// Test-model generation
// ---------------------------------------------------------------------------

namespace {

void fill_uniform(Tensor& t, Rng& rng, float bound) {
    for (float& v : t.data) v = rng.uniform(-bound, bound);
}

void gen_affine(NetParams& p, Rng& rng, const std::string& name, int out, int in, float w_bound,
                float bias_value = 0.0f, float bias_jitter = 0.0f) {
    Tensor& w = p.emplace(name + ".weight",
                          {static_cast<std::uint32_t>(out), static_cast<std::uint32_t>(in)});
    fill_uniform(w, rng, w_bound);
    Tensor& b = p.emplace(name + ".bias", {static_cast<std::uint32_t>(out)});
    for (float& v : b.data)
        v = bias_value + (bias_jitter > 0.0f ? rng.uniform(-bias_jitter, bias_jitter) : 0.0f);
}

void gen_conv(NetParams& p, Rng& rng, const std::string& name, int out, int in, int k = 3) {
    Tensor& w = p.emplace(name + ".weight",
                          {static_cast<std::uint32_t>(out), static_cast<std::uint32_t>(in),
                           static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k)});
    fill_uniform(w, rng, std::sqrt(2.0f / (static_cast<float>(in) * k * k)));
    p.emplace(name + ".bias", {static_cast<std::uint32_t>(out)});
}

void gen_sr_net(NetParams& p, Rng& rng, const std::string& prefix, int width, int growth,
                int in_channels, const std::vector<int>& schedule) {
    gen_conv(p, rng, prefix + ".head", width, in_channels);
    for (int b = 0; b < kRrdbBlocks; ++b) {
        for (int d = 0; d < 3; ++d) {
            for (int k = 0; k < 5; ++k) {
                const int in = width + k * growth;
                const int out = (k < 4) ? growth : width;
                gen_conv(p, rng,
                         prefix + ".rrdb." + std::to_string(b) + ".d" + std::to_string(d) + ".c" +
                             std::to_string(k),
                         out, in);
            }
        }
    }
    int ch = width;
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        gen_conv(p, rng, prefix + ".up." + std::to_string(s), schedule[s] * 4, ch);
        gen_affine(p, rng, prefix + ".style.up." + std::to_string(s), ch, 256, 0.02f, 1.0f,
                   0.05f);
        ch = schedule[s];
    }
    gen_conv(p, rng, prefix + ".tail.conv", width / 4, ch);
    gen_affine(p, rng, prefix + ".style.tail.conv", ch, 256, 0.02f, 1.0f, 0.05f);
    gen_conv(p, rng, prefix + ".tail.proj", 4, width / 4);
    gen_affine(p, rng, prefix + ".style.tail.proj", width / 4, 256, 0.02f, 1.0f, 0.05f);
}

} // namespace

NetParams gen_test_model(std::uint64_t seed, const SceneConfig& config) {
    NetParams p;
    p.d_z = config.d_z;
    p.d_f = config.d_f;
    Rng rng(seed);

    {
        Tensor& meta = p.emplace("meta.hyper", {2});
        meta.data[0] = static_cast<float>(config.d_z);
        meta.data[1] = static_cast<float>(config.d_f);
    }
    {
        Tensor& z = p.emplace("latent.z", {static_cast<std::uint32_t>(config.d_z)});
        for (float& v : z.data) v = rng.normal();
    }

    // Radiance network: mapping trunk, per-layer conditioning heads, sine
    // trunk, color/occupancy heads, feature taps.
    gen_affine(p, rng, "radiance.map.0", 256, config.d_z, std::sqrt(1.0f / config.d_z));
    gen_affine(p, rng, "radiance.map.1", 256, 256, std::sqrt(1.0f / 256.0f));
    gen_affine(p, rng, "radiance.map.2", 256, 256, std::sqrt(1.0f / 256.0f));
    for (int l = 0; l < kTrunkLayers; ++l) {
        const std::string name = "radiance.film." + std::to_string(l);
        Tensor& w = p.emplace(name + ".weight", {2 * kTrunkWidth, 256});
        fill_uniform(w, rng, 0.02f);
        Tensor& b = p.emplace(name + ".bias", {2 * kTrunkWidth});
        for (int i = 0; i < kTrunkWidth; ++i) b.data[i] = rng.uniform(6.0f, 10.0f); // frequencies
        for (int i = kTrunkWidth; i < 2 * kTrunkWidth; ++i) b.data[i] = rng.uniform(-0.5f, 0.5f);
    }
    for (int l = 0; l < kTrunkLayers; ++l) {
        const int in = (l == 0) ? 3 : kTrunkWidth;
        const float bound = (l == 0) ? (1.0f / 3.0f) : (std::sqrt(6.0f / kTrunkWidth) / 8.0f);
        gen_affine(p, rng, "radiance.trunk." + std::to_string(l), kTrunkWidth, in, bound);
    }
    gen_affine(p, rng, "radiance.color", 3, kTrunkWidth + 3,
               std::sqrt(6.0f / (kTrunkWidth + 3)));
    gen_affine(p, rng, "radiance.occ", 1, kTrunkWidth, std::sqrt(6.0f / kTrunkWidth));
    for (int j = 0; j < kFeatureTaps; ++j)
        gen_affine(p, rng, "radiance.feat." + std::to_string(j), config.d_f, kTrunkWidth,
                   std::sqrt(1.0f / kTrunkWidth));

    // Style mapping trunk shared by both super-resolution nets.
    gen_affine(p, rng, "style.map.0", 256, config.d_z, std::sqrt(1.0f / config.d_z));
    gen_affine(p, rng, "style.map.1", 256, 256, std::sqrt(1.0f / 256.0f));
    gen_affine(p, rng, "style.map.2", 256, 256, std::sqrt(1.0f / 256.0f));

    const int in_channels = 4 + config.d_f;
    gen_sr_net(p, rng, "sr_fg", kFgWidth, kFgGrowth, in_channels,
               upsample_schedule("sr_fg", config.sr_factor));
    gen_sr_net(p, rng, "sr_bg", kBgWidth, kBgGrowth, in_channels,
               upsample_schedule("sr_bg", config.sr_factor));

    // Manifold predictor for MLP mode; harmless extra tensors otherwise.
    if (config.field == "mlp") {
        int in = 3;
        const std::vector<int> hidden{64, 64, 64};
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            gen_affine(p, rng, "manifold.mlp." + std::to_string(i), hidden[i], in,
                       std::sqrt(1.0f / static_cast<float>(in)));
            in = hidden[i];
        }
        gen_affine(p, rng, "manifold.mlp.out", 1, in, std::sqrt(1.0f / static_cast<float>(in)));
    }

    SurfaceSet surfaces =
        init_default_surfaces(config.n_surfaces, config.r_min, config.r_max, config.plane_z);
    store_surfaces(p, surfaces);
    return p;
}

void store_surfaces(NetParams& params, const SurfaceSet& surfaces) {
    Tensor& levels =
        params.emplace("surfaces.levels", {static_cast<std::uint32_t>(surfaces.levels.size())});
    levels.data = surfaces.levels;
    Tensor& meta = params.emplace("surfaces.meta", {6});
    meta.data[0] = surfaces.field.mode == FieldMode::MlpField ? 1.0f : 0.0f;
    meta.data[1] = surfaces.field.center.x();
    meta.data[2] = surfaces.field.center.y();
    meta.data[3] = surfaces.field.center.z();
    meta.data[4] = surfaces.field.plane_z;
    meta.data[5] = static_cast<float>(surfaces.background_index);
}

SurfaceSet load_surfaces(const NetParams& params) {
    SurfaceSet s;
    const Tensor& levels = params.at("surfaces.levels");
    s.levels = levels.data;
    const Tensor& meta = params.at("surfaces.meta");
    if (meta.data.size() != 6) throw ModelFormatError("surfaces.meta must hold 6 values");
    s.field.mode = meta.data[0] != 0.0f ? FieldMode::MlpField : FieldMode::AnalyticSpherePlane;
    s.field.center = Vec3(meta.data[1], meta.data[2], meta.data[3]);
    s.field.plane_z = meta.data[4];
    s.background_index = static_cast<int>(meta.data[5]);
    s.field.params = &params;
    return s;
}

LatentCode load_latent(const NetParams& params) {
    const Tensor& z = params.at("latent.z");
    LatentCode latent;
    latent.values = z.data;
    return latent;
}

} // namespace rme
