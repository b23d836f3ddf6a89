#include "rme/cli.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reference/reference.hpp"
#include "rme/io.hpp"
#include "rme/losses.hpp"
#include "rme/mesh.hpp"
#include "rme/render.hpp"
#include "rme/rng.hpp"
#include "rme/scene.hpp"
#include "rme/superres.hpp"

namespace rme {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Scene configuration file (key = value lines)");
    cmd->add_option("--seed", opts.seed, "Override the configured seed (controls all randomness)")
        ->each([&](const std::string&) { opts.seed_set = true; });
}

SceneConfig resolve_config(const CommonOpts& opts) {
    SceneConfig cfg =
        opts.config_path.empty() ? SceneConfig{} : load_scene_config(opts.config_path);
    if (opts.seed_set) cfg.seed = opts.seed;
    return cfg;
}

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04d.png", index);
    return buf;
}

std::vector<float> yaw_sweep(int frames, float yaw_range) {
    std::vector<float> yaws(frames);
    for (int i = 0; i < frames; ++i)
        yaws[i] = frames == 1 ? 0.0f
                              : -yaw_range + 2.0f * yaw_range * static_cast<float>(i) /
                                                 static_cast<float>(frames - 1);
    return yaws;
}

// ---- gen-scene -------------------------------------------------------------

struct GenSceneOpts {
    CommonOpts common;
    std::string out;
};

int run_gen_scene(const GenSceneOpts& o) {
    const SceneConfig cfg = resolve_config(o.common);
    const NetParams params = gen_test_model(cfg.seed, cfg);
    io::save_weights(params, o.out);
    const fs::path out(o.out);
    io::write_manifest(out.parent_path().empty() ? "." : out.parent_path(), cfg.to_text(),
                       cfg.seed, {out.filename().string()});
    std::cout << "wrote " << o.out << " (" << params.tensors.size() << " tensors, seed "
              << cfg.seed << ")\n";
    return 0;
}

// ---- grid -------------------------------------------------------------------

struct GridOpts {
    CommonOpts common;
    std::string weights;
    std::string out;
    std::string contact_sheet_dir;
    int size = 0;
    bool no_features = false;
};

int run_grid(const GridOpts& o) {
    const SceneConfig cfg = resolve_config(o.common);
    const NetParams params = io::load_weights(o.weights);
    const SurfaceSet surfaces = load_surfaces(params);
    const LatentCode latent = load_latent(params);
    const int size = o.size > 0 ? o.size : cfg.lr_size;

    const auto t0 = Clock::now();
    const MapStack maps = grid_manifolds(latent, surfaces, params, size, size, !o.no_features,
                                         gridding_config(cfg));
    io::save_map_stack(maps, o.out);
    std::vector<std::string> outputs{fs::path(o.out).filename().string()};
    if (!o.contact_sheet_dir.empty()) {
        std::vector<std::string> names;
        io::write_surface_textures(radiance_only(maps), o.contact_sheet_dir, "surface", &names);
        for (auto& n : names) outputs.push_back(n);
    }
    const fs::path out(o.out);
    io::write_manifest(out.parent_path().empty() ? "." : out.parent_path(), cfg.to_text(),
                       cfg.seed, outputs);
    std::cout << "gridded " << maps.n << "x" << maps.h << "x" << maps.w << "x" << maps.c << " in "
              << seconds_since(t0) << " s\n";
    return 0;
}

// ---- superres ---------------------------------------------------------------

struct SuperresOpts {
    CommonOpts common;
    std::string weights;
    std::string in;
    std::string out;
    int factor = 0;
};

int run_superres(const SuperresOpts& o) {
    const SceneConfig cfg = resolve_config(o.common);
    const NetParams params = io::load_weights(o.weights);
    const LatentCode latent = load_latent(params);
    const MapStack lr = io::load_map_stack(o.in);
    const int factor = o.factor > 0 ? o.factor : cfg.sr_factor;

    const auto t0 = Clock::now();
    const MapStack hr = superresolve(latent, lr, params, factor);
    io::save_map_stack(hr, o.out);
    const fs::path out(o.out);
    io::write_manifest(out.parent_path().empty() ? "." : out.parent_path(), cfg.to_text(),
                       cfg.seed, {out.filename().string()});
    std::cout << "superresolved to " << hr.n << "x" << hr.h << "x" << hr.w << "x" << hr.c
              << " in " << seconds_since(t0) << " s\n";
    return 0;
}

// ---- render -----------------------------------------------------------------

struct RenderOpts {
    CommonOpts common;
    std::string weights;
    std::string maps;
    std::string out;
    std::string depth_out;
    float yaw = 0.0f, pitch = 0.0f, roll = 0.0f;
    int width = 0, height = 0;
    float fov = 0.0f;
};

RenderConfig render_config(const SceneConfig& cfg) {
    RenderConfig rc;
    rc.t_near = cfg.t_near;
    rc.t_far = cfg.t_far;
    return rc;
}

int run_render(const RenderOpts& o) {
    SceneConfig cfg = resolve_config(o.common);
    if (o.width > 0) cfg.width = o.width;
    if (o.height > 0) cfg.height = o.height;
    if (o.fov > 0.0f) cfg.fov_deg = o.fov;
    const NetParams params = io::load_weights(o.weights);
    const SurfaceSet surfaces = load_surfaces(params);
    const MapStack maps = radiance_only(io::load_map_stack(o.maps));
    const Camera camera = make_camera(cfg, o.yaw, o.pitch, o.roll);

    const auto t0 = Clock::now();
    const Image img = render_image(camera, surfaces, maps, render_config(cfg));
    io::write_png(img, o.out);
    std::vector<std::string> outputs{fs::path(o.out).filename().string()};
    if (!o.depth_out.empty()) {
        const DepthMap depth = render_depth(camera, surfaces, maps, render_config(cfg));
        io::save_depth_map(depth, o.depth_out);
        outputs.push_back(fs::path(o.depth_out).filename().string());
    }
    const fs::path out(o.out);
    io::write_manifest(out.parent_path().empty() ? "." : out.parent_path(), cfg.to_text(),
                       cfg.seed, outputs);
    std::cout << "rendered " << cfg.width << "x" << cfg.height << " in " << seconds_since(t0)
              << " s\n";
    return 0;
}

// ---- orbit / epi ------------------------------------------------------------

struct OrbitOpts {
    CommonOpts common;
    std::string weights;
    std::string maps;
    std::string out_dir = "orbit";
    int frames = 30;
    float yaw_range = 0.4f;
    float pitch = 0.0f;
    bool epi = false;
    int row = -1;
    int col_start = 0;
    int col_end = 0;
    bool frames_only = false; // epi subcommand sets frames_only = false, writes epi only
    bool write_frames = true;
};

int run_orbit(const OrbitOpts& o) {
    const SceneConfig cfg = resolve_config(o.common);
    const NetParams params = io::load_weights(o.weights);
    const SurfaceSet surfaces = load_surfaces(params);
    const MapStack maps = radiance_only(io::load_map_stack(o.maps));
    fs::create_directories(o.out_dir);

    const std::vector<float> yaws = yaw_sweep(o.frames, o.yaw_range);
    std::vector<Image> images;
    std::vector<std::string> outputs;
    images.reserve(yaws.size());
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < yaws.size(); ++i) {
        const Camera camera = make_camera(cfg, yaws[i], o.pitch, 0.0f);
        images.push_back(render_image(camera, surfaces, maps, render_config(cfg)));
        if (o.write_frames) {
            const std::string name = frame_name(static_cast<int>(i));
            io::write_png(images.back(), fs::path(o.out_dir) / name);
            outputs.push_back(name);
        }
    }
    if (o.epi || !o.write_frames) {
        const int row = o.row >= 0 ? o.row : cfg.height / 2;
        const int col_end = o.col_end > 0 ? o.col_end : cfg.width;
        const Image epi = build_epi(images, row, o.col_start, col_end);
        io::write_png(epi, fs::path(o.out_dir) / "epi.png");
        outputs.push_back("epi.png");
    }
    io::write_manifest(o.out_dir, cfg.to_text(), cfg.seed, outputs);
    std::cout << "rendered " << o.frames << " frames in " << seconds_since(t0) << " s\n";
    return 0;
}

// ---- extract-mesh -----------------------------------------------------------

struct ExtractOpts {
    CommonOpts common;
    std::string weights;
    std::string maps;
    std::string out_dir = "mesh";
    int views = 15;
    float yaw_range = 0.4f;
    int grid_res = 128;
    float level = 0.5f;
    int depth_res = 0;
    bool bake = false;
};

int run_extract(const ExtractOpts& o) {
    SceneConfig cfg = resolve_config(o.common);
    const NetParams params = io::load_weights(o.weights);
    const SurfaceSet surfaces = load_surfaces(params);
    const MapStack maps = radiance_only(io::load_map_stack(o.maps));
    fs::create_directories(o.out_dir);
    std::vector<std::string> outputs;

    if (o.bake) {
        const std::vector<Mesh> meshes = bake_textured_mesh(surfaces, maps, gridding_config(cfg));
        io::export_obj(meshes, &maps, fs::path(o.out_dir) / "baked.obj");
        outputs = {"baked.obj", "baked.mtl"};
        for (int s = 0; s < maps.n; ++s) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "baked_tex_%02d.png", s);
            outputs.push_back(buf);
        }
        std::size_t tris = 0;
        for (const auto& m : meshes) tris += m.triangles.size();
        std::cout << "baked " << meshes.size() << " surfaces, " << tris << " triangles\n";
    } else {
        if (o.depth_res > 0) {
            cfg.width = o.depth_res;
            cfg.height = o.depth_res;
        }
        const auto t0 = Clock::now();
        std::vector<std::pair<DepthMap, Camera>> views;
        for (float yaw : yaw_sweep(o.views, o.yaw_range)) {
            const Camera camera = make_camera(cfg, yaw, 0.0f, 0.0f);
            views.emplace_back(render_depth(camera, surfaces, maps, render_config(cfg)), camera);
        }
        GridSpec spec;
        spec.nx = spec.ny = spec.nz = o.grid_res;
        const OccupancyGrid grid = fuse_occupancy(views, spec);
        io::save_occupancy_grid(grid, fs::path(o.out_dir) / "occupancy.grmo");
        const Mesh mesh = marching_cubes(grid, o.level);
        io::export_obj(std::span<const Mesh>(&mesh, 1), nullptr,
                       fs::path(o.out_dir) / "proxy.obj");
        outputs = {"occupancy.grmo", "proxy.obj", "proxy.mtl"};
        std::cout << "fused " << o.views << " views, extracted " << mesh.vertices.size()
                  << " vertices / " << mesh.triangles.size() << " triangles in "
                  << seconds_since(t0) << " s\n";
    }
    io::write_manifest(o.out_dir, cfg.to_text(), cfg.seed, outputs);
    return 0;
}

// ---- eval --------------------------------------------------------------------

struct EvalOpts {
    CommonOpts common;
    std::string weights;
    std::string out_dir = "eval";
    int factor = 4;
};

int run_eval(const EvalOpts& o) {
    SceneConfig cfg = resolve_config(o.common);
    const NetParams params = io::load_weights(o.weights);
    const SurfaceSet surfaces = load_surfaces(params);
    const LatentCode latent = load_latent(params);
    fs::create_directories(o.out_dir);

    const MapStack lr_plus = grid_manifolds(latent, surfaces, params, cfg.lr_size, cfg.lr_size,
                                            true, gridding_config(cfg));
    const MapStack lr = radiance_only(lr_plus);
    const MapStack hr = superresolve(latent, lr_plus, params, o.factor);

    SceneConfig lr_cfg = cfg;
    lr_cfg.width = cfg.lr_size;
    lr_cfg.height = cfg.lr_size;
    SceneConfig hr_cfg = cfg;
    hr_cfg.width = cfg.lr_size * o.factor;
    hr_cfg.height = cfg.lr_size * o.factor;
    const Image lr_img = render_image(make_camera(lr_cfg), surfaces, lr, render_config(cfg));
    const Image hr_img = render_image(make_camera(hr_cfg), surfaces, hr, render_config(cfg));

    const double cons = consistency_loss(hr_img, lr_img, hr, lr, o.factor,
                                         cfg.consistency_image_weight, cfg.consistency_map_weight);

    const std::vector<Mesh> meshes = bake_textured_mesh(surfaces, hr, gridding_config(cfg));
    const Camera cam = make_camera(cfg);
    const Image direct = render_image(cam, surfaces, hr, render_config(cfg));
    const Image cached = render_cached(meshes, hr, cam);
    const double cross_psnr = psnr(direct, cached);
    const double cross_ssim = ssim(direct, cached);

    // Synthetic score packs exercise the loss formulas deterministically.
    Rng rng(cfg.seed ^ 0x5eedULL);
    ScorePack scores;
    scores.lambda = cfg.r1_lambda;
    for (int i = 0; i < 64; ++i) {
        scores.fake_scores.push_back(rng.normal());
        scores.real_scores.push_back(rng.normal());
        scores.real_grad_sqnorms.push_back(0.01 * std::abs(rng.normal()));
    }
    PosePack poses;
    for (int i = 0; i < 64; ++i) {
        Eigen::Vector3d target(rng.uniform(-0.4f, 0.4f), rng.uniform(-0.2f, 0.2f), 0.0);
        Eigen::Vector3d pred = target + 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
        poses.generated.emplace_back(pred, target);
        Eigen::Vector3d rt(rng.uniform(-0.4f, 0.4f), rng.uniform(-0.2f, 0.2f), 0.0);
        poses.real.emplace_back(rt + 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()), rt);
    }
    std::vector<double> fake_patches, real_patches;
    for (int i = 0; i < 64; ++i) {
        fake_patches.push_back(rng.normal());
        real_patches.push_back(rng.normal());
    }

    nlohmann::json report;
    report["consistency_loss"] = cons;
    report["cross_renderer_psnr_db"] = cross_psnr;
    report["cross_renderer_ssim"] = cross_ssim;
    report["adversarial_loss_synthetic"] = adversarial_loss(scores);
    report["pose_loss_synthetic"] = pose_loss(poses);
    report["patch_adversarial_loss_synthetic"] = patch_adversarial_loss(fake_patches, real_patches);
    report["softplus_zero"] = softplus(0.0);
    report["factor"] = o.factor;
    report["seed"] = cfg.seed;

    std::ofstream txt(fs::path(o.out_dir) / "report.txt");
    for (auto it = report.begin(); it != report.end(); ++it)
        txt << it.key() << " = " << it.value().dump() << "\n";
    std::ofstream js(fs::path(o.out_dir) / "report.json");
    js << report.dump(2) << "\n";
    io::write_manifest(o.out_dir, cfg.to_text(), cfg.seed, {"report.txt", "report.json"});

    std::cout << "consistency_loss " << cons << "\ncross_renderer_psnr_db " << cross_psnr
              << "\ncross_renderer_ssim " << cross_ssim << "\n";
    return 0;
}

// ---- bench --------------------------------------------------------------------

struct BenchOpts {
    CommonOpts common;
    int frames = 40;
    int res = 256;
    int sr_factor = 4;
};

int run_bench(const BenchOpts& o);

// ---- dispatch ------------------------------------------------------------------

} // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{
        "radiance manifold engine: gridded iso-surface radiance, CNN map "
        "super-resolution, manifold rendering, shape extraction.\n"
        "Thread count follows OMP_NUM_THREADS."};
    app.require_subcommand(1);

    GenSceneOpts gen;
    auto* gen_cmd = app.add_subcommand("gen-scene", "Generate a seeded test model + scene");
    add_common(gen_cmd, gen.common);
    gen_cmd->add_option("--out", gen.out, "Output weight file")->required();

    GridOpts grid;
    auto* grid_cmd = app.add_subcommand("grid", "Flatten surfaces into radiance/feature maps");
    add_common(grid_cmd, grid.common);
    grid_cmd->add_option("--weights", grid.weights, "Engine weight file")->required();
    grid_cmd->add_option("--out", grid.out, "Output map stack")->required();
    grid_cmd->add_option("--size", grid.size, "Grid resolution override");
    grid_cmd->add_option("--contact-sheet", grid.contact_sheet_dir,
                         "Directory for per-surface preview PNGs");
    grid_cmd->add_flag("--no-features", grid.no_features, "Skip the feature channels");

    SuperresOpts sr;
    auto* sr_cmd = app.add_subcommand("superres", "Upsample low-resolution maps");
    add_common(sr_cmd, sr.common);
    sr_cmd->add_option("--weights", sr.weights, "Engine weight file")->required();
    sr_cmd->add_option("--in", sr.in, "Low-resolution map stack (with features)")->required();
    sr_cmd->add_option("--out", sr.out, "Output high-resolution map stack")->required();
    sr_cmd->add_option("--factor", sr.factor, "Upsampling factor (4, 8, or 16)");

    RenderOpts render;
    auto* render_cmd = app.add_subcommand("render", "Render one view from maps");
    add_common(render_cmd, render.common);
    render_cmd->add_option("--weights", render.weights, "Engine weight file")->required();
    render_cmd->add_option("--maps", render.maps, "Map stack to render")->required();
    render_cmd->add_option("--out", render.out, "Output PNG")->required();
    render_cmd->add_option("--yaw", render.yaw, "Camera yaw (radians)");
    render_cmd->add_option("--pitch", render.pitch, "Camera pitch (radians)");
    render_cmd->add_option("--roll", render.roll, "Camera roll (radians)");
    render_cmd->add_option("--width", render.width, "Image width override");
    render_cmd->add_option("--height", render.height, "Image height override");
    render_cmd->add_option("--fov", render.fov, "Vertical field of view override (degrees)");
    render_cmd->add_option("--depth", render.depth_out, "Also write a depth map here");

    OrbitOpts orbit;
    auto* orbit_cmd = app.add_subcommand("orbit", "Render a yaw sweep (optionally with its EPI)");
    add_common(orbit_cmd, orbit.common);
    orbit_cmd->add_option("--weights", orbit.weights, "Engine weight file")->required();
    orbit_cmd->add_option("--maps", orbit.maps, "Map stack to render")->required();
    orbit_cmd->add_option("--out-dir", orbit.out_dir, "Output directory");
    orbit_cmd->add_option("--frames", orbit.frames, "Number of frames")->check(CLI::PositiveNumber);
    orbit_cmd->add_option("--yaw-range", orbit.yaw_range, "Sweep covers [-range, range] radians");
    orbit_cmd->add_option("--pitch", orbit.pitch, "Fixed pitch (radians)");
    orbit_cmd->add_flag("--epi", orbit.epi, "Also write the epipolar line image");
    orbit_cmd->add_option("--row", orbit.row, "EPI row (default: image center)");
    orbit_cmd->add_option("--col-start", orbit.col_start, "EPI first column");
    orbit_cmd->add_option("--col-end", orbit.col_end, "EPI end column (exclusive)");

    OrbitOpts epi;
    epi.write_frames = false;
    auto* epi_cmd = app.add_subcommand("epi", "Render a sweep and write only the EPI");
    add_common(epi_cmd, epi.common);
    epi_cmd->add_option("--weights", epi.weights, "Engine weight file")->required();
    epi_cmd->add_option("--maps", epi.maps, "Map stack to render")->required();
    epi_cmd->add_option("--out-dir", epi.out_dir, "Output directory");
    epi_cmd->add_option("--frames", epi.frames, "Number of frames")->check(CLI::PositiveNumber);
    epi_cmd->add_option("--yaw-range", epi.yaw_range, "Sweep covers [-range, range] radians");
    epi_cmd->add_option("--row", epi.row, "EPI row (default: image center)");
    epi_cmd->add_option("--col-start", epi.col_start, "EPI first column");
    epi_cmd->add_option("--col-end", epi.col_end, "EPI end column (exclusive)");

    ExtractOpts extract;
    auto* ex_cmd = app.add_subcommand(
        "extract-mesh", "Depth-fuse views into an occupancy grid and extract a proxy mesh, "
                        "or bake textured surface meshes with --bake");
    add_common(ex_cmd, extract.common);
    ex_cmd->add_option("--weights", extract.weights, "Engine weight file")->required();
    ex_cmd->add_option("--maps", extract.maps, "Map stack (radiance)")->required();
    ex_cmd->add_option("--out-dir", extract.out_dir, "Output directory");
    ex_cmd->add_option("--views", extract.views, "Number of fusion views");
    ex_cmd->add_option("--yaw-range", extract.yaw_range, "View yaw range (radians)");
    ex_cmd->add_option("--grid-res", extract.grid_res, "Occupancy grid resolution");
    ex_cmd->add_option("--level", extract.level, "Iso level");
    ex_cmd->add_option("--depth-res", extract.depth_res, "Depth map resolution");
    ex_cmd->add_flag("--bake", extract.bake, "Bake textured meshes instead of fusing");

    EvalOpts eval;
    auto* eval_cmd = app.add_subcommand("eval", "Flat key-value metric report");
    add_common(eval_cmd, eval.common);
    eval_cmd->add_option("--weights", eval.weights, "Engine weight file")->required();
    eval_cmd->add_option("--out-dir", eval.out_dir, "Output directory");
    eval_cmd->add_option("--factor", eval.factor, "Super-resolution factor for the audit");

    BenchOpts bench;
    auto* bench_cmd =
        app.add_subcommand("bench", "Measure renderer throughput and kernel speedups");
    add_common(bench_cmd, bench.common);
    bench_cmd->add_option("--frames", bench.frames, "Frames per timing loop");
    bench_cmd->add_option("--res", bench.res, "Render resolution");
    bench_cmd->add_option("--sr-factor", bench.sr_factor, "Map upsampling factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, returns 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*gen_cmd) return run_gen_scene(gen);
        if (*grid_cmd) return run_grid(grid);
        if (*sr_cmd) return run_superres(sr);
        if (*render_cmd) return run_render(render);
        if (*orbit_cmd) return run_orbit(orbit);
        if (*epi_cmd) return run_orbit(epi);
        if (*ex_cmd) return run_extract(extract);
        if (*eval_cmd) return run_eval(eval);
        if (*bench_cmd) return run_bench(bench);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace rme
