#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rme/gridding.hpp"
#include "rme/image.hpp"
#include "rme/mesh.hpp"
#include "rme/tensor.hpp"

namespace rme::io {

enum class IoErrorCode {
    BadMagic,
    BadVersion,
    Truncated,
    DuplicateName,
    UnknownDtype,
    BadHeader,
    FileAccess,
};

struct IoError : std::runtime_error {
    IoErrorCode code;
    IoError(IoErrorCode c, const std::string& what) : std::runtime_error(what), code(c) {}
};

// Engine weight container. Little-endian layout:
//   magic "GRMH", version u32 = 1, tensor count u32, then per tensor:
//   name length u32, UTF-8 name, dtype u32 (0 = float32), rank u32,
//   dims u32[rank], row-major float32 payload.
// d_z / d_f metadata travels as the ordinary tensor "meta.hyper" so that
// load(save(p)) reproduces p bit for bit.
void save_weights(const NetParams& params, const std::filesystem::path& path);
NetParams load_weights(const std::filesystem::path& path);

// Map stack container: magic "GRMM", version u32 = 1, n/h/w/c u32, per
// surface {half_width f32, is_background u32, warp u32}, then the planar
// float32 payload in [surface][channel][row][col] order.
void save_map_stack(const MapStack& maps, const std::filesystem::path& path);
MapStack load_map_stack(const std::filesystem::path& path);

// 16-byte header (magic "GRMD", H u32, W u32, reserved u32) + float32 grid.
void save_depth_map(const DepthMap& depth, const std::filesystem::path& path);
DepthMap load_depth_map(const std::filesystem::path& path);

// magic "GRMO", nx/ny/nz u32, box min/max f32[6], then float32 values.
void save_occupancy_grid(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid load_occupancy_grid(const std::filesystem::path& path);

// 8-bit PNG, rounding-to-nearest quantization of [0,1] floats.
std::vector<std::uint8_t> encode_png_rgb8(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);
// RGBA variant used for baked textures (alpha = occupancy plane).
void write_png_rgba(const std::vector<std::uint8_t>& rgba, int h, int w,
                    const std::filesystem::path& path);

// One PNG per surface: RGB from the color planes, alpha from occupancy.
void write_surface_textures(const MapStack& maps, const std::filesystem::path& directory,
                            const std::string& stem, std::vector<std::string>* names = nullptr);

// OBJ + MTL; when `maps` is given, per-surface textures are written next to
// the OBJ and referenced via map_Kd.
void export_obj(std::span<const Mesh> meshes, const MapStack* maps,
                const std::filesystem::path& obj_path);

std::uint64_t fnv1a64(std::string_view bytes);

// Every file-writing CLI path records what it produced and under which
// configuration.
void write_manifest(const std::filesystem::path& directory, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& outputs);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

} // namespace rme::io
