#include "rme/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace rme::io {

namespace {

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError(IoErrorCode::FileAccess, "cannot open for write: " + path.string());
    }
    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) { bytes(&v, 4); } // little-endian host assumed
    void f32(float v) { bytes(&v, 4); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void floats(const float* p, std::size_t n) { bytes(p, n * 4); }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw IoError(IoErrorCode::FileAccess, "cannot open: " + path.string());
    }
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw IoError(IoErrorCode::Truncated, "unexpected end of file");
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    float f32() {
        float v;
        bytes(&v, 4);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        if (n > (1u << 20)) throw IoError(IoErrorCode::BadHeader, "implausible string length");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    void floats(float* p, std::size_t n) { bytes(p, n * 4); }
    bool at_end() {
        in_.peek();
        return in_.eof();
    }

private:
    std::ifstream in_;
};

void check_magic(Reader& r, const char expect[4], const char* kind) {
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, expect, 4) != 0)
        throw IoError(IoErrorCode::BadMagic, std::string("bad magic for ") + kind);
}

} // namespace

void save_weights(const NetParams& params, const std::filesystem::path& path) {
    Writer w(path);
    w.bytes("GRMH", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(params.tensors.size()));
    for (const auto& [name, tensor] : params.tensors) {
        w.str(name);
        w.u32(0); // float32
        w.u32(static_cast<std::uint32_t>(tensor.dims.size()));
        for (std::uint32_t d : tensor.dims) w.u32(d);
        w.floats(tensor.data.data(), tensor.data.size());
    }
}

NetParams load_weights(const std::filesystem::path& path) {
    Reader r(path);
    check_magic(r, "GRMH", "weight file");
    const std::uint32_t version = r.u32();
    if (version != 1) throw IoError(IoErrorCode::BadVersion, "unsupported weight file version");
    const std::uint32_t count = r.u32();
    NetParams params;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.str();
        const std::uint32_t dtype = r.u32();
        if (dtype != 0) throw IoError(IoErrorCode::UnknownDtype, "unknown dtype tag in " + name);
        const std::uint32_t rank = r.u32();
        if (rank > 8) throw IoError(IoErrorCode::BadHeader, "implausible rank in " + name);
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) d = r.u32();
        if (params.tensors.count(name))
            throw IoError(IoErrorCode::DuplicateName, "duplicate tensor name: " + name);
        Tensor t(dims);
        r.floats(t.data.data(), t.data.size());
        params.tensors.emplace(name, std::move(t));
    }
    if (params.has("meta.hyper")) {
        const Tensor& meta = params.at("meta.hyper");
        if (meta.data.size() >= 2) {
            params.d_z = static_cast<int>(meta.data[0]);
            params.d_f = static_cast<int>(meta.data[1]);
        }
    }
    return params;
}

void save_map_stack(const MapStack& maps, const std::filesystem::path& path) {
    Writer w(path);
    w.bytes("GRMM", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(maps.n));
    w.u32(static_cast<std::uint32_t>(maps.h));
    w.u32(static_cast<std::uint32_t>(maps.w));
    w.u32(static_cast<std::uint32_t>(maps.c));
    for (const SurfaceMapMeta& m : maps.meta) {
        w.f32(m.half_width);
        w.u32(m.is_background ? 1 : 0);
        w.u32(m.warp == Warp::BgTrans ? 1 : 0);
    }
    w.floats(maps.data.data(), maps.data.size());
}

MapStack load_map_stack(const std::filesystem::path& path) {
    Reader r(path);
    check_magic(r, "GRMM", "map file");
    if (r.u32() != 1) throw IoError(IoErrorCode::BadVersion, "unsupported map file version");
    const int n = static_cast<int>(r.u32());
    const int h = static_cast<int>(r.u32());
    const int w = static_cast<int>(r.u32());
    const int c = static_cast<int>(r.u32());
    if (n < 1 || h < 1 || w < 1 || c < 1 || static_cast<long long>(n) * h * w * c > (1ll << 33))
        throw IoError(IoErrorCode::BadHeader, "implausible map dimensions");
    MapStack maps(n, h, w, c);
    for (SurfaceMapMeta& m : maps.meta) {
        m.half_width = r.f32();
        m.is_background = r.u32() != 0;
        m.warp = r.u32() != 0 ? Warp::BgTrans : Warp::Linear;
    }
    r.floats(maps.data.data(), maps.data.size());
    return maps;
}

void save_depth_map(const DepthMap& depth, const std::filesystem::path& path) {
    Writer w(path);
    w.bytes("GRMD", 4);
    w.u32(static_cast<std::uint32_t>(depth.h));
    w.u32(static_cast<std::uint32_t>(depth.w));
    w.u32(0);
    w.floats(depth.data.data(), depth.data.size());
}

DepthMap load_depth_map(const std::filesystem::path& path) {
    Reader r(path);
    check_magic(r, "GRMD", "depth file");
    const int h = static_cast<int>(r.u32());
    const int w = static_cast<int>(r.u32());
    r.u32();
    if (h < 1 || w < 1) throw IoError(IoErrorCode::BadHeader, "implausible depth dimensions");
    DepthMap d(h, w);
    r.floats(d.data.data(), d.data.size());
    return d;
}

void save_occupancy_grid(const OccupancyGrid& grid, const std::filesystem::path& path) {
    Writer w(path);
    w.bytes("GRMO", 4);
    w.u32(static_cast<std::uint32_t>(grid.nx));
    w.u32(static_cast<std::uint32_t>(grid.ny));
    w.u32(static_cast<std::uint32_t>(grid.nz));
    for (int i = 0; i < 3; ++i) w.f32(grid.box_min[i]);
    for (int i = 0; i < 3; ++i) w.f32(grid.box_max[i]);
    w.floats(grid.values.data(), grid.values.size());
}

OccupancyGrid load_occupancy_grid(const std::filesystem::path& path) {
    Reader r(path);
    check_magic(r, "GRMO", "occupancy file");
    OccupancyGrid g;
    g.nx = static_cast<int>(r.u32());
    g.ny = static_cast<int>(r.u32());
    g.nz = static_cast<int>(r.u32());
    for (int i = 0; i < 3; ++i) g.box_min[i] = r.f32();
    for (int i = 0; i < 3; ++i) g.box_max[i] = r.f32();
    if (g.nx < 1 || g.ny < 1 || g.nz < 1)
        throw IoError(IoErrorCode::BadHeader, "implausible grid dimensions");
    g.values.resize(static_cast<std::size_t>(g.nx) * g.ny * g.nz);
    r.floats(g.values.data(), g.values.size());
    return g;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

namespace {

void push_u32_be(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

void push_chunk(std::vector<std::uint8_t>& png, const char type[4],
                const std::vector<std::uint8_t>& data) {
    push_u32_be(png, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_pos = png.size();
    png.insert(png.end(), type, type + 4);
    png.insert(png.end(), data.begin(), data.end());
    const auto crc = crc32(0L, png.data() + type_pos, static_cast<uInt>(4 + data.size()));
    push_u32_be(png, static_cast<std::uint32_t>(crc));
}

std::vector<std::uint8_t> encode_png(const std::uint8_t* pixels, int h, int w, int channels) {
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(h) * (static_cast<std::size_t>(w) * channels + 1));
    for (int y = 0; y < h; ++y) {
        raw.push_back(0); // filter: none
        const std::uint8_t* row = pixels + static_cast<std::size_t>(y) * w * channels;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(w) * channels);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError(IoErrorCode::FileAccess, "png deflate failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> png{137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> ihdr;
    push_u32_be(ihdr, static_cast<std::uint32_t>(w));
    push_u32_be(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(8);                                       // bit depth
    ihdr.push_back(channels == 4 ? 6 : 2);                   // RGBA / RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    push_chunk(png, "IHDR", ihdr);
    push_chunk(png, "IDAT", compressed);
    push_chunk(png, "IEND", {});
    return png;
}

std::uint8_t quantize(float v) {
    const float x = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    return static_cast<std::uint8_t>(x);
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoErrorCode::FileAccess, "cannot open for write: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

} // namespace

std::vector<std::uint8_t> encode_png_rgb8(const Image& image) {
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(image.h) * image.w * 3);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = quantize(image.data[i]);
    return encode_png(pixels.data(), image.h, image.w, 3);
}

void write_png(const Image& image, const std::filesystem::path& path) {
    write_bytes(path, encode_png_rgb8(image));
}

void write_png_rgba(const std::vector<std::uint8_t>& rgba, int h, int w,
                    const std::filesystem::path& path) {
    if (rgba.size() != static_cast<std::size_t>(h) * w * 4)
        throw std::invalid_argument("write_png_rgba: buffer size mismatch");
    write_bytes(path, encode_png(rgba.data(), h, w, 4));
}

void write_surface_textures(const MapStack& maps, const std::filesystem::path& directory,
                            const std::string& stem, std::vector<std::string>* names) {
    std::filesystem::create_directories(directory);
    std::vector<std::uint8_t> rgba(static_cast<std::size_t>(maps.h) * maps.w * 4);
    for (int s = 0; s < maps.n; ++s) {
        for (int y = 0; y < maps.h; ++y) {
            for (int x = 0; x < maps.w; ++x) {
                const std::size_t o = (static_cast<std::size_t>(y) * maps.w + x) * 4;
                rgba[o + 0] = quantize(maps.at(s, 0, y, x));
                rgba[o + 1] = quantize(maps.at(s, 1, y, x));
                rgba[o + 2] = quantize(maps.at(s, 2, y, x));
                rgba[o + 3] = quantize(maps.c > 3 ? maps.at(s, 3, y, x) : 1.0f);
            }
        }
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "_%02d.png", s);
        const std::string name = stem + suffix;
        write_png_rgba(rgba, maps.h, maps.w, directory / name);
        if (names) names->push_back(name);
    }
}

void export_obj(std::span<const Mesh> meshes, const MapStack* maps,
                const std::filesystem::path& obj_path) {
    const std::filesystem::path dir = obj_path.parent_path();
    const std::string stem = obj_path.stem().string();
    if (!dir.empty()) std::filesystem::create_directories(dir);

    std::vector<std::string> textures;
    if (maps) write_surface_textures(*maps, dir.empty() ? "." : dir, stem + "_tex", &textures);

    std::ofstream mtl(dir / (stem + ".mtl"));
    if (!mtl) throw IoError(IoErrorCode::FileAccess, "cannot write mtl");
    for (std::size_t m = 0; m < meshes.size(); ++m) {
        mtl << "newmtl surface_" << m << "\n";
        mtl << "Kd 1 1 1\n";
        if (maps && meshes[m].surface_index >= 0 &&
            meshes[m].surface_index < static_cast<int>(textures.size()))
            mtl << "map_Kd " << textures[meshes[m].surface_index] << "\n";
        mtl << "\n";
    }

    std::ofstream obj(obj_path);
    if (!obj) throw IoError(IoErrorCode::FileAccess, "cannot write obj");
    obj << "mtllib " << stem << ".mtl\n";
    std::size_t vertex_base = 1;
    for (std::size_t m = 0; m < meshes.size(); ++m) {
        const Mesh& mesh = meshes[m];
        obj << "o surface_" << m << "\n";
        obj << "usemtl surface_" << m << "\n";
        for (const Vec3& v : mesh.vertices)
            obj << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
        const bool has_uv = mesh.uv.size() == mesh.vertices.size() && maps;
        if (has_uv) {
            for (const auto& uv : mesh.uv)
                obj << "vt " << uv.x() / static_cast<float>(maps->w - 1) << " "
                    << 1.0f - uv.y() / static_cast<float>(maps->h - 1) << "\n";
        }
        for (const auto& tri : mesh.triangles) {
            if (has_uv) {
                obj << "f";
                for (int k = 0; k < 3; ++k)
                    obj << " " << (vertex_base + tri[k]) << "/" << (vertex_base + tri[k]);
                obj << "\n";
            } else {
                obj << "f " << (vertex_base + tri[0]) << " " << (vertex_base + tri[1]) << " "
                    << (vertex_base + tri[2]) << "\n";
            }
        }
        vertex_base += mesh.vertices.size();
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void write_manifest(const std::filesystem::path& directory, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
    std::filesystem::create_directories(directory);
    nlohmann::json j;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_text)));
    j["config_hash"] = hex;
    j["seed"] = seed;
    j["outputs"] = outputs;
    std::ofstream out(directory / "manifest.json");
    if (!out) throw IoError(IoErrorCode::FileAccess, "cannot write manifest");
    out << j.dump(2) << "\n";
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoErrorCode::FileAccess, "cannot open: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace rme::io
