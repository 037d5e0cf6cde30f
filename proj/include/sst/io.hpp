#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sst/error.hpp"
#include "sst/mlp.hpp"
#include "sst/types.hpp"

// Bit-exact portable containers: 4-byte magic, u32 header fields, contiguous
// little-endian float32/int32 columns. IGNORE/NONE ids encode as -1.
//   "SSTS"  scene            "SSTP"  backbone predictions
//   "SSTW"  dense-layer stack  "SSTR"  proposals (+ ASCII PLY sidecar)

namespace sst {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; byte-swapping reader not implemented");

namespace detail {

class BinWriter {
public:
    explicit BinWriter(const std::string& path) : file_(path, std::ios::binary) {
        if (!file_) fail(Err::MissingFile, "cannot open for writing: " + path);
    }

    void magic(const char m[4]) { file_.write(m, 4); }
    void u32(std::uint32_t v) { file_.write(reinterpret_cast<const char*>(&v), 4); }
    void i32(std::int32_t v) { file_.write(reinterpret_cast<const char*>(&v), 4); }
    void f32(float v) { file_.write(reinterpret_cast<const char*>(&v), 4); }

    void f32_col(const std::vector<double>& v) {
        for (double x : v) f32(static_cast<float>(x));
    }
    void vec3_col(const std::vector<Vec3>& v) {
        for (const auto& p : v) {
            f32(static_cast<float>(p[0]));
            f32(static_cast<float>(p[1]));
            f32(static_cast<float>(p[2]));
        }
    }
    void i32_col(const std::vector<std::int32_t>& v) {
        for (auto x : v) i32(x);
    }
    void mat_col(const Mat& m) {
        for (double x : m.data) f32(static_cast<float>(x));
    }

private:
    std::ofstream file_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) {
        if (!std::filesystem::exists(path)) fail(Err::MissingFile, path);
        file_.open(path, std::ios::binary);
        if (!file_) fail(Err::MissingFile, "cannot open: " + path);
    }

    void expect_magic(const char m[4], const std::string& what) {
        char buf[4] = {0, 0, 0, 0};
        file_.read(buf, 4);
        if (!file_ || std::memcmp(buf, m, 4) != 0)
            fail(Err::BadMagic, "expected " + std::string(m, 4) + " magic in " + what);
    }

    std::uint32_t u32() {
        std::uint32_t v;
        read_raw(&v, 4);
        return v;
    }
    std::int32_t i32() {
        std::int32_t v;
        read_raw(&v, 4);
        return v;
    }
    float f32() {
        float v;
        read_raw(&v, 4);
        return v;
    }

    std::vector<double> f32_col(std::size_t count) {
        std::vector<float> raw(count);
        if (count) read_raw(raw.data(), count * 4);
        return std::vector<double>(raw.begin(), raw.end());
    }
    std::vector<Vec3> vec3_col(std::size_t count) {
        auto flat = f32_col(count * 3);
        std::vector<Vec3> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
        return out;
    }
    std::vector<std::int32_t> i32_col(std::size_t count) {
        std::vector<std::int32_t> out(count);
        if (count) read_raw(out.data(), count * 4);
        return out;
    }
    Mat mat_col(std::size_t rows, std::size_t cols) {
        Mat m(rows, cols);
        m.data = f32_col(rows * cols);
        return m;
    }

    void expect_eof(const std::string& what) {
        char c;
        file_.read(&c, 1);
        if (!file_.eof()) fail(Err::LengthMismatch, "trailing bytes in " + what);
    }

private:
    void read_raw(void* dst, std::size_t bytes) {
        file_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(file_.gcount()) != bytes)
            fail(Err::LengthMismatch, "file truncated, wanted " + std::to_string(bytes) + " more bytes");
    }

    std::ifstream file_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// SSTS scene

inline constexpr std::uint32_t kFlagNormals = 1u << 0;
inline constexpr std::uint32_t kFlagSemanticGt = 1u << 1;
inline constexpr std::uint32_t kFlagInstanceGt = 1u << 2;

inline void save_scene(const std::string& path, const Scene& scene) {
    scene.validate();
    detail::BinWriter w(path);
    w.magic("SSTS");
    w.u32(1);  // version
    w.u32(static_cast<std::uint32_t>(scene.size()));
    w.u32(scene.num_categories);
    w.u32(scene.num_instances);
    std::uint32_t flags = 0;
    if (scene.has_normals()) flags |= kFlagNormals;
    if (scene.has_semantic_gt()) flags |= kFlagSemanticGt;
    if (scene.has_instance_gt()) flags |= kFlagInstanceGt;
    w.u32(flags);
    w.vec3_col(scene.positions);
    w.vec3_col(scene.colors);
    if (scene.has_normals()) w.vec3_col(scene.normals);
    if (scene.has_semantic_gt()) w.i32_col(scene.gt_semantic);
    if (scene.has_instance_gt()) w.i32_col(scene.gt_instance);
}

inline Scene load_scene(const std::string& path) {
    detail::BinReader r(path);
    r.expect_magic("SSTS", path);
    const std::uint32_t version = r.u32();
    if (version != 1) fail(Err::BadMagic, "unsupported SSTS version " + std::to_string(version));
    Scene scene;
    const std::uint32_t n = r.u32();
    scene.num_categories = r.u32();
    scene.num_instances = r.u32();
    const std::uint32_t flags = r.u32();
    scene.positions = r.vec3_col(n);
    scene.colors = r.vec3_col(n);
    if (flags & kFlagNormals) scene.normals = r.vec3_col(n);
    if (flags & kFlagSemanticGt) scene.gt_semantic = r.i32_col(n);
    if (flags & kFlagInstanceGt) scene.gt_instance = r.i32_col(n);
    r.expect_eof(path);
    scene.validate();
    return scene;
}

// ---------------------------------------------------------------------------
// SSTP predictions

inline void save_predictions(const std::string& path, const PointPredictions& pred) {
    detail::BinWriter w(path);
    w.magic("SSTP");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(pred.size()));
    w.u32(static_cast<std::uint32_t>(pred.num_categories()));
    w.u32(static_cast<std::uint32_t>(pred.feature_dim()));
    w.mat_col(pred.features);
    w.mat_col(pred.semantic_scores);
    w.mat_col(pred.offsets);
}

inline PointPredictions load_predictions(const std::string& path, const Scene& scene) {
    detail::BinReader r(path);
    r.expect_magic("SSTP", path);
    const std::uint32_t version = r.u32();
    if (version != 1) fail(Err::BadMagic, "unsupported SSTP version " + std::to_string(version));
    const std::uint32_t n = r.u32();
    const std::uint32_t k = r.u32();
    const std::uint32_t fdim = r.u32();
    if (n != scene.size())
        fail(Err::DimensionMismatch,
             "predictions N=" + std::to_string(n) + " but scene N=" + std::to_string(scene.size()));
    PointPredictions pred;
    pred.features = r.mat_col(n, fdim);
    pred.semantic_scores = r.mat_col(n, k);
    pred.offsets = r.mat_col(n, 3);
    r.expect_eof(path);
    pred.validate(scene.size());
    return pred;
}

// ---------------------------------------------------------------------------
// SSTW classifier weights

inline void save_weights(const std::string& path, const ClassifierWeights& weights) {
    weights.validate();
    detail::BinWriter w(path);
    w.magic("SSTW");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(weights.layers.size()));
    for (const auto& layer : weights.layers) {
        w.u32(static_cast<std::uint32_t>(layer.weight.rows));
        w.u32(static_cast<std::uint32_t>(layer.weight.cols));
        w.u32(static_cast<std::uint32_t>(layer.activation));
        w.mat_col(layer.weight);
        w.f32_col(layer.bias);
    }
}

inline ClassifierWeights load_weights(const std::string& path) {
    detail::BinReader r(path);
    r.expect_magic("SSTW", path);
    const std::uint32_t version = r.u32();
    if (version != 1) fail(Err::BadMagic, "unsupported SSTW version " + std::to_string(version));
    const std::uint32_t layer_count = r.u32();
    ClassifierWeights weights;
    weights.layers.reserve(layer_count);
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        DenseLayer layer;
        const std::uint32_t in_dim = r.u32();
        const std::uint32_t out_dim = r.u32();
        const std::uint32_t act = r.u32();
        if (act > 2) fail(Err::BadConfig, "unknown activation tag " + std::to_string(act));
        layer.activation = static_cast<Activation>(act);
        layer.weight = r.mat_col(in_dim, out_dim);
        layer.bias = r.f32_col(out_dim);
        weights.layers.push_back(std::move(layer));
    }
    r.expect_eof(path);
    weights.validate();
    return weights;
}

// ---------------------------------------------------------------------------
// SSTR proposals + PLY sidecar

inline void export_ply(const std::string& path, const Scene& scene,
                       const std::vector<std::array<std::uint8_t, 3>>& vertex_colors) {
    if (vertex_colors.size() != scene.size()) fail(Err::LengthMismatch, "vertex color count != N");
    std::ofstream f(path);
    if (!f) fail(Err::MissingFile, "cannot open for writing: " + path);
    f << "ply\nformat ascii 1.0\n";
    f << "element vertex " << scene.size() << "\n";
    f << "property float x\nproperty float y\nproperty float z\n";
    f << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    f << "end_header\n";
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto& p = scene.positions[i];
        const auto& c = vertex_colors[i];
        f << static_cast<float>(p[0]) << " " << static_cast<float>(p[1]) << " "
          << static_cast<float>(p[2]) << " " << int(c[0]) << " " << int(c[1]) << " " << int(c[2]) << "\n";
    }
}

// Fixed palette; proposal i gets palette[i % size].
inline std::array<std::uint8_t, 3> proposal_color(std::size_t i) {
    static constexpr std::array<std::array<std::uint8_t, 3>, 12> palette = {{
        {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
        {245, 130, 48}, {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
        {210, 245, 60}, {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
    }};
    return palette[i % palette.size()];
}

inline std::vector<std::array<std::uint8_t, 3>> proposal_vertex_colors(
    const std::vector<Proposal>& proposals, std::size_t n) {
    std::vector<std::array<std::uint8_t, 3>> colors(n, {128, 128, 128});
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const auto c = proposal_color(i);
        for (auto idx : proposals[i].point_indices) colors[idx] = c;
    }
    return colors;
}

inline void save_proposals_records(const std::string& path, const std::vector<Proposal>& proposals,
                                   std::size_t scene_n) {
    for (const auto& p : proposals)
        for (auto idx : p.point_indices)
            if (idx >= scene_n) fail(Err::IndexOutOfRange, "proposal point index " + std::to_string(idx));
    detail::BinWriter w(path);
    w.magic("SSTR");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(scene_n));
    w.u32(static_cast<std::uint32_t>(proposals.size()));
    for (const auto& p : proposals) {
        w.i32(p.category);
        w.f32(static_cast<float>(p.confidence));
        w.u32(static_cast<std::uint32_t>(p.point_indices.size()));
        for (auto idx : p.point_indices) w.u32(idx);
    }
}

inline void save_proposals(const std::string& path, const std::vector<Proposal>& proposals,
                           const Scene& scene) {
    save_proposals_records(path, proposals, scene.size());
    export_ply(path + ".ply", scene, proposal_vertex_colors(proposals, scene.size()));
}

inline std::vector<Proposal> load_proposals(const std::string& path, std::size_t scene_n) {
    detail::BinReader r(path);
    r.expect_magic("SSTR", path);
    const std::uint32_t version = r.u32();
    if (version != 1) fail(Err::BadMagic, "unsupported SSTR version " + std::to_string(version));
    const std::uint32_t n = r.u32();
    if (n != scene_n)
        fail(Err::DimensionMismatch, "proposals N=" + std::to_string(n) + " but scene N=" + std::to_string(scene_n));
    const std::uint32_t count = r.u32();
    std::vector<Proposal> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        out[i].node_id = static_cast<std::int32_t>(i);
        out[i].category = r.i32();
        out[i].confidence = r.f32();
        const std::uint32_t len = r.u32();
        out[i].point_indices.resize(len);
        for (std::uint32_t j = 0; j < len; ++j) {
            const std::uint32_t idx = r.u32();
            if (idx >= scene_n) fail(Err::IndexOutOfRange, "proposal point index " + std::to_string(idx));
            out[i].point_indices[j] = idx;
        }
    }
    r.expect_eof(path);
    return out;
}

} // namespace sst
