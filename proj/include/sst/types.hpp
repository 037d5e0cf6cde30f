#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "sst/error.hpp"
#include "sst/linalg.hpp"

namespace sst {

// Sentinel label ids; both encode as -1 on disk.
inline constexpr std::int32_t kIgnoreSemantic = -1;
inline constexpr std::int32_t kNoInstance = -1;

struct Scene {
    std::vector<Vec3> positions;                      // meters
    std::vector<Vec3> colors;                         // RGB in [0,1]
    std::vector<Vec3> normals;                        // unit vectors, empty if absent
    std::vector<std::int32_t> gt_semantic;            // {0..K-1} or kIgnoreSemantic, empty if absent
    std::vector<std::int32_t> gt_instance;            // {0..J-1} or kNoInstance, empty if absent
    std::uint32_t num_categories = 0;                 // K
    std::uint32_t num_instances = 0;                  // J

    std::size_t size() const { return positions.size(); }
    bool has_normals() const { return !normals.empty(); }
    bool has_semantic_gt() const { return !gt_semantic.empty(); }
    bool has_instance_gt() const { return !gt_instance.empty(); }

    void validate() const;
};

inline void Scene::validate() const {
    const std::size_t n = positions.size();
    if (n < 1) fail(Err::InvalidScene, "scene must contain at least one point");
    if (colors.size() != n) fail(Err::LengthMismatch, "colors length != N");
    if (!normals.empty() && normals.size() != n) fail(Err::LengthMismatch, "normals length != N");
    if (!gt_semantic.empty() && gt_semantic.size() != n) fail(Err::LengthMismatch, "gt_semantic length != N");
    if (!gt_instance.empty() && gt_instance.size() != n) fail(Err::LengthMismatch, "gt_instance length != N");
    for (const auto& c : colors)
        if (c[0] < 0.0 || c[0] > 1.0 || c[1] < 0.0 || c[1] > 1.0 || c[2] < 0.0 || c[2] > 1.0)
            fail(Err::InvalidScene, "color component outside [0,1]");
    for (const auto& nv : normals)
        if (std::abs(norm(nv) - 1.0) > 1e-4) fail(Err::InvalidScene, "normal not unit length");
    for (std::size_t i = 0; i < gt_semantic.size(); ++i) {
        const auto s = gt_semantic[i];
        if (s != kIgnoreSemantic && (s < 0 || static_cast<std::uint32_t>(s) >= num_categories))
            fail(Err::InvalidScene, "gt_semantic id out of range");
    }
    for (std::size_t i = 0; i < gt_instance.size(); ++i) {
        const auto j = gt_instance[i];
        if (j != kNoInstance && (j < 0 || static_cast<std::uint32_t>(j) >= num_instances))
            fail(Err::InvalidScene, "gt_instance id out of range");
        if (j != kNoInstance) {
            if (gt_semantic.empty() || gt_semantic[i] == kIgnoreSemantic)
                fail(Err::InvalidScene, "point on an instance lacks a semantic label");
        }
    }
}

struct PointPredictions {
    Mat features;          // N x n
    Mat semantic_scores;   // N x K, rows on the probability simplex
    Mat offsets;           // N x 3, meters

    std::size_t size() const { return features.rows; }
    std::size_t feature_dim() const { return features.cols; }
    std::size_t num_categories() const { return semantic_scores.cols; }

    void validate(std::size_t scene_n) const {
        if (features.rows != scene_n || semantic_scores.rows != scene_n || offsets.rows != scene_n)
            fail(Err::DimensionMismatch, "prediction row count != scene N");
        if (offsets.cols != 3) fail(Err::DimensionMismatch, "offsets must be N x 3");
        for (std::size_t i = 0; i < semantic_scores.rows; ++i) {
            double sum = 0.0;
            for (std::size_t k = 0; k < semantic_scores.cols; ++k) {
                const double v = semantic_scores(i, k);
                if (v < 0.0) fail(Err::NonSimplexRow, "negative score in row " + std::to_string(i));
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-5)
                fail(Err::NonSimplexRow, "row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }
};

struct SuperpointAssignment {
    std::vector<std::uint32_t> labels;  // per point, in {0..M-1}
    std::uint32_t count = 0;            // M

    void validate() const {
        std::vector<char> seen(count, 0);
        for (auto l : labels) {
            if (l >= count) fail(Err::IndexOutOfRange, "superpoint label out of range");
            seen[l] = 1;
        }
        for (std::uint32_t m = 0; m < count; ++m)
            if (!seen[m]) fail(Err::InvalidScene, "empty superpoint id " + std::to_string(m));
    }
};

struct Superpoint {
    std::uint32_t id = 0;
    std::vector<std::uint32_t> point_indices;  // sorted
    std::vector<double> feature;               // pooled f, n-dim
    std::vector<double> semantic;              // pooled a, K-simplex
    Vec3 offset{0.0, 0.0, 0.0};                // pooled o
    Vec3 center{0.0, 0.0, 0.0};                // c_P = o + mean position
    std::vector<double> soft_label;            // q*, J-dim, empty until computed

    std::size_t size() const { return point_indices.size(); }
};

struct Proposal {
    std::int32_t node_id = -1;
    std::vector<std::uint32_t> superpoint_ids;
    std::vector<std::uint32_t> point_indices;  // flattened, sorted
    std::int32_t category = 0;                 // argmax of the node's a_t
    double confidence = 1.0;                   // in [0,1]
};

} // namespace sst
