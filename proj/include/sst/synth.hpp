#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "sst/error.hpp"
#include "sst/rng.hpp"
#include "sst/types.hpp"

namespace sst {

// Desk-scale test data: Gaussian blob instances on a line, exact ground truth,
// and oracle backbone outputs (one-hot scores softened by noise_sigma, offsets
// pointing at the true instance center plus noise_sigma jitter).
struct SynthSpec {
    std::uint32_t instances = 2;
    std::uint32_t points_per_instance = 100;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
    std::uint32_t background_points = 0;  // category 0, no instance
    std::uint32_t num_categories = 0;     // 0 = instances + 1 (category 0 is background)
    std::uint32_t feature_dim = 8;
    double spacing = 4.0;       // distance between blob centers, meters
    double blob_radius = 0.4;   // per-axis stddev inside a blob
};

struct SynthScene {
    Scene scene;
    PointPredictions predictions;
    std::vector<Vec3> instance_centers;  // exact geometric centers, per instance
};

inline SynthScene synth_scene(const SynthSpec& spec) {
    if (spec.instances < 1 || spec.points_per_instance < 1)
        fail(Err::BadConfig, "synth needs at least one instance with one point");
    if (spec.noise_sigma < 0.0 || spec.noise_sigma >= 1.0)
        fail(Err::BadConfig, "noise_sigma must lie in [0, 1)");
    Rng rng(spec.seed);

    const std::uint32_t k = spec.num_categories ? spec.num_categories : spec.instances + 1;
    if (k < 2) fail(Err::BadConfig, "need at least one non-background category");
    const std::uint32_t n_total = spec.instances * spec.points_per_instance + spec.background_points;

    SynthScene out;
    Scene& scene = out.scene;
    scene.num_categories = k;
    scene.num_instances = spec.instances;
    scene.positions.reserve(n_total);
    scene.colors.reserve(n_total);
    scene.normals.reserve(n_total);
    scene.gt_semantic.reserve(n_total);
    scene.gt_instance.reserve(n_total);

    PointPredictions& pred = out.predictions;
    pred.features = Mat(n_total, spec.feature_dim);
    pred.semantic_scores = Mat(n_total, k);
    pred.offsets = Mat(n_total, 3);

    auto push_point = [&](const Vec3& pos, const Vec3& color, const Vec3& normal,
                          std::int32_t semantic, std::int32_t instance) {
        scene.positions.push_back(pos);
        scene.colors.push_back({std::clamp(color[0], 0.0, 1.0), std::clamp(color[1], 0.0, 1.0),
                                std::clamp(color[2], 0.0, 1.0)});
        scene.normals.push_back(normal);
        scene.gt_semantic.push_back(semantic);
        scene.gt_instance.push_back(instance);
    };

    auto unit_from = [&](Vec3 v) {
        const double len = norm(v);
        if (len < 1e-9) return Vec3{0.0, 0.0, 1.0};
        return (1.0 / len) * v;
    };

    std::uint32_t row = 0;
    for (std::uint32_t inst = 0; inst < spec.instances; ++inst) {
        const std::int32_t category = 1 + static_cast<std::int32_t>(inst % (k - 1));
        const Vec3 blob{spec.spacing * inst, 0.0, 0.0};
        const Vec3 base_color{rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)};
        std::vector<double> base_feature(spec.feature_dim);
        for (auto& v : base_feature) v = rng.normal();

        const std::uint32_t first_row = row;
        Vec3 sum{0.0, 0.0, 0.0};
        for (std::uint32_t p = 0; p < spec.points_per_instance; ++p, ++row) {
            const Vec3 pos = blob + Vec3{rng.normal(0.0, spec.blob_radius),
                                         rng.normal(0.0, spec.blob_radius),
                                         rng.normal(0.0, spec.blob_radius)};
            sum = sum + pos;
            push_point(pos,
                       base_color + Vec3{rng.normal(0.0, 0.04), rng.normal(0.0, 0.04), rng.normal(0.0, 0.04)},
                       unit_from(pos - blob), category, static_cast<std::int32_t>(inst));
            for (std::uint32_t d = 0; d < spec.feature_dim; ++d)
                pred.features(row, d) = base_feature[d] + rng.normal(0.0, spec.noise_sigma);
            for (std::uint32_t c = 0; c < k; ++c)
                pred.semantic_scores(row, c) =
                    (c == static_cast<std::uint32_t>(category) ? 1.0 - spec.noise_sigma : 0.0) +
                    spec.noise_sigma / k;
        }
        const Vec3 center = (1.0 / spec.points_per_instance) * sum;
        out.instance_centers.push_back(center);
        for (std::uint32_t p = 0; p < spec.points_per_instance; ++p) {
            const std::uint32_t r = first_row + p;
            const Vec3 target = center - scene.positions[r];
            for (int a = 0; a < 3; ++a)
                pred.offsets(r, a) = target[a] + rng.normal(0.0, spec.noise_sigma);
        }
    }

    // background clutter spans the whole layout
    const double lo = -spec.spacing, hi = spec.spacing * spec.instances;
    for (std::uint32_t b = 0; b < spec.background_points; ++b, ++row) {
        const Vec3 pos{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
        push_point(pos, Vec3{0.5 + rng.normal(0.0, 0.02), 0.5 + rng.normal(0.0, 0.02), 0.5 + rng.normal(0.0, 0.02)},
                   unit_from(Vec3{rng.normal(), rng.normal(), rng.normal()}), 0, kNoInstance);
        for (std::uint32_t d = 0; d < spec.feature_dim; ++d)
            pred.features(row, d) = rng.normal(0.0, 0.1);
        for (std::uint32_t c = 0; c < k; ++c)
            pred.semantic_scores(row, c) = (c == 0 ? 1.0 - spec.noise_sigma : 0.0) + spec.noise_sigma / k;
        for (int a = 0; a < 3; ++a) pred.offsets(row, a) = rng.normal(0.0, spec.noise_sigma);
    }

    scene.validate();
    pred.validate(scene.size());
    return out;
}

// Per-point mask and target centers for the offset loss, straight from gt.
inline std::pair<std::vector<Vec3>, std::vector<bool>> gt_centers_per_point(const Scene& scene) {
    if (!scene.has_instance_gt()) fail(Err::MissingGroundTruth, "scene has no gt_instance");
    std::vector<Vec3> centers(scene.num_instances, Vec3{0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(scene.num_instances, 0);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto j = scene.gt_instance[i];
        if (j == kNoInstance) continue;
        centers[static_cast<std::size_t>(j)] = centers[static_cast<std::size_t>(j)] + scene.positions[i];
        ++counts[static_cast<std::size_t>(j)];
    }
    for (std::size_t j = 0; j < centers.size(); ++j)
        if (counts[j]) centers[j] = (1.0 / static_cast<double>(counts[j])) * centers[j];

    std::vector<Vec3> per_point(scene.size(), Vec3{0.0, 0.0, 0.0});
    std::vector<bool> mask(scene.size(), false);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto j = scene.gt_instance[i];
        if (j == kNoInstance) continue;
        per_point[i] = centers[static_cast<std::size_t>(j)];
        mask[i] = true;
    }
    return {std::move(per_point), std::move(mask)};
}

} // namespace sst
