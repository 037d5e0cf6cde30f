#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <set>
#include <vector>

#include "sst/error.hpp"
#include "sst/types.hpp"

namespace sst {

// Average-pool point predictions into superpoint-level (f, a, o). Pooled a is
// renormalized onto the exact simplex to absorb float drift.
inline std::vector<Superpoint> pool_superpoints(const SuperpointAssignment& assignment,
                                                const PointPredictions& predictions) {
    if (assignment.labels.size() != predictions.size())
        fail(Err::DimensionMismatch, "assignment N != predictions N");
    const std::size_t fdim = predictions.feature_dim();
    const std::size_t k = predictions.num_categories();

    std::vector<Superpoint> sps(assignment.count);
    for (std::uint32_t m = 0; m < assignment.count; ++m) {
        sps[m].id = m;
        sps[m].feature.assign(fdim, 0.0);
        sps[m].semantic.assign(k, 0.0);
    }
    for (std::uint32_t i = 0; i < assignment.labels.size(); ++i)
        sps[assignment.labels[i]].point_indices.push_back(i);

    for (auto& sp : sps) {
        assert(!sp.point_indices.empty() && "assignment invariant: no empty superpoints");
        const double inv = 1.0 / static_cast<double>(sp.size());
        for (auto idx : sp.point_indices) {
            for (std::size_t d = 0; d < fdim; ++d) sp.feature[d] += predictions.features(idx, d);
            for (std::size_t c = 0; c < k; ++c) sp.semantic[c] += predictions.semantic_scores(idx, c);
            for (int a = 0; a < 3; ++a) sp.offset[a] += predictions.offsets(idx, a);
        }
        for (auto& v : sp.feature) v *= inv;
        for (auto& v : sp.semantic) v *= inv;
        sp.offset = inv * sp.offset;
        double sum = 0.0;
        for (double v : sp.semantic) sum += v;
        if (sum > 0.0)
            for (auto& v : sp.semantic) v /= sum;
    }
    return sps;
}

// c_P = o + mean of member positions
inline Vec3 compute_center(Superpoint& sp, const Scene& scene) {
    assert(!sp.point_indices.empty());
    Vec3 mean{0.0, 0.0, 0.0};
    for (auto idx : sp.point_indices) mean = mean + scene.positions[idx];
    mean = (1.0 / static_cast<double>(sp.size())) * mean;
    sp.center = sp.offset + mean;
    return sp.center;
}

inline void compute_centers(std::vector<Superpoint>& sps, const Scene& scene) {
    for (auto& sp : sps) compute_center(sp, scene);
}

inline std::size_t argmax_category(const std::vector<double>& semantic) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < semantic.size(); ++c)
        if (semantic[c] > semantic[best]) best = c;  // ties keep the lowest id
    return best;
}

// A superpoint is background iff argmax(a) lands in background_ids.
inline std::pair<std::vector<Superpoint>, std::vector<Superpoint>> filter_foreground(
    const std::vector<Superpoint>& sps, const std::set<std::int32_t>& background_ids) {
    std::vector<Superpoint> foreground, background;
    for (const auto& sp : sps) {
        const auto cat = static_cast<std::int32_t>(argmax_category(sp.semantic));
        (background_ids.count(cat) ? background : foreground).push_back(sp);
    }
    return {std::move(foreground), std::move(background)};
}

// q*[j] = fraction of member points on ground-truth instance j; mass on
// unlabeled points is left implicit (components sum to <= 1).
inline void compute_soft_labels(std::vector<Superpoint>& sps, const Scene& scene) {
    if (!scene.has_instance_gt()) fail(Err::MissingGroundTruth, "scene has no gt_instance");
    for (auto& sp : sps) {
        sp.soft_label.assign(scene.num_instances, 0.0);
        for (auto idx : sp.point_indices) {
            const auto j = scene.gt_instance[idx];
            if (j != kNoInstance) sp.soft_label[static_cast<std::size_t>(j)] += 1.0;
        }
        for (auto& v : sp.soft_label) v /= static_cast<double>(sp.size());
    }
}

} // namespace sst
