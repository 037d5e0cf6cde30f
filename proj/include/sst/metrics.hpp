#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sst/error.hpp"
#include "sst/linalg.hpp"
#include "sst/tree.hpp"
#include "sst/types.hpp"

namespace sst {

// Cross-entropy plus dice term over per-point semantic scores:
//   1/N sum CE(a_i, a*_i) + 1 - 2 sum a.a* / (sum a.a + sum a*.a*)
// gt rows are one-hot.
inline double semantic_loss(const Mat& pred, const Mat& gt_one_hot) {
    if (pred.rows != gt_one_hot.rows || pred.cols != gt_one_hot.cols)
        fail(Err::LengthMismatch, "prediction and ground-truth shapes differ");
    if (pred.rows == 0) fail(Err::LengthMismatch, "no points");
    double ce = 0.0, cross = 0.0, pred_sq = 0.0, gt_sq = 0.0;
    for (std::size_t i = 0; i < pred.rows; ++i) {
        for (std::size_t k = 0; k < pred.cols; ++k) {
            const double p = pred(i, k);
            const double y = gt_one_hot(i, k);
            if (y > 0.0) ce -= y * std::log(clamp_prob(p));
            cross += p * y;
            pred_sq += p * p;
            gt_sq += y * y;
        }
    }
    const double dice = 1.0 - 2.0 * cross / (pred_sq + gt_sq);
    return ce / static_cast<double>(pred.rows) + dice;
}

// Distance plus (negated) cosine alignment of predicted offsets against the
// true center displacements, restricted to masked points. Zero-norm vectors
// skip the cosine term.
inline double offset_loss(const Mat& offsets, const std::vector<Vec3>& positions,
                          const std::vector<Vec3>& gt_centers, const std::vector<bool>& mask) {
    const std::size_t n = positions.size();
    if (offsets.rows != n || gt_centers.size() != n || mask.size() != n)
        fail(Err::LengthMismatch, "offset loss inputs disagree on N");
    std::size_t masked = 0;
    double dist_term = 0.0, cos_term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        ++masked;
        const Vec3 pred{offsets(i, 0), offsets(i, 1), offsets(i, 2)};
        const Vec3 target = gt_centers[i] - positions[i];
        dist_term += norm(pred - target);
        const double np = norm(pred), nt = norm(target);
        if (np > 0.0 && nt > 0.0) cos_term += dot(pred, target) / (np * nt);
    }
    if (masked == 0) fail(Err::NoForegroundPoints, "mask selects no points");
    return (dist_term - cos_term) / static_cast<double>(masked);
}

// Mean BCE of proposal scores against their IoU-derived labels.
inline double evaluation_loss(const std::vector<double>& scores, const std::vector<double>& labels) {
    if (scores.size() != labels.size()) fail(Err::LengthMismatch, "score and label counts differ");
    if (scores.empty()) fail(Err::EmptyProposalSet, "no proposals to evaluate");
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) total += binary_cross_entropy(scores[i], labels[i]);
    return total / static_cast<double>(scores.size());
}

inline double set_iou(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    // both sorted
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else { ++inter; ++i; ++j; }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::vector<std::vector<std::uint32_t>> gt_instance_point_sets(const Scene& scene) {
    if (!scene.has_instance_gt()) fail(Err::MissingGroundTruth, "scene has no gt_instance");
    std::vector<std::vector<std::uint32_t>> sets(scene.num_instances);
    for (std::uint32_t i = 0; i < scene.size(); ++i) {
        const auto j = scene.gt_instance[i];
        if (j != kNoInstance) sets[static_cast<std::size_t>(j)].push_back(i);
    }
    return sets;
}

// v* maps the best IoU against ground truth through a linear ramp with knees
// at 0.25 and 0.75.
inline double proposal_label(const Proposal& proposal,
                             const std::vector<std::vector<std::uint32_t>>& gt_sets) {
    if (gt_sets.empty()) fail(Err::MissingGroundTruth, "no ground-truth instances");
    double best = 0.0;
    for (const auto& gt : gt_sets) best = std::max(best, set_iou(proposal.point_indices, gt));
    return std::clamp((best - 0.25) / 0.5, 0.0, 1.0);
}

// ScoreNet stand-in: semantic certainty of the proposal's tree node.
inline double heuristic_score(const Proposal& proposal, const SSTree& tree) {
    const auto& node = tree.nodes.at(static_cast<std::size_t>(proposal.node_id));
    double best = 0.0;
    for (double v : node.semantic) best = std::max(best, v);
    return best;
}

// ---------------------------------------------------------------------------
// ScanNet-style average precision

struct EvalConfig {
    // thresholds for the headline mAP; AP@50 / AP@25 are always reported too
    std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    std::set<std::int32_t> categories;  // empty = every category present in gt

    void validate() const {
        double prev = 0.0;
        for (double t : iou_thresholds) {
            if (t <= prev || t >= 1.0) fail(Err::BadConfig, "iou thresholds must be increasing in (0,1)");
            prev = t;
        }
    }
};

struct CategoryAp {
    std::int32_t category = 0;
    double ap = 0.0;    // mean over EvalConfig thresholds
    double ap50 = 0.0;
    double ap25 = 0.0;
};

struct EvalReport {
    double map = 0.0;
    double ap50 = 0.0;
    double ap25 = 0.0;
    std::vector<CategoryAp> per_category;
};

namespace detail {

// All-point interpolated AP from a confidence-ranked TP/FP sequence: area
// under the precision envelope.
inline double average_precision(const std::vector<bool>& is_tp, std::size_t num_gt) {
    if (num_gt == 0) return 0.0;
    std::vector<double> precision, recall;
    std::size_t tp = 0, fp = 0;
    for (const bool hit : is_tp) {
        hit ? ++tp : ++fp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    }
    double ap = 0.0, prev_recall = 0.0, envelope = 0.0;
    // right-to-left precision envelope, then sum rectangle areas left-to-right
    std::vector<double> env(precision.size());
    for (std::size_t i = precision.size(); i-- > 0;) {
        envelope = std::max(envelope, precision[i]);
        env[i] = envelope;
    }
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * env[i];
        prev_recall = recall[i];
    }
    return ap;
}

struct GtInstance {
    std::int32_t category = 0;
    std::vector<std::uint32_t> points;
};

inline std::vector<GtInstance> collect_gt_instances(const Scene& scene) {
    if (!scene.has_instance_gt() || !scene.has_semantic_gt())
        fail(Err::MissingGroundTruth, "evaluation needs semantic and instance ground truth");
    const auto sets = gt_instance_point_sets(scene);
    std::vector<GtInstance> out;
    for (const auto& pts : sets) {
        if (pts.empty()) continue;
        // instance category by majority vote of member semantics, ties -> lowest id
        std::map<std::int32_t, std::size_t> votes;
        for (auto idx : pts) ++votes[scene.gt_semantic[idx]];
        std::int32_t cat = votes.begin()->first;
        std::size_t best = votes.begin()->second;
        for (const auto& [c, n] : votes)
            if (n > best) { best = n; cat = c; }
        out.push_back({cat, pts});
    }
    return out;
}

} // namespace detail

// Greedy confidence-ordered matching per (category, threshold): a proposal is
// a true positive when its best unmatched same-category instance reaches the
// IoU threshold. AP averages over categories that have ground truth; ties in
// confidence break by proposal id so shuffled input reproduces one ranking.
inline EvalReport evaluate_map(const std::vector<Proposal>& proposals, const Scene& scene,
                               const EvalConfig& config = {}) {
    config.validate();
    const auto gts = detail::collect_gt_instances(scene);

    std::set<std::int32_t> categories = config.categories;
    if (categories.empty())
        for (const auto& gt : gts) categories.insert(gt.category);

    std::vector<std::size_t> order(proposals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (proposals[a].confidence != proposals[b].confidence)
            return proposals[a].confidence > proposals[b].confidence;
        if (proposals[a].node_id != proposals[b].node_id)
            return proposals[a].node_id < proposals[b].node_id;
        return a < b;
    });

    std::vector<double> thresholds = config.iou_thresholds;
    for (double extra : {0.25, 0.50})
        if (std::find(thresholds.begin(), thresholds.end(), extra) == thresholds.end())
            thresholds.push_back(extra);

    EvalReport report;
    double map_sum = 0.0, ap50_sum = 0.0, ap25_sum = 0.0;
    for (const auto category : categories) {
        std::vector<std::size_t> gt_ids;
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (gts[g].category == category) gt_ids.push_back(g);
        if (gt_ids.empty()) continue;

        CategoryAp cat_ap;
        cat_ap.category = category;
        std::map<double, double> ap_at;
        for (const double thr : thresholds) {
            std::vector<bool> matched(gt_ids.size(), false);
            std::vector<bool> is_tp;
            for (const auto pi : order) {
                const auto& prop = proposals[pi];
                if (prop.category != category) continue;
                double best_iou = 0.0;
                std::size_t best_g = gt_ids.size();
                for (std::size_t g = 0; g < gt_ids.size(); ++g) {
                    if (matched[g]) continue;
                    const double iou = set_iou(prop.point_indices, gts[gt_ids[g]].points);
                    if (iou > best_iou) { best_iou = iou; best_g = g; }
                }
                if (best_g < gt_ids.size() && best_iou >= thr) {
                    matched[best_g] = true;
                    is_tp.push_back(true);
                } else {
                    is_tp.push_back(false);
                }
            }
            ap_at[thr] = detail::average_precision(is_tp, gt_ids.size());
        }
        double mean = 0.0;
        for (const double thr : config.iou_thresholds) mean += ap_at[thr];
        cat_ap.ap = mean / static_cast<double>(config.iou_thresholds.size());
        cat_ap.ap50 = ap_at[0.50];
        cat_ap.ap25 = ap_at[0.25];
        report.per_category.push_back(cat_ap);
        map_sum += cat_ap.ap;
        ap50_sum += cat_ap.ap50;
        ap25_sum += cat_ap.ap25;
    }
    if (!report.per_category.empty()) {
        const auto c = static_cast<double>(report.per_category.size());
        report.map = map_sum / c;
        report.ap50 = ap50_sum / c;
        report.ap25 = ap25_sum / c;
    }
    return report;
}

} // namespace sst
