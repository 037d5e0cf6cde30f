#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <vector>

#include "sst/error.hpp"
#include "sst/mlp.hpp"
#include "sst/superpool.hpp"
#include "sst/tree.hpp"
#include "sst/types.hpp"

namespace sst {

// f_dag = [f_t; a_t; c_t], one row per tree node, length n + K + 3.
inline std::vector<std::vector<double>> build_node_features(const SSTree& tree) {
    std::vector<std::vector<double>> features;
    features.reserve(tree.nodes.size());
    for (const auto& node : tree.nodes) {
        std::vector<double> f;
        f.reserve(node.feature.size() + node.augmented.size());
        f.insert(f.end(), node.feature.begin(), node.feature.end());
        f.insert(f.end(), node.augmented.begin(), node.augmented.end());
        features.push_back(std::move(f));
    }
    return features;
}

// Split decision on a pair of child node features; output strictly inside (0,1).
class SplitClassifier {
public:
    virtual ~SplitClassifier() = default;
    virtual double decide(const std::vector<double>& f1, const std::vector<double>& f2) const = 0;
};

// SST-Thresholding: keep the branch together when |a_dag_1 - a_dag_2| <= theta.
// Operates on the trailing K+3 block of the node feature.
class ThresholdClassifier : public SplitClassifier {
public:
    ThresholdClassifier(double theta, std::size_t augmented_dim)
        : theta_(theta), aug_dim_(augmented_dim) {}

    double decide(const std::vector<double>& f1, const std::vector<double>& f2) const override {
        if (f1.size() < aug_dim_ || f2.size() < aug_dim_)
            fail(Err::ShapeMismatch, "feature shorter than augmented block");
        double d2 = 0.0;
        for (std::size_t i = 0; i < aug_dim_; ++i) {
            const double d = f1[f1.size() - aug_dim_ + i] - f2[f2.size() - aug_dim_ + i];
            d2 += d * d;
        }
        return std::sqrt(d2) <= theta_ ? 1.0 - kDecisionEps : kDecisionEps;
    }

    double theta() const { return theta_; }

    static constexpr double kDecisionEps = 1e-6;

private:
    double theta_;
    std::size_t aug_dim_;
};

// MLP phi on the ordered concatenation [f1; f2]; with symmetric evaluation the
// two argument orders are averaged, matching the symmetric training loss.
class MlpClassifier : public SplitClassifier {
public:
    explicit MlpClassifier(ClassifierWeights weights, bool symmetric = true)
        : weights_(std::move(weights)), symmetric_(symmetric) {
        weights_.validate();
        if (weights_.layers.empty() || weights_.layers.back().activation != Activation::Sigmoid)
            fail(Err::BadConfig, "split classifier must end in a sigmoid layer");
        if (weights_.output_dim() != 1) fail(Err::ShapeMismatch, "split classifier must output a scalar");
    }

    double decide(const std::vector<double>& f1, const std::vector<double>& f2) const override {
        const double p = forward(f1, f2);
        if (!symmetric_) return p;
        return 0.5 * (p + forward(f2, f1));
    }

private:
    double forward(const std::vector<double>& f1, const std::vector<double>& f2) const {
        std::vector<double> input;
        input.reserve(f1.size() + f2.size());
        input.insert(input.end(), f1.begin(), f1.end());
        input.insert(input.end(), f2.begin(), f2.end());
        return mlp_forward(weights_, input)[0];
    }

    ClassifierWeights weights_;
    bool symmetric_;
};

struct ConstantClassifier : SplitClassifier {
    explicit ConstantClassifier(double value) : value_(value) {}
    double decide(const std::vector<double>&, const std::vector<double>&) const override { return value_; }
    double value_;
};

// Breadth-first traversal with node splitting. At an internal node t with
// children s1, s2: phi(f_s1, f_s2) >= 0.5 emits the branch B_t and stops
// descending, otherwise both children are enqueued. Leaves reaching the queue
// become singleton proposals, so the output always partitions the leaves.
// Point indices are left empty; see materialize_points.
inline std::vector<Proposal> traverse_and_split(const SSTree& tree,
                                                const std::vector<std::vector<double>>& features,
                                                const SplitClassifier& classifier) {
    if (tree.empty()) fail(Err::InvalidNode, "cannot traverse an empty tree");
    if (features.size() != tree.nodes.size())
        fail(Err::MissingFeature, "feature table covers " + std::to_string(features.size()) + " of " +
                                      std::to_string(tree.nodes.size()) + " nodes");
    std::vector<Proposal> proposals;
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(tree.root)};
    while (!queue.empty()) {
        const std::uint32_t t = queue.front();
        queue.pop_front();
        const TreeNode& node = tree.nodes[t];
        bool emit = node.is_leaf();
        if (!emit) {
            const auto s1 = static_cast<std::uint32_t>(node.left);
            const auto s2 = static_cast<std::uint32_t>(node.right);
            if (classifier.decide(features[s1], features[s2]) >= 0.5) {
                emit = true;
            } else {
                queue.push_back(s1);
                queue.push_back(s2);
            }
        }
        if (emit) {
            Proposal p;
            p.node_id = static_cast<std::int32_t>(t);
            p.superpoint_ids = branch_leaves(tree, p.node_id);
            p.category = static_cast<std::int32_t>(argmax_category(node.semantic));
            proposals.push_back(std::move(p));
        }
    }
    return proposals;
}

// Flatten each proposal's branch into sorted point indices. leaf_points is
// indexed by leaf node id (0..M-1), e.g. foreground superpoints in builder
// order or TreeFile::leaf_points.
inline void materialize_points(std::vector<Proposal>& proposals, const SSTree& tree,
                               const std::vector<std::vector<std::uint32_t>>& leaf_points) {
    if (leaf_points.size() != tree.num_leaves)
        fail(Err::DimensionMismatch, "leaf point table does not match tree");
    for (auto& p : proposals) {
        p.point_indices.clear();
        for (const auto leaf : branch_leaf_nodes(tree, p.node_id)) {
            const auto& pts = leaf_points[leaf];
            p.point_indices.insert(p.point_indices.end(), pts.begin(), pts.end());
        }
        std::sort(p.point_indices.begin(), p.point_indices.end());
    }
}

inline std::vector<std::vector<std::uint32_t>> leaf_point_table(const std::vector<Superpoint>& sps) {
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(sps.size());
    for (const auto& sp : sps) out.push_back(sp.point_indices);
    return out;
}

inline std::vector<Proposal> filter_min_size(std::vector<Proposal> proposals, std::size_t min_points) {
    std::erase_if(proposals, [&](const Proposal& p) { return p.point_indices.size() < min_points; });
    return proposals;
}

// target(t) = q*_s1 . q*_s2, the soft same-instance indicator; NaN on leaves.
inline std::vector<double> make_ground_truth_targets(const SSTree& tree) {
    std::vector<double> targets(tree.nodes.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < tree.nodes.size(); ++t) {
        const TreeNode& node = tree.nodes[t];
        if (node.is_leaf()) continue;
        const auto& q1 = tree.nodes[static_cast<std::size_t>(node.left)].soft_label;
        const auto& q2 = tree.nodes[static_cast<std::size_t>(node.right)].soft_label;
        if (q1.empty() || q2.empty()) fail(Err::MissingSoftLabels, "node " + std::to_string(t));
        double y = 0.0;
        for (std::size_t j = 0; j < q1.size(); ++j) y += q1[j] * q2[j];
        targets[t] = y;
    }
    return targets;
}

// Symmetric splitting loss over internal nodes:
//   mean_t 1/2 [BCE(phi(f1,f2), y_t) + BCE(phi(f2,f1), y_t)],  y_t = q*_s1 . q*_s2
inline double splitting_loss(const SSTree& tree, const std::vector<std::vector<double>>& features,
                             const SplitClassifier& classifier) {
    if (features.size() != tree.nodes.size()) fail(Err::MissingFeature, "feature table incomplete");
    const auto targets = make_ground_truth_targets(tree);
    double total = 0.0;
    std::size_t internal = 0;
    for (std::size_t t = 0; t < tree.nodes.size(); ++t) {
        const TreeNode& node = tree.nodes[t];
        if (node.is_leaf()) continue;
        const auto& f1 = features[static_cast<std::size_t>(node.left)];
        const auto& f2 = features[static_cast<std::size_t>(node.right)];
        total += 0.5 * (binary_cross_entropy(classifier.decide(f1, f2), targets[t]) +
                        binary_cross_entropy(classifier.decide(f2, f1), targets[t]));
        ++internal;
    }
    return internal == 0 ? 0.0 : total / static_cast<double>(internal);
}

} // namespace sst
