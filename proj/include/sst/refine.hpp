#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sst/error.hpp"
#include "sst/mlp.hpp"
#include "sst/proposer.hpp"
#include "sst/tree.hpp"

namespace sst {

// Star graph over a proposed branch: row 0 is the branch node t, rows 1..M_t
// its leaf superpoints; t connects to every leaf, leaves are not adjacent.
struct Clique {
    Mat node_features;               // (M_t+1) x (n+K+3)
    Mat adjacency;                   // (M_t+1)^2, 0/1, zero diagonal
    std::vector<std::uint32_t> leaf_nodes;  // tree node ids of rows 1..M_t

    std::size_t leaf_count() const { return leaf_nodes.size(); }
};

inline Clique build_clique(const SSTree& tree, const Proposal& proposal,
                           const std::vector<std::vector<double>>& features) {
    if (features.size() != tree.nodes.size()) fail(Err::MissingFeature, "feature table incomplete");
    if (proposal.superpoint_ids.empty()) fail(Err::EmptyProposal, "proposal has no superpoints");
    Clique clique;
    clique.leaf_nodes = branch_leaf_nodes(tree, proposal.node_id);
    const std::size_t r = clique.leaf_nodes.size() + 1;
    const std::size_t d = features[static_cast<std::size_t>(proposal.node_id)].size();
    clique.node_features = Mat(r, d);
    clique.adjacency = Mat(r, r);
    const auto& hub = features[static_cast<std::size_t>(proposal.node_id)];
    for (std::size_t j = 0; j < d; ++j) clique.node_features(0, j) = hub[j];
    for (std::size_t i = 0; i < clique.leaf_nodes.size(); ++i) {
        const auto& leaf = features[clique.leaf_nodes[i]];
        for (std::size_t j = 0; j < d; ++j) clique.node_features(i + 1, j) = leaf[j];
        clique.adjacency(0, i + 1) = 1.0;
        clique.adjacency(i + 1, 0) = 1.0;
    }
    return clique;
}

// One symmetric-normalized graph convolution with rows-as-nodes:
//   act(D^{-1/2} (A + I) D^{-1/2} F W + 1 b^T)
// D is the degree matrix of A + I. Bias may be empty.
inline Mat gcn_layer(const Mat& features, const Mat& adjacency, const Mat& weight,
                     const std::vector<double>& bias, Activation activation) {
    const std::size_t r = features.rows;
    if (adjacency.rows != r || adjacency.cols != r)
        fail(Err::ShapeMismatch, "adjacency must be RxR for R feature rows");
    if (weight.rows != features.cols)
        fail(Err::ShapeMismatch, "weight rows " + std::to_string(weight.rows) + " != feature dim " +
                                     std::to_string(features.cols));
    if (!bias.empty() && bias.size() != weight.cols) fail(Err::ShapeMismatch, "bias length != out dim");

    std::vector<double> inv_sqrt_deg(r);
    for (std::size_t i = 0; i < r; ++i) {
        double deg = 1.0;  // self loop
        for (std::size_t j = 0; j < r; ++j) deg += adjacency(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    Mat mixed(r, features.cols);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            const double a = (i == j ? 1.0 : adjacency(i, j));
            if (a == 0.0) continue;
            const double coeff = a * inv_sqrt_deg[i] * inv_sqrt_deg[j];
            for (std::size_t d = 0; d < features.cols; ++d) mixed(i, d) += coeff * features(j, d);
        }
    }
    Mat out = matmul(mixed, weight);
    if (!bias.empty())
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += bias[j];
    apply_activation(out, activation);
    return out;
}

// Three-layer CliqueNet psi; the stack must chain from the node feature width
// down to a single sigmoid score per node.
inline std::vector<double> cliquenet_forward(const Clique& clique, const ClassifierWeights& weights) {
    weights.validate();
    if (weights.layers.empty() || weights.layers.back().activation != Activation::Sigmoid)
        fail(Err::BadConfig, "CliqueNet must end in a sigmoid layer");
    if (weights.output_dim() != 1) fail(Err::ShapeMismatch, "CliqueNet must output one score per node");
    if (weights.input_dim() != clique.node_features.cols)
        fail(Err::ShapeMismatch, "CliqueNet input dim " + std::to_string(weights.input_dim()) +
                                     " != clique feature dim " + std::to_string(clique.node_features.cols));
    Mat h = clique.node_features;
    for (const auto& layer : weights.layers)
        h = gcn_layer(h, clique.adjacency, layer.weight, layer.bias, layer.activation);
    std::vector<double> scores(h.rows);
    for (std::size_t i = 0; i < h.rows; ++i) scores[i] = h(i, 0);
    return scores;
}

// Drop leaf superpoints scoring below the threshold (the hub score, row 0, is
// ignored). A proposal is never emptied: if everything falls below, the
// top-scoring leaf survives.
inline Proposal prune(const Proposal& proposal, const Clique& clique,
                      const std::vector<double>& scores, const SSTree& tree,
                      const std::vector<std::vector<std::uint32_t>>& leaf_points,
                      double threshold = 0.5) {
    if (scores.size() != clique.leaf_count() + 1)
        fail(Err::ShapeMismatch, "score count != M_t + 1");
    std::vector<std::uint32_t> kept;
    for (std::size_t i = 0; i < clique.leaf_count(); ++i)
        if (scores[i + 1] >= threshold) kept.push_back(clique.leaf_nodes[i]);
    if (kept.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < clique.leaf_count(); ++i)
            if (scores[i + 1] > scores[best + 1]) best = i;
        kept.push_back(clique.leaf_nodes[best]);
    }
    Proposal refined = proposal;
    refined.superpoint_ids.clear();
    refined.point_indices.clear();
    for (const auto leaf : kept) {
        refined.superpoint_ids.push_back(
            static_cast<std::uint32_t>(tree.nodes[leaf].leaf_superpoint));
        const auto& pts = leaf_points[leaf];
        refined.point_indices.insert(refined.point_indices.end(), pts.begin(), pts.end());
    }
    std::sort(refined.point_indices.begin(), refined.point_indices.end());
    return refined;
}

// Refining loss over the branch's leaves:
//   1/M_t sum_i BCE(score_i, q*_t . q*_{P_i})
inline double refining_loss(const Clique& clique, const std::vector<double>& scores,
                            const std::vector<double>& hub_soft_label,
                            const std::vector<std::vector<double>>& leaf_soft_labels) {
    if (scores.size() != clique.leaf_count() + 1)
        fail(Err::ShapeMismatch, "score count != M_t + 1");
    if (hub_soft_label.empty() || leaf_soft_labels.size() != clique.leaf_count())
        fail(Err::MissingSoftLabels, "refining loss needs q* for the hub and every leaf");
    double total = 0.0;
    for (std::size_t i = 0; i < clique.leaf_count(); ++i) {
        const auto& q = leaf_soft_labels[i];
        if (q.empty()) fail(Err::MissingSoftLabels, "leaf " + std::to_string(i));
        double target = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) target += hub_soft_label[j] * q[j];
        total += binary_cross_entropy(scores[i + 1], target);
    }
    return total / static_cast<double>(clique.leaf_count());
}

} // namespace sst
