#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "sst/error.hpp"
#include "sst/io.hpp"
#include "sst/superpool.hpp"
#include "sst/types.hpp"

namespace sst {

// Distance used for merge decisions. Features always inherit by size-weighted
// averaging; the linkage only selects which pair merges next.
//
//   WardLike  d(A,B) = (m_A m_B / (m_A + m_B)) * |aug_A - aug_B|^2
//             Reducible, so nearest-neighbor chain reproduces the greedy
//             global-minimum dendrogram exactly (ties aside).
//   Centroid  d(A,B) = |aug_A - aug_B|
//             The literal reading of the augmented-score metric. Not
//             reducible; chain and naive construction may disagree.
enum class Linkage { WardLike, Centroid };

struct TreeNode {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t size = 0;               // member point count
    std::vector<double> feature;          // f_t
    std::vector<double> semantic;         // a_t
    Vec3 offset{0.0, 0.0, 0.0};           // o_t
    Vec3 center{0.0, 0.0, 0.0};
    std::vector<double> augmented;        // [a_t; center], K+3
    std::vector<double> soft_label;       // q_t*, empty when gt absent
    std::int32_t leaf_superpoint = -1;    // original superpoint id, leaves only
    std::uint32_t leaf_begin = 0;         // interval into SSTree::leaf_order
    std::uint32_t leaf_end = 0;

    bool is_leaf() const { return left < 0; }
};

struct MergeRecord {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double distance = 0.0;
};

struct SSTree {
    std::vector<TreeNode> nodes;           // leaves 0..M-1, internals appended
    std::int32_t root = -1;
    std::uint32_t num_leaves = 0;
    std::vector<MergeRecord> merge_order;
    std::vector<std::uint32_t> leaf_order; // leaf node ids in Euler (DFS) order

    bool empty() const { return nodes.empty(); }
};

// a_dag = [a; c_P] with unit weights on both blocks
inline std::vector<double> augment_score(const std::vector<double>& semantic, const Vec3& center) {
    std::vector<double> out;
    out.reserve(semantic.size() + 3);
    out.insert(out.end(), semantic.begin(), semantic.end());
    out.insert(out.end(), center.begin(), center.end());
    return out;
}

namespace detail {

inline std::vector<double> weighted_mean(const std::vector<double>& a, const std::vector<double>& b,
                                         double wa, double wb) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = wa * a[i] + wb * b[i];
    return out;
}

} // namespace detail

// Size-weighted inheritance of all node attributes, then a_dag recomputed
// from the merged score and center.
inline TreeNode merge_nodes(const TreeNode& a, const TreeNode& b) {
    TreeNode t;
    t.size = a.size + b.size;
    const double wa = static_cast<double>(a.size) / static_cast<double>(t.size);
    const double wb = static_cast<double>(b.size) / static_cast<double>(t.size);
    t.feature = detail::weighted_mean(a.feature, b.feature, wa, wb);
    t.semantic = detail::weighted_mean(a.semantic, b.semantic, wa, wb);
    t.offset = wa * a.offset + wb * b.offset;
    t.center = wa * a.center + wb * b.center;
    t.augmented = augment_score(t.semantic, t.center);
    if (!a.soft_label.empty() && !b.soft_label.empty())
        t.soft_label = detail::weighted_mean(a.soft_label, b.soft_label, wa, wb);
    return t;
}

inline double cluster_distance(const TreeNode& a, const TreeNode& b, Linkage linkage) {
    const double d2 = squared_dist(a.augmented, b.augmented);
    if (linkage == Linkage::Centroid) return std::sqrt(d2);
    const double ma = a.size, mb = b.size;
    return ma * mb / (ma + mb) * d2;
}

namespace detail {

inline SSTree make_leaves(const std::vector<Superpoint>& sps) {
    SSTree tree;
    tree.num_leaves = static_cast<std::uint32_t>(sps.size());
    tree.nodes.reserve(sps.empty() ? 0 : 2 * sps.size() - 1);
    for (const auto& sp : sps) {
        TreeNode leaf;
        leaf.size = static_cast<std::uint32_t>(sp.size());
        leaf.feature = sp.feature;
        leaf.semantic = sp.semantic;
        leaf.offset = sp.offset;
        leaf.center = sp.center;
        leaf.augmented = augment_score(sp.semantic, sp.center);
        leaf.soft_label = sp.soft_label;
        leaf.leaf_superpoint = static_cast<std::int32_t>(sp.id);
        tree.nodes.push_back(std::move(leaf));
    }
    return tree;
}

inline std::uint32_t append_merge(SSTree& tree, std::uint32_t a, std::uint32_t b, double dist) {
    TreeNode t = merge_nodes(tree.nodes[a], tree.nodes[b]);
    t.left = static_cast<std::int32_t>(a);
    t.right = static_cast<std::int32_t>(b);
    tree.nodes.push_back(std::move(t));
    tree.merge_order.push_back({a, b, dist});
    return static_cast<std::uint32_t>(tree.nodes.size() - 1);
}

// Euler leaf intervals: every node owns a contiguous slice of leaf_order, so
// branch retrieval is O(output).
inline void index_leaf_intervals(SSTree& tree) {
    tree.leaf_order.clear();
    if (tree.empty()) return;
    tree.leaf_order.reserve(tree.num_leaves);
    std::vector<std::pair<std::uint32_t, bool>> stack;  // (node, expanded)
    stack.push_back({static_cast<std::uint32_t>(tree.root), false});
    while (!stack.empty()) {
        auto [id, expanded] = stack.back();
        stack.pop_back();
        TreeNode& node = tree.nodes[id];
        if (expanded) {
            node.leaf_end = static_cast<std::uint32_t>(tree.leaf_order.size());
            continue;
        }
        node.leaf_begin = static_cast<std::uint32_t>(tree.leaf_order.size());
        if (node.is_leaf()) {
            tree.leaf_order.push_back(id);
            node.leaf_end = node.leaf_begin + 1;
            continue;
        }
        stack.push_back({id, true});
        stack.push_back({static_cast<std::uint32_t>(node.right), false});
        stack.push_back({static_cast<std::uint32_t>(node.left), false});
    }
}

} // namespace detail

// Greedy global-minimum agglomeration, O(M^3). Kept as the reference oracle;
// equidistant pairs resolve to the lowest (min id, max id).
inline SSTree build_naive(const std::vector<Superpoint>& sps, Linkage linkage = Linkage::WardLike) {
    SSTree tree = detail::make_leaves(sps);
    if (tree.num_leaves == 0) return tree;
    std::vector<std::uint32_t> active(tree.num_leaves);
    for (std::uint32_t i = 0; i < tree.num_leaves; ++i) active[i] = i;

    while (active.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i + 1 < active.size(); ++i)
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double d = cluster_distance(tree.nodes[active[i]], tree.nodes[active[j]], linkage);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        const std::uint32_t merged = detail::append_merge(tree, active[bi], active[bj], best);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(merged);
        std::sort(active.begin(), active.end());
    }
    tree.root = static_cast<std::int32_t>(active.front());
    detail::index_leaf_intervals(tree);
    return tree;
}

// Nearest-neighbor-chain agglomeration, O(M^2) time and O(M) chain space.
// Grows a chain of nearest neighbors until a reciprocal pair appears, merges
// it, and keeps the remaining chain (valid under a reducible linkage). With
// the WardLike linkage and tie-free inputs this produces the same merge set
// as build_naive.
inline SSTree build_nn_chain(const std::vector<Superpoint>& sps, Linkage linkage = Linkage::WardLike) {
    SSTree tree = detail::make_leaves(sps);
    if (tree.num_leaves == 0) return tree;
    if (tree.num_leaves == 1) {
        tree.root = 0;
        detail::index_leaf_intervals(tree);
        return tree;
    }

    std::vector<std::uint32_t> active(tree.num_leaves);
    for (std::uint32_t i = 0; i < tree.num_leaves; ++i) active[i] = i;
    std::vector<std::uint32_t> chain;
    chain.reserve(tree.num_leaves);

    while (active.size() > 1) {
        if (chain.empty()) chain.push_back(active.front());
        const std::uint32_t top = chain.back();
        const std::uint32_t prev =
            chain.size() >= 2 ? chain[chain.size() - 2] : std::numeric_limits<std::uint32_t>::max();

        // nearest active cluster to `top`; the chain predecessor wins ties so
        // reciprocal pairs close, otherwise the lower id wins
        std::uint32_t nearest = top;
        double best = std::numeric_limits<double>::infinity();
        for (const std::uint32_t cand : active) {
            if (cand == top) continue;
            const double d = cluster_distance(tree.nodes[top], tree.nodes[cand], linkage);
            if (d < best || (d == best && cand == prev)) {
                best = d;
                nearest = cand;
            }
        }

        if (nearest == prev) {
            chain.pop_back();
            chain.pop_back();
            const std::uint32_t merged = detail::append_merge(tree, std::min(top, prev),
                                                              std::max(top, prev), best);
            active.erase(std::remove_if(active.begin(), active.end(),
                                        [&](std::uint32_t id) { return id == top || id == prev; }),
                         active.end());
            active.push_back(merged);
        } else {
            chain.push_back(nearest);
        }
    }
    tree.root = static_cast<std::int32_t>(active.front());
    detail::index_leaf_intervals(tree);
    return tree;
}

// Leaf superpoints under node t, O(output) via the precomputed intervals.
inline std::vector<std::uint32_t> branch_leaves(const SSTree& tree, std::int32_t t) {
    if (t < 0 || static_cast<std::size_t>(t) >= tree.nodes.size())
        fail(Err::InvalidNode, "node id " + std::to_string(t));
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(t)];
    std::vector<std::uint32_t> out;
    out.reserve(node.leaf_end - node.leaf_begin);
    for (std::uint32_t i = node.leaf_begin; i < node.leaf_end; ++i) {
        const TreeNode& leaf = tree.nodes[tree.leaf_order[i]];
        out.push_back(static_cast<std::uint32_t>(leaf.leaf_superpoint));
    }
    return out;
}

// Same interval walk but yielding leaf node ids.
inline std::vector<std::uint32_t> branch_leaf_nodes(const SSTree& tree, std::int32_t t) {
    if (t < 0 || static_cast<std::size_t>(t) >= tree.nodes.size())
        fail(Err::InvalidNode, "node id " + std::to_string(t));
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(t)];
    return std::vector<std::uint32_t>(tree.leaf_order.begin() + node.leaf_begin,
                                      tree.leaf_order.begin() + node.leaf_end);
}

inline std::uint32_t tree_depth(const SSTree& tree) {
    if (tree.empty()) return 0;
    std::uint32_t depth = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{static_cast<std::uint32_t>(tree.root), 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        depth = std::max(depth, d);
        const TreeNode& node = tree.nodes[id];
        if (!node.is_leaf()) {
            stack.push_back({static_cast<std::uint32_t>(node.left), d + 1});
            stack.push_back({static_cast<std::uint32_t>(node.right), d + 1});
        }
    }
    return depth;
}

// ---------------------------------------------------------------------------
// "SSTT" container: the node array plus per-leaf point indices, so proposal
// materialization downstream needs only this file.

struct TreeFile {
    SSTree tree;
    std::vector<std::vector<std::uint32_t>> leaf_points;  // indexed by leaf node id
    std::uint32_t scene_points = 0;   // N
    std::uint32_t num_categories = 0; // K
    std::uint32_t feature_dim = 0;    // n
    std::uint32_t num_instances = 0;  // J, 0 when soft labels absent
};

inline void save_tree(const std::string& path, const SSTree& tree,
                      const std::vector<Superpoint>& leaf_sps, std::uint32_t scene_points) {
    if (tree.num_leaves != leaf_sps.size())
        fail(Err::DimensionMismatch, "leaf superpoint list does not match tree");
    const std::uint32_t k = tree.empty() ? 0 : static_cast<std::uint32_t>(tree.nodes[0].semantic.size());
    const std::uint32_t fdim = tree.empty() ? 0 : static_cast<std::uint32_t>(tree.nodes[0].feature.size());
    const std::uint32_t j = tree.empty() || tree.nodes[0].soft_label.empty()
                                ? 0
                                : static_cast<std::uint32_t>(tree.nodes[0].soft_label.size());
    detail::BinWriter w(path);
    w.magic("SSTT");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    w.u32(tree.num_leaves);
    w.u32(scene_points);
    w.u32(k);
    w.u32(fdim);
    w.u32(j);
    w.i32(tree.root);
    for (const auto& node : tree.nodes) {
        w.i32(node.left);
        w.i32(node.right);
        w.u32(node.size);
        w.i32(node.leaf_superpoint);
        w.f32_col(node.feature);
        w.f32_col(node.semantic);
        for (double v : node.offset) w.f32(static_cast<float>(v));
        for (double v : node.center) w.f32(static_cast<float>(v));
        if (j > 0) w.f32_col(node.soft_label);
    }
    w.u32(static_cast<std::uint32_t>(tree.merge_order.size()));
    for (const auto& m : tree.merge_order) {
        w.u32(m.a);
        w.u32(m.b);
        w.f32(static_cast<float>(m.distance));
    }
    for (std::uint32_t leaf = 0; leaf < tree.num_leaves; ++leaf) {
        const auto& pts = leaf_sps[leaf].point_indices;
        w.u32(static_cast<std::uint32_t>(pts.size()));
        for (auto idx : pts) w.u32(idx);
    }
}

inline TreeFile load_tree(const std::string& path) {
    detail::BinReader r(path);
    r.expect_magic("SSTT", path);
    const std::uint32_t version = r.u32();
    if (version != 1) fail(Err::BadMagic, "unsupported SSTT version " + std::to_string(version));
    TreeFile out;
    const std::uint32_t node_count = r.u32();
    out.tree.num_leaves = r.u32();
    out.scene_points = r.u32();
    out.num_categories = r.u32();
    out.feature_dim = r.u32();
    out.num_instances = r.u32();
    out.tree.root = r.i32();
    out.tree.nodes.resize(node_count);
    for (auto& node : out.tree.nodes) {
        node.left = r.i32();
        node.right = r.i32();
        node.size = r.u32();
        node.leaf_superpoint = r.i32();
        node.feature = r.f32_col(out.feature_dim);
        node.semantic = r.f32_col(out.num_categories);
        const auto o = r.f32_col(3);
        node.offset = {o[0], o[1], o[2]};
        const auto c = r.f32_col(3);
        node.center = {c[0], c[1], c[2]};
        if (out.num_instances > 0) node.soft_label = r.f32_col(out.num_instances);
        node.augmented = augment_score(node.semantic, node.center);
    }
    const std::uint32_t merges = r.u32();
    out.tree.merge_order.resize(merges);
    for (auto& m : out.tree.merge_order) {
        m.a = r.u32();
        m.b = r.u32();
        m.distance = r.f32();
    }
    out.leaf_points.resize(out.tree.num_leaves);
    for (auto& pts : out.leaf_points) {
        const std::uint32_t len = r.u32();
        pts.resize(len);
        for (auto& idx : pts) {
            idx = r.u32();
            if (idx >= out.scene_points) fail(Err::IndexOutOfRange, "leaf point index");
        }
    }
    r.expect_eof(path);
    if (!out.tree.empty()) detail::index_leaf_intervals(out.tree);
    return out;
}

} // namespace sst
