#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sst/error.hpp"
#include "sst/kdtree.hpp"
#include "sst/types.hpp"

namespace sst {

struct Edge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;  // u < v
    double weight = 0.0;
};

struct WeightedGraph {
    std::vector<Edge> edges;
};

struct OversegmentParams {
    int k = 16;
    double tau = 0.01;
    std::uint32_t min_size = 30;
    double lambda_normal = 1.0;
    double lambda_color = 0.2;
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0u);
    }

    std::uint32_t find(std::uint32_t x) {
        std::uint32_t root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {  // path compression
            const std::uint32_t next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    // merges the smaller tree under the larger, returns the surviving root
    std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return a;
    }

    std::uint32_t component_size(std::uint32_t x) { return size_[find(x)]; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

// kNN graph over point positions; edge weight mixes normal disagreement and
// color distance: w = lambda_n * (1 - nu.nv) + lambda_c * |cu - cv|. Scenes
// without normals contribute only the color term. Undirected, deduplicated.
inline WeightedGraph build_knn_graph(const Scene& scene, int k,
                                     double lambda_normal = 1.0, double lambda_color = 0.2) {
    const std::size_t n = scene.size();
    if (n < 2) fail(Err::DegenerateScene, "kNN graph needs at least 2 points");
    if (k < 1) fail(Err::BadConfig, "k must be >= 1");

    const KdTree tree(scene.positions);
    std::vector<Edge> edges;
    edges.reserve(n * static_cast<std::size_t>(k));
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto nbrs = tree.nearest(scene.positions[i], static_cast<std::size_t>(k), i);
        for (const auto& nb : nbrs) {
            const std::uint32_t j = nb.index;
            const std::uint32_t u = std::min(i, j), v = std::max(i, j);
            double w = lambda_color * norm(scene.colors[u] - scene.colors[v]);
            if (scene.has_normals()) w += lambda_normal * (1.0 - dot(scene.normals[u], scene.normals[v]));
            edges.push_back({u, v, w});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
                edges.end());
    return {std::move(edges)};
}

inline bool is_connected(const WeightedGraph& graph, std::size_t n) {
    if (n == 0) return true;
    UnionFind uf(n);
    for (const auto& e : graph.edges) uf.unite(e.u, e.v);
    return uf.component_size(0) == n;
}

// Felzenszwalb-Huttenlocher segmentation. Edges are processed in ascending
// (weight, u, v) order; components a and b merge when
//   w <= min(Int(a) + tau/|a|, Int(b) + tau/|b|)
// with Int the largest edge weight merged inside a component so far. A second
// ascending pass then absorbs components smaller than min_size into the
// neighbor across their cheapest edge. Labels are relabeled contiguously in
// first-point order.
inline SuperpointAssignment segment_graph(const WeightedGraph& graph, double tau,
                                          std::uint32_t min_size, std::size_t n) {
    if (tau < 0.0) fail(Err::BadConfig, "tau must be >= 0");
    if (n == 0) fail(Err::DegenerateScene, "no points to segment");

    std::vector<const Edge*> order;
    order.reserve(graph.edges.size());
    for (const auto& e : graph.edges) {
        if (e.u == e.v || e.u >= n || e.v >= n) fail(Err::IndexOutOfRange, "bad edge endpoint");
        order.push_back(&e);
    }
    std::stable_sort(order.begin(), order.end(), [](const Edge* a, const Edge* b) {
        if (a->weight != b->weight) return a->weight < b->weight;
        if (a->u != b->u) return a->u < b->u;
        return a->v < b->v;
    });

    UnionFind uf(n);
    std::vector<double> internal(n, 0.0);  // Int(component), indexed by root
    for (const Edge* e : order) {
        const std::uint32_t a = uf.find(e->u);
        const std::uint32_t b = uf.find(e->v);
        if (a == b) continue;
        const double thresh_a = internal[a] + tau / uf.component_size(a);
        const double thresh_b = internal[b] + tau / uf.component_size(b);
        if (e->weight <= std::min(thresh_a, thresh_b)) {
            const std::uint32_t root = uf.unite(a, b);
            internal[root] = std::max({internal[a], internal[b], e->weight});
        }
    }

    if (min_size > 1) {
        for (const Edge* e : order) {
            const std::uint32_t a = uf.find(e->u);
            const std::uint32_t b = uf.find(e->v);
            if (a != b && (uf.component_size(a) < min_size || uf.component_size(b) < min_size))
                uf.unite(a, b);
        }
    }

    SuperpointAssignment out;
    out.labels.resize(n);
    std::vector<std::int64_t> remap(n, -1);
    std::uint32_t next = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t root = uf.find(i);
        if (remap[root] < 0) remap[root] = next++;
        out.labels[i] = static_cast<std::uint32_t>(remap[root]);
    }
    out.count = next;
    return out;
}

inline SuperpointAssignment oversegment_scene(const Scene& scene, const OversegmentParams& params) {
    const auto graph = build_knn_graph(scene, params.k, params.lambda_normal, params.lambda_color);
    return segment_graph(graph, params.tau, params.min_size, scene.size());
}

} // namespace sst
