#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sst/linalg.hpp"

namespace sst {

// Static 3D kd-tree over an externally owned point array. Median split on the
// widest axis, leaf buckets of 16. Queries break distance ties by point index
// so results are stable across runs.
class KdTree {
public:
    explicit KdTree(const std::vector<Vec3>& points) : points_(points) {
        index_.resize(points.size());
        std::iota(index_.begin(), index_.end(), 0u);
        nodes_.reserve(points.size() / kLeafSize * 2 + 1);
        if (!points.empty()) root_ = build(0, points.size());
    }

    struct Neighbor {
        double dist2;
        std::uint32_t index;
        bool operator<(const Neighbor& o) const {
            return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
        }
    };

    // k nearest neighbors of `query`, excluding `exclude` (pass the query's own
    // index for self-exclusion, or UINT32_MAX for none). Sorted nearest-first.
    std::vector<Neighbor> nearest(const Vec3& query, std::size_t k,
                                  std::uint32_t exclude = UINT32_MAX) const {
        std::vector<Neighbor> heap;  // max-heap on (dist2, index)
        heap.reserve(k + 1);
        if (root_ >= 0 && k > 0) search(root_, query, k, exclude, heap);
        std::sort_heap(heap.begin(), heap.end());
        return heap;
    }

private:
    static constexpr std::size_t kLeafSize = 16;

    struct Node {
        double split = 0.0;
        std::int32_t axis = -1;   // -1 marks a leaf
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t begin = 0;  // leaf range into index_
        std::uint32_t end = 0;
    };

    std::int32_t build(std::size_t begin, std::size_t end) {
        Node node;
        if (end - begin <= kLeafSize) {
            node.begin = static_cast<std::uint32_t>(begin);
            node.end = static_cast<std::uint32_t>(end);
            nodes_.push_back(node);
            return static_cast<std::int32_t>(nodes_.size() - 1);
        }
        Vec3 lo = points_[index_[begin]], hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const auto& p = points_[index_[i]];
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
        }
        int axis = 0;
        for (int a = 1; a < 3; ++a)
            if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
        const std::size_t mid = (begin + end) / 2;
        std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                         index_.begin() + static_cast<std::ptrdiff_t>(mid),
                         index_.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::uint32_t a, std::uint32_t b) {
                             return points_[a][axis] != points_[b][axis] ? points_[a][axis] < points_[b][axis]
                                                                         : a < b;
                         });
        node.axis = axis;
        node.split = points_[index_[mid]][axis];
        nodes_.push_back(node);
        const auto self = static_cast<std::int32_t>(nodes_.size() - 1);
        const auto left = build(begin, mid);
        const auto right = build(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    void search(std::int32_t ni, const Vec3& query, std::size_t k, std::uint32_t exclude,
                std::vector<Neighbor>& heap) const {
        const Node& node = nodes_[ni];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t idx = index_[i];
                if (idx == exclude) continue;
                const Neighbor cand{squared_dist(points_[idx], query), idx};
                if (heap.size() < k) {
                    heap.push_back(cand);
                    std::push_heap(heap.begin(), heap.end());
                } else if (cand < heap.front()) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.back() = cand;
                    std::push_heap(heap.begin(), heap.end());
                }
            }
            return;
        }
        const double delta = query[node.axis] - node.split;
        const std::int32_t near = delta < 0.0 ? node.left : node.right;
        const std::int32_t far = delta < 0.0 ? node.right : node.left;
        search(near, query, k, exclude, heap);
        if (heap.size() < k || delta * delta <= heap.front().dist2) search(far, query, k, exclude, heap);
    }

    const std::vector<Vec3>& points_;
    std::vector<std::uint32_t> index_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

} // namespace sst
