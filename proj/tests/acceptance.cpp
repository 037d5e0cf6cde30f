// Acceptance suite: every release gate in one binary, one PASS/FAIL line per
// criterion. Exits nonzero if anything fails. Tolerances are pinned in the
// checks themselves.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "sst/sst.hpp"
#include "test_util.hpp"

using namespace sst;
using namespace sst_test;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --------------------------------------------------------------------------
// 1. NN-chain vs naive agglomeration on >=200 tie-free random instances

void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20210104);
    int mismatches = 0;
    const int cases = 200;
    for (int iter = 0; iter < cases; ++iter) {
        const std::size_t m = 3 + rng.uniform_int(62);  // M in {3..64}
        const auto sps = random_superpoints(rng, m, 2 + rng.uniform_int(5), 1);
        if (canonical_merges(build_nn_chain(sps)) != canonical_merges(build_naive(sps)))
            ++mismatches;
    }
    const double secs = elapsed_s(start);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d/%d instances matched, %.2fs", cases - mismatches,
                  cases, secs);
    report(1, "NN-chain merge sets equal the O(M^3) oracle", mismatches == 0 && secs < 30.0, detail);
}

// --------------------------------------------------------------------------
// 2. size-weighted inheritance within 1e-5 and depth bounds on every tree

void criterion_2() {
    Rng rng(4202);
    bool ok = true;
    for (int iter = 0; iter < 100 && ok; ++iter) {
        const std::size_t m = 2 + rng.uniform_int(63);
        const auto sps = random_superpoints(rng, m, 3, 2, 3);
        const auto tree = build_nn_chain(sps);

        const auto depth = tree_depth(tree);
        const auto lower = static_cast<std::uint32_t>(std::ceil(std::log2(double(m))));
        if (depth < lower || depth > m - 1) ok = false;

        for (std::size_t t = 0; t < tree.nodes.size() && ok; ++t) {
            const auto& node = tree.nodes[t];
            if (node.is_leaf()) continue;
            std::vector<double> acc_a(3, 0.0), acc_o(3, 0.0), acc_q(3, 0.0);
            double total = 0.0;
            for (const auto leaf : branch_leaf_nodes(tree, static_cast<std::int32_t>(t))) {
                const auto& l = tree.nodes[leaf];
                const double w = l.size;
                for (int c = 0; c < 3; ++c) acc_a[c] += w * l.semantic[c];
                for (int c = 0; c < 3; ++c) acc_o[c] += w * l.offset[c];
                for (int c = 0; c < 3; ++c) acc_q[c] += w * l.soft_label[c];
                total += w;
            }
            for (int c = 0; c < 3 && ok; ++c) {
                if (std::abs(node.semantic[c] - acc_a[c] / total) > 1e-5) ok = false;
                if (std::abs(node.offset[c] - acc_o[c] / total) > 1e-5) ok = false;
                if (std::abs(node.soft_label[c] - acc_q[c] / total) > 1e-5) ok = false;
            }
        }
    }
    report(2, "size-weighted inheritance within 1e-5 and depth bounds on 100 random trees", ok);
}

// --------------------------------------------------------------------------
// 3. Traversal output partitions the foreground superpoints

void criterion_3() {
    Rng rng(303);
    bool ok = true;
    for (int iter = 0; iter < 100 && ok; ++iter) {
        const std::size_t m = 1 + rng.uniform_int(40);
        const auto sps = random_superpoints(rng, m, 3, 2);
        const auto tree = build_nn_chain(sps);
        const auto features = build_node_features(tree);

        ClassifierWeights w;
        DenseLayer l1;
        l1.weight = Mat(2 * features[0].size(), 6);
        for (auto& v : l1.weight.data) v = rng.normal(0.0, 0.7);
        l1.bias.assign(6, 0.0);
        l1.activation = Activation::Relu;
        DenseLayer l2;
        l2.weight = Mat(6, 1);
        for (auto& v : l2.weight.data) v = rng.normal(0.0, 0.7);
        l2.bias.assign(1, rng.normal(0.0, 0.3));
        l2.activation = Activation::Sigmoid;
        w.layers = {l1, l2};

        const ConstantClassifier all_split(0.0);
        const ConstantClassifier no_split(1.0);
        const ThresholdClassifier threshold(rng.uniform(0.0, 3.0), 6);
        const MlpClassifier mlp(w);
        const SplitClassifier* classifiers[4] = {&all_split, &no_split, &threshold, &mlp};
        for (const auto* classifier : classifiers) {
            const auto proposals = traverse_and_split(tree, features, *classifier);
            std::set<std::uint32_t> seen;
            std::size_t total = 0;
            for (const auto& p : proposals) {
                for (const auto sp : p.superpoint_ids) seen.insert(sp);
                total += p.superpoint_ids.size();
            }
            if (total != m || seen.size() != m) ok = false;
        }
    }
    report(3, "proposals partition the foreground for 4 classifier families x 100 trees", ok);
}

// --------------------------------------------------------------------------
// 4. Synthetic end-to-end mAP, clean vs corrupted offsets

void criterion_4() {
    const auto synth = synth_scene({.instances = 5, .points_per_instance = 300,
                                    .noise_sigma = 0.02, .seed = 404});
    PipelineConfig config;
    config.background_ids = {0};
    config.classifier.theta = 0.5;

    const auto clean = run_pipeline_on(synth.scene, synth.predictions, config);
    const double clean_map = clean["metrics"]["map"].get<double>();
    const bool clean_ok = clean_map == 1.0 &&
                          clean["metrics"]["ap50"].get<double>() == 1.0 &&
                          clean["metrics"]["ap25"].get<double>() == 1.0;

    // corrupt 30% of the offsets with large noise
    Rng noise(405);
    auto corrupted = synth.predictions;
    for (std::size_t i = 0; i < corrupted.offsets.rows; ++i) {
        if (noise.uniform() < 0.3) {
            for (int a = 0; a < 3; ++a) corrupted.offsets(i, a) += noise.normal(0.0, 20.0);
        }
    }
    const auto dirty = run_pipeline_on(synth.scene, corrupted, config);
    const double dirty_map = dirty["metrics"]["map"].get<double>();

    char detail[128];
    std::snprintf(detail, sizeof(detail), "clean mAP %.3f, corrupted mAP %.3f", clean_map, dirty_map);
    report(4, "oracle scene gives mAP 1.0 and offset corruption strictly lowers it",
           clean_ok && dirty_map < clean_map, detail);
}

// --------------------------------------------------------------------------
// 5. Loss closed forms

void criterion_5() {
    bool ok = true;
    const double ln2 = std::log(2.0);

    // semantic: uniform vs one-hot, K=2 -> ln 2 + 1/3
    {
        Mat pred(6, 2, 0.5);
        Mat gt(6, 2);
        for (int i = 0; i < 6; ++i) gt(i, i % 2) = 1.0;
        if (std::abs(semantic_loss(pred, gt) - (ln2 + 1.0 / 3.0)) > 1e-6) ok = false;
    }
    // offset: perfect oracle predictions -> -1
    {
        const auto synth = synth_scene({.instances = 2, .points_per_instance = 64,
                                        .noise_sigma = 0.0, .seed = 505});
        const auto [centers, mask] = gt_centers_per_point(synth.scene);
        const double loss =
            offset_loss(synth.predictions.offsets, synth.scene.positions, centers, mask);
        if (std::abs(loss - (-1.0)) > 1e-6) ok = false;
    }
    // splitting: single merge, phi = 0.5, target 1 -> -ln 0.5
    {
        Superpoint a, b;
        a.id = 0;
        a.point_indices = {0};
        a.feature = {0.0};
        a.semantic = {1.0};
        a.soft_label = {1.0};
        b = a;
        b.id = 1;
        b.point_indices = {1};
        b.center = {{1.0, 0.0, 0.0}};
        const auto tree = build_nn_chain({a, b});
        const double loss = splitting_loss(tree, build_node_features(tree), ConstantClassifier(0.5));
        if (std::abs(loss - ln2) > 1e-6) ok = false;
    }
    // refining: one leaf, score 0.5, target 1 -> -ln 0.5
    {
        Clique clique;
        clique.node_features = Mat(2, 4);
        clique.adjacency = Mat(2, 2);
        clique.adjacency(0, 1) = clique.adjacency(1, 0) = 1.0;
        clique.leaf_nodes = {0};
        const double loss = refining_loss(clique, {0.9, 0.5}, {1.0}, {{1.0}});
        if (std::abs(loss - ln2) > 1e-6) ok = false;
    }
    // evaluation: one proposal at 0.5 against label 1 -> -ln 0.5
    if (std::abs(evaluation_loss({0.5}, {1.0}) - ln2) > 1e-6) ok = false;

    report(5, "loss closed forms (ln2 + 1/3, -1, -ln 0.5 x3) within 1e-6", ok);
}

// --------------------------------------------------------------------------
// 6. graph-conv layer: dense oracle and permutation equivariance

void criterion_6() {
    Rng rng(606);
    bool ok = true;

    // 5-node star against the explicitly formed dense product
    {
        Mat f(5, 3), w(3, 2), adj(5, 5);
        for (auto& v : f.data) v = rng.normal();
        for (auto& v : w.data) v = rng.normal();
        for (std::size_t i = 1; i < 5; ++i) adj(0, i) = adj(i, 0) = 1.0;
        const auto got = gcn_layer(f, adj, w, {}, Activation::None);

        const double deg[5] = {5.0, 2.0, 2.0, 2.0, 2.0};
        Mat norm(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
                const double a = (i == j ? 1.0 : adj(i, j));
                norm(i, j) = a / std::sqrt(deg[i] * deg[j]);
            }
        const auto want = matmul(matmul(norm, f), w);
        for (std::size_t i = 0; i < 5 && ok; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                if (std::abs(got(i, j) - want(i, j)) > 1e-6) ok = false;
    }

    // permutation equivariance on 50 random cliques
    for (int iter = 0; iter < 50 && ok; ++iter) {
        const std::size_t mt = 1 + rng.uniform_int(12);
        const std::size_t dim = 4 + rng.uniform_int(6);
        Clique clique;
        clique.node_features = Mat(mt + 1, dim);
        for (auto& v : clique.node_features.data) v = rng.normal();
        clique.adjacency = Mat(mt + 1, mt + 1);
        for (std::size_t i = 1; i <= mt; ++i) clique.adjacency(0, i) = clique.adjacency(i, 0) = 1.0;
        clique.leaf_nodes.assign(mt, 0);

        ClassifierWeights w;
        const std::size_t widths[4] = {dim, 8, 4, 1};
        const Activation acts[3] = {Activation::Relu, Activation::Relu, Activation::Sigmoid};
        for (int l = 0; l < 3; ++l) {
            DenseLayer layer;
            layer.weight = Mat(widths[l], widths[l + 1]);
            for (auto& v : layer.weight.data) v = rng.normal(0.0, 0.6);
            layer.bias.assign(widths[l + 1], 0.0);
            layer.activation = acts[l];
            w.layers.push_back(std::move(layer));
        }
        const auto base = cliquenet_forward(clique, w);

        std::vector<std::size_t> perm(mt);
        for (std::size_t i = 0; i < mt; ++i) perm[i] = i;
        for (std::size_t i = mt; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(i)]);

        Clique shuffled = clique;
        for (std::size_t i = 0; i < mt; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                shuffled.node_features(1 + i, d) = clique.node_features(1 + perm[i], d);
        const auto scores = cliquenet_forward(shuffled, w);
        if (std::abs(scores[0] - base[0]) > 1e-9) ok = false;
        for (std::size_t i = 0; i < mt && ok; ++i)
            if (std::abs(scores[1 + i] - base[1 + perm[i]]) > 1e-9) ok = false;
    }
    report(6, "graph-conv star example matches dense oracle; equivariant on 50 cliques", ok);
}

// --------------------------------------------------------------------------
// 7. Construction throughput at M = 1000

void criterion_7() {
    Rng rng(707);
    const auto sps = random_superpoints(rng, 1000, 20, 1);
    const auto start = std::chrono::steady_clock::now();
    const auto tree = build_nn_chain(sps);
    const double secs = elapsed_s(start);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%.3fs single-threaded", secs);
    report(7, "M=1000 tree construction under 1 s", tree.nodes.size() == 1999 && secs < 1.0, detail);
}

// --------------------------------------------------------------------------
// 8. Evaluator against hand-enumerated PR curves

void criterion_8() {
    bool ok = true;

    auto scene_with = [](std::size_t n,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& spans,
                         const std::vector<std::int32_t>& cats) {
        Scene scene;
        scene.num_categories = 8;
        scene.num_instances = static_cast<std::uint32_t>(spans.size());
        scene.gt_semantic.assign(n, kIgnoreSemantic);
        scene.gt_instance.assign(n, kNoInstance);
        for (std::size_t i = 0; i < n; ++i) {
            scene.positions.push_back({{double(i), 0, 0}});
            scene.colors.push_back({{0, 0, 0}});
        }
        for (std::size_t j = 0; j < spans.size(); ++j)
            for (std::uint32_t p = spans[j].first; p < spans[j].second; ++p) {
                scene.gt_instance[p] = static_cast<std::int32_t>(j);
                scene.gt_semantic[p] = cats[j];
            }
        return scene;
    };
    auto proposal = [](std::uint32_t lo, std::uint32_t hi, std::int32_t cat, double conf,
                       std::int32_t id) {
        Proposal p;
        for (std::uint32_t i = lo; i < hi; ++i) p.point_indices.push_back(i);
        p.category = cat;
        p.confidence = conf;
        p.node_id = id;
        return p;
    };

    // exact single match -> AP 1 at every threshold
    {
        const auto scene = scene_with(20, {{0, 10}}, {1});
        const auto r = evaluate_map({proposal(0, 10, 1, 0.9, 0)}, scene);
        if (r.map != 1.0 || r.ap50 != 1.0 || r.ap25 != 1.0) ok = false;
    }
    // no proposals -> AP 0
    {
        const auto scene = scene_with(20, {{0, 10}}, {1});
        if (evaluate_map({}, scene).map != 0.0) ok = false;
    }
    // 2 gt, 2 proposals with IoU {1.0, 0.4}: AP@50 = 0.5, AP@25 = 1.0
    {
        const auto scene = scene_with(40, {{0, 10}, {10, 20}}, {1, 1});
        const auto r = evaluate_map({proposal(0, 10, 1, 0.9, 0), proposal(10, 14, 1, 0.8, 1)}, scene);
        if (std::abs(r.ap50 - 0.5) > 1e-12 || std::abs(r.ap25 - 1.0) > 1e-12) ok = false;
    }
    // rescaling confidences never changes AP
    {
        const auto scene = scene_with(60, {{0, 15}, {20, 35}}, {1, 2});
        std::vector<Proposal> props = {proposal(0, 15, 1, 0.9, 0), proposal(18, 33, 2, 0.6, 1),
                                       proposal(3, 12, 1, 0.4, 2)};
        const auto base = evaluate_map(props, scene);
        for (auto& p : props) p.confidence *= 0.123;
        const auto scaled = evaluate_map(props, scene);
        if (std::abs(base.map - scaled.map) > 1e-12 || std::abs(base.ap50 - scaled.ap50) > 1e-12)
            ok = false;
    }
    report(8, "evaluator matches hand-enumerated PR curves and is scale-invariant", ok);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (failures == 0) {
        std::printf("acceptance: all 8 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return 1;
}
