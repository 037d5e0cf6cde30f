#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sst/pipeline.hpp"
#include "sst/synth.hpp"
#include "test_util.hpp"

using namespace sst;
using namespace sst_test;

TEST_CASE("synth: fixed seed reproduces identical scene bytes") {
    TempDir dir("pipe_synth");
    const SynthSpec spec{.instances = 3, .points_per_instance = 40, .noise_sigma = 0.05, .seed = 77};
    const auto a = synth_scene(spec);
    const auto b = synth_scene(spec);
    save_scene(dir.file("a.ssts"), a.scene);
    save_scene(dir.file("b.ssts"), b.scene);
    CHECK(read_bytes(dir.file("a.ssts")) == read_bytes(dir.file("b.ssts")));
    save_predictions(dir.file("a.sstp"), a.predictions);
    save_predictions(dir.file("b.sstp"), b.predictions);
    CHECK(read_bytes(dir.file("a.sstp")) == read_bytes(dir.file("b.sstp")));
}

TEST_CASE("synth: well separated instances meet only at the final merge") {
    const auto synth = synth_scene({.instances = 2, .points_per_instance = 100, .noise_sigma = 0.02, .seed = 5});
    const auto assignment = oversegment_scene(synth.scene, {});
    auto sps = pool_superpoints(assignment, synth.predictions);
    compute_centers(sps, synth.scene);
    auto [foreground, background] = filter_foreground(sps, {0});
    REQUIRE(foreground.size() >= 2);
    const auto tree = build_nn_chain(foreground);

    // each child branch of the root must sit entirely on one instance
    const auto& root = tree.nodes[static_cast<std::size_t>(tree.root)];
    const auto leaf_points = leaf_point_table(foreground);
    for (const std::int32_t side : {root.left, root.right}) {
        std::set<std::int32_t> instances;
        for (const auto leaf : branch_leaf_nodes(tree, side))
            for (const auto idx : leaf_points[leaf]) instances.insert(synth.scene.gt_instance[idx]);
        CHECK(instances.size() == 1);
    }
}

TEST_CASE("pipeline: two-instance oracle scene scores mAP 1.0") {
    const auto synth = synth_scene({.instances = 2, .points_per_instance = 100, .noise_sigma = 0.02, .seed = 11});
    PipelineConfig config;
    config.background_ids = {0};
    config.classifier.theta = 0.5;
    const auto report = run_pipeline_on(synth.scene, synth.predictions, config);
    CHECK(report["num_proposals"].get<std::size_t>() == 2);
    CHECK(report["metrics"]["map"].get<double>() == doctest::Approx(1.0));
    CHECK(report["metrics"]["ap50"].get<double>() == doctest::Approx(1.0));
    CHECK(report["metrics"]["ap25"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("pipeline: a single fused superpoint still yields one proposal") {
    const auto synth = synth_scene({.instances = 1, .points_per_instance = 120, .noise_sigma = 0.0, .seed = 3});
    PipelineConfig config;
    config.background_ids = {0};
    config.overseg.tau = 100.0;  // force everything into one superpoint
    config.overseg.min_size = 1;
    const auto report = run_pipeline_on(synth.scene, synth.predictions, config);
    CHECK(report["num_superpoints"].get<std::size_t>() == 1);
    CHECK(report["num_proposals"].get<std::size_t>() == 1);
    CHECK(report["metrics"]["map"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("pipeline: all-background scene emits no proposals and a note") {
    const auto synth = synth_scene({.instances = 2, .points_per_instance = 60, .noise_sigma = 0.0, .seed = 13});
    PipelineConfig config;
    config.background_ids = {0, 1, 2};  // everything counts as background
    const auto report = run_pipeline_on(synth.scene, synth.predictions, config);
    CHECK(report["num_proposals"].get<std::size_t>() == 0);
    const auto notes = report["notes"].get<std::vector<std::string>>();
    REQUIRE(!notes.empty());
    CHECK(notes[0] == "no foreground");
    CHECK(report["metrics"]["map"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("pipeline: rerun writes byte-identical artifacts") {
    TempDir dir("pipe_rerun");
    const auto synth = synth_scene({.instances = 3, .points_per_instance = 80, .noise_sigma = 0.03, .seed = 21});
    save_scene(dir.file("scene.ssts"), synth.scene);
    save_predictions(dir.file("pred.sstp"), synth.predictions);

    PipelineConfig config;
    config.scene_path = dir.file("scene.ssts");
    config.predictions_path = dir.file("pred.sstp");
    config.background_ids = {0};
    config.superpoints_path = dir.file("sp.json");
    config.tree_path = dir.file("tree.sstt");

    config.proposals_path = dir.file("a.sstr");
    const auto r1 = run_pipeline(config);
    config.proposals_path = dir.file("b.sstr");
    const auto r2 = run_pipeline(config);
    CHECK(read_bytes(dir.file("a.sstr")) == read_bytes(dir.file("b.sstr")));
    CHECK(r1["metrics"] == r2["metrics"]);

    // stage artifacts are reloadable on their own
    const auto assignment = load_assignment(dir.file("sp.json"));
    CHECK(assignment.labels.size() == synth.scene.size());
    const auto tree_file = load_tree(dir.file("tree.sstt"));
    CHECK(tree_file.scene_points == synth.scene.size());
    CHECK(tree_file.tree.num_leaves >= 2);
}

TEST_CASE("pipeline: refinement with benign weights keeps the partition") {
    TempDir dir("pipe_refine");
    const auto synth = synth_scene({.instances = 2, .points_per_instance = 100, .noise_sigma = 0.02, .seed = 31});

    // identity-ish CliqueNet: zero weights score 0.5 everywhere, nothing pruned
    ClassifierWeights psi;
    const std::size_t in_dim = 8 + 3 + 3;  // n + K + 3
    const std::size_t widths[4] = {in_dim, 8, 4, 1};
    const Activation acts[3] = {Activation::Relu, Activation::Relu, Activation::Sigmoid};
    for (int l = 0; l < 3; ++l) {
        DenseLayer layer;
        layer.weight = Mat(widths[l], widths[l + 1]);
        layer.bias.assign(widths[l + 1], 0.0);
        layer.activation = acts[l];
        psi.layers.push_back(std::move(layer));
    }
    save_weights(dir.file("psi.sstw"), psi);

    PipelineConfig config;
    config.background_ids = {0};
    config.refine.enabled = true;
    config.refine.weights_path = dir.file("psi.sstw");
    const auto report = run_pipeline_on(synth.scene, synth.predictions, config);
    CHECK(report["metrics"]["map"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("config: JSON round-trip with defaults echoed") {
    const auto j = json::parse(R"({
        "oversegment": {"k": 8, "tau": 0.05},
        "background_category_ids": [0, 3],
        "classifier": {"type": "threshold", "theta": 0.7},
        "min_proposal_size": 10
    })");
    const auto config = parse_config(j);
    CHECK(config.overseg.k == 8);
    CHECK(config.overseg.min_size == 30);  // default preserved
    CHECK(config.background_ids == std::set<std::int32_t>{0, 3});
    CHECK(config.classifier.theta == 0.7);
    CHECK(config.min_proposal_size == 10);

    const auto echo = config_to_json(config);
    CHECK(echo["oversegment"]["k"] == 8);
    CHECK(echo["oversegment"]["lambda_color"] == 0.2);
    CHECK(echo["linkage"] == "ward");
    CHECK(parse_config(echo).overseg.tau == 0.05);
}

TEST_CASE("config: invalid values are rejected") {
    CHECK_THROWS_AS(parse_config(json::parse(R"({"classifier": {"type": "magic"}})")), SstError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"oversegment": {"k": 0}})")), SstError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"linkage": "single"})")), SstError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"eval": {"iou_thresholds": [0.5, 0.4]}})")), SstError);
}

TEST_CASE("pipeline: errors carry their stage tag") {
    const auto synth = synth_scene({.instances = 1, .points_per_instance = 60, .noise_sigma = 0.0, .seed = 41});
    PipelineConfig config;
    config.background_ids = {0};
    config.classifier.type = "mlp";  // no weights path -> BadConfig inside propose
    try {
        run_pipeline_on(synth.scene, synth.predictions, config);
        FAIL("expected BadConfig");
    } catch (const SstError& e) {
        CHECK(e.kind() == Err::BadConfig);
        CHECK(std::string(e.what()).find("[propose]") != std::string::npos);
    }
}

TEST_CASE("pipeline: batch mode runs scenes on a worker pool") {
    TempDir dir("pipe_batch");
    for (int s = 0; s < 3; ++s) {
        const auto synth = synth_scene({.instances = 2, .points_per_instance = 80,
                                        .noise_sigma = 0.02, .seed = 100 + std::uint64_t(s)});
        save_scene(dir.file("scene" + std::to_string(s) + ".ssts"), synth.scene);
        save_predictions(dir.file("pred" + std::to_string(s) + ".sstp"), synth.predictions);
    }
    PipelineConfig config;
    config.background_ids = {0};
    config.workers = 2;
    for (int s = 0; s < 3; ++s) {
        ScenePaths paths;
        paths.scene = dir.file("scene" + std::to_string(s) + ".ssts");
        paths.predictions = dir.file("pred" + std::to_string(s) + ".sstp");
        paths.report = dir.file("report" + std::to_string(s) + ".json");
        config.scenes.push_back(paths);
    }
    const auto batch = run_pipeline(config);
    REQUIRE(batch["scenes"].size() == 3);
    CHECK(batch["metrics"]["map"].get<double>() == doctest::Approx(1.0));
    CHECK(batch["num_proposals"].get<std::size_t>() == 6);

    // per-scene reports match a sequential rerun
    PipelineConfig single = config;
    single.scenes.clear();
    single.scene_path = config.scenes[1].scene;
    single.predictions_path = config.scenes[1].predictions;
    const auto alone = run_pipeline(single);
    CHECK(batch["scenes"][1]["metrics"] == alone["metrics"]);
}

TEST_CASE("assignment json: save/load round-trip and validation") {
    TempDir dir("pipe_assign");
    SuperpointAssignment assignment{{0, 1, 1, 2, 0}, 3};
    save_assignment(dir.file("sp.json"), assignment);
    const auto loaded = load_assignment(dir.file("sp.json"));
    CHECK(loaded.count == 3);
    CHECK(loaded.labels == assignment.labels);

    SuperpointAssignment gap{{0, 2, 2}, 3};  // id 1 never used
    save_assignment(dir.file("bad.json"), gap);
    CHECK_THROWS_AS(load_assignment(dir.file("bad.json")), SstError);
}
