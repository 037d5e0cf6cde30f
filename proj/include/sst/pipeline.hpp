#pragma once

#include <atomic>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sst/error.hpp"
#include "sst/io.hpp"
#include "sst/metrics.hpp"
#include "sst/oversegment.hpp"
#include "sst/proposer.hpp"
#include "sst/refine.hpp"
#include "sst/superpool.hpp"
#include "sst/tree.hpp"

namespace sst {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// superpoint assignment <-> sp.json

inline void save_assignment(const std::string& path, const SuperpointAssignment& assignment) {
    json j;
    j["num_superpoints"] = assignment.count;
    j["labels"] = assignment.labels;
    std::ofstream f(path);
    if (!f) fail(Err::MissingFile, "cannot open for writing: " + path);
    f << j.dump() << "\n";
}

inline SuperpointAssignment load_assignment(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Err::MissingFile, path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        fail(Err::BadConfig, std::string("cannot parse ") + path + ": " + e.what());
    }
    SuperpointAssignment out;
    out.count = j.at("num_superpoints").get<std::uint32_t>();
    out.labels = j.at("labels").get<std::vector<std::uint32_t>>();
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// pipeline configuration

struct ClassifierSpec {
    std::string type = "threshold";  // threshold | mlp
    double theta = 0.5;
    std::string weights_path;
    bool symmetric = true;
};

struct RefineSpec {
    bool enabled = false;
    std::string weights_path;
    double threshold = 0.5;
};

struct ScenePaths {
    std::string scene;
    std::string predictions;
    std::string superpoints;
    std::string tree;
    std::string proposals;
    std::string report;
};

struct PipelineConfig {
    std::string scene_path;
    std::string predictions_path;
    std::string superpoints_path;  // sp.json, optional output
    std::string tree_path;         // tree.bin, optional output
    std::string proposals_path;    // props.sstr, optional output
    std::string report_path;       // report.json, optional output
    std::vector<ScenePaths> scenes;  // batch mode; overrides the single-scene paths
    unsigned workers = 0;            // 0 = hardware concurrency

    OversegmentParams overseg;
    std::set<std::int32_t> background_ids;
    ClassifierSpec classifier;
    RefineSpec refine;
    std::string scorer = "heuristic";  // heuristic | mlp
    std::string scorer_weights_path;
    std::size_t min_proposal_size = 50;
    Linkage linkage = Linkage::WardLike;
    EvalConfig eval;
    std::uint64_t seed = 1;
};

inline PipelineConfig parse_config(const json& j) {
    PipelineConfig c;
    const auto paths = j.value("paths", json::object());
    c.scene_path = paths.value("scene", "");
    c.predictions_path = paths.value("predictions", "");
    c.superpoints_path = paths.value("superpoints", "");
    c.tree_path = paths.value("tree", "");
    c.proposals_path = paths.value("proposals", "");
    c.report_path = paths.value("report", "");
    for (const auto& s : j.value("scenes", json::array())) {
        ScenePaths sp;
        sp.scene = s.at("scene").get<std::string>();
        sp.predictions = s.at("predictions").get<std::string>();
        sp.superpoints = s.value("superpoints", "");
        sp.tree = s.value("tree", "");
        sp.proposals = s.value("proposals", "");
        sp.report = s.value("report", "");
        c.scenes.push_back(std::move(sp));
    }
    c.workers = j.value("workers", 0u);

    const auto ov = j.value("oversegment", json::object());
    c.overseg.k = ov.value("k", 16);
    c.overseg.tau = ov.value("tau", 0.01);
    c.overseg.min_size = ov.value("min_size", 30u);
    c.overseg.lambda_normal = ov.value("lambda_normal", 1.0);
    c.overseg.lambda_color = ov.value("lambda_color", 0.2);
    if (c.overseg.k < 1 || c.overseg.tau < 0.0 || c.overseg.lambda_normal < 0.0 ||
        c.overseg.lambda_color < 0.0)
        fail(Err::BadConfig, "oversegment parameters out of range");

    for (const auto& id : j.value("background_category_ids", std::vector<std::int32_t>{}))
        c.background_ids.insert(id);

    const auto cl = j.value("classifier", json::object());
    c.classifier.type = cl.value("type", "threshold");
    c.classifier.theta = cl.value("theta", 0.5);
    c.classifier.weights_path = cl.value("weights", "");
    c.classifier.symmetric = cl.value("symmetric", true);
    if (c.classifier.type != "threshold" && c.classifier.type != "mlp")
        fail(Err::BadConfig, "classifier.type must be threshold or mlp");

    const auto rf = j.value("refine", json::object());
    c.refine.enabled = rf.value("enabled", false);
    c.refine.weights_path = rf.value("weights", "");
    c.refine.threshold = rf.value("threshold", 0.5);

    c.scorer = j.value("scorer", "heuristic");
    c.scorer_weights_path = j.value("scorer_weights", "");
    if (c.scorer != "heuristic" && c.scorer != "mlp")
        fail(Err::BadConfig, "scorer must be heuristic or mlp");
    c.min_proposal_size = j.value("min_proposal_size", 50u);
    const std::string linkage = j.value("linkage", "ward");
    if (linkage == "ward") c.linkage = Linkage::WardLike;
    else if (linkage == "centroid") c.linkage = Linkage::Centroid;
    else fail(Err::BadConfig, "linkage must be ward or centroid");

    const auto ev = j.value("eval", json::object());
    if (ev.contains("iou_thresholds"))
        c.eval.iou_thresholds = ev.at("iou_thresholds").get<std::vector<double>>();
    for (const auto& id : ev.value("categories", std::vector<std::int32_t>{}))
        c.eval.categories.insert(id);
    c.eval.validate();
    c.seed = j.value("seed", std::uint64_t{1});
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Err::MissingFile, path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        fail(Err::BadConfig, std::string("cannot parse ") + path + ": " + e.what());
    }
    return parse_config(j);
}

// every effective value, defaults included, echoed for reproducibility
inline json config_to_json(const PipelineConfig& c) {
    json j;
    j["paths"] = {{"scene", c.scene_path},         {"predictions", c.predictions_path},
                  {"superpoints", c.superpoints_path}, {"tree", c.tree_path},
                  {"proposals", c.proposals_path}, {"report", c.report_path}};
    if (!c.scenes.empty()) {
        json scenes = json::array();
        for (const auto& s : c.scenes)
            scenes.push_back({{"scene", s.scene},
                              {"predictions", s.predictions},
                              {"superpoints", s.superpoints},
                              {"tree", s.tree},
                              {"proposals", s.proposals},
                              {"report", s.report}});
        j["scenes"] = std::move(scenes);
    }
    j["workers"] = c.workers;
    j["oversegment"] = {{"k", c.overseg.k},
                        {"tau", c.overseg.tau},
                        {"min_size", c.overseg.min_size},
                        {"lambda_normal", c.overseg.lambda_normal},
                        {"lambda_color", c.overseg.lambda_color}};
    j["background_category_ids"] = c.background_ids;
    j["classifier"] = {{"type", c.classifier.type},
                       {"theta", c.classifier.theta},
                       {"weights", c.classifier.weights_path},
                       {"symmetric", c.classifier.symmetric}};
    j["refine"] = {{"enabled", c.refine.enabled},
                   {"weights", c.refine.weights_path},
                   {"threshold", c.refine.threshold}};
    j["scorer"] = c.scorer;
    j["scorer_weights"] = c.scorer_weights_path;
    j["min_proposal_size"] = c.min_proposal_size;
    j["linkage"] = c.linkage == Linkage::WardLike ? "ward" : "centroid";
    j["eval"] = {{"iou_thresholds", c.eval.iou_thresholds}, {"categories", c.eval.categories}};
    j["seed"] = c.seed;
    return j;
}

inline std::unique_ptr<SplitClassifier> make_classifier(const ClassifierSpec& spec,
                                                        std::size_t augmented_dim) {
    if (spec.type == "threshold")
        return std::make_unique<ThresholdClassifier>(spec.theta, augmented_dim);
    if (spec.weights_path.empty()) fail(Err::BadConfig, "mlp classifier needs a weights path");
    return std::make_unique<MlpClassifier>(load_weights(spec.weights_path), spec.symmetric);
}

// ---------------------------------------------------------------------------
// pipeline

namespace detail {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const SstError& e) {
        throw SstError(e.kind(), std::string("[") + stage + "] " + e.what());
    }
}

} // namespace detail

// oversegment -> pool -> build-tree -> propose -> refine -> score -> evaluate.
// Deterministic for a fixed config; every stage artifact with a configured
// path is written so the run can be resumed or inspected piecewise.
inline json run_pipeline_on(const Scene& scene, const PointPredictions& predictions,
                            const PipelineConfig& config) {
    json report;
    report["config"] = config_to_json(config);
    std::vector<std::string> notes;

    const auto assignment = detail::run_stage("oversegment", [&] {
        return oversegment_scene(scene, config.overseg);
    });
    report["num_superpoints"] = assignment.count;
    if (!config.superpoints_path.empty()) save_assignment(config.superpoints_path, assignment);

    auto sps = detail::run_stage("pool", [&] {
        auto pooled = pool_superpoints(assignment, predictions);
        compute_centers(pooled, scene);
        if (scene.has_instance_gt()) compute_soft_labels(pooled, scene);
        return pooled;
    });

    auto [foreground, background] = filter_foreground(sps, config.background_ids);
    report["num_foreground"] = foreground.size();
    report["num_background"] = background.size();

    std::vector<Proposal> proposals;
    if (foreground.empty()) {
        notes.push_back("no foreground");
    } else {
        const auto tree = detail::run_stage("build-tree", [&] {
            return build_nn_chain(foreground, config.linkage);
        });
        if (!config.tree_path.empty())
            save_tree(config.tree_path, tree, foreground, static_cast<std::uint32_t>(scene.size()));

        const auto features = build_node_features(tree);
        const auto leaf_points = leaf_point_table(foreground);
        proposals = detail::run_stage("propose", [&] {
            const std::size_t aug_dim = tree.nodes[0].augmented.size();
            const auto classifier = make_classifier(config.classifier, aug_dim);
            auto props = traverse_and_split(tree, features, *classifier);
            materialize_points(props, tree, leaf_points);
            return filter_min_size(std::move(props), config.min_proposal_size);
        });

        if (config.refine.enabled) {
            detail::run_stage("refine", [&] {
                const auto weights = load_weights(config.refine.weights_path);
                for (auto& p : proposals) {
                    const auto clique = build_clique(tree, p, features);
                    const auto scores = cliquenet_forward(clique, weights);
                    p = prune(p, clique, scores, tree, leaf_points, config.refine.threshold);
                }
                return 0;
            });
        }

        detail::run_stage("score", [&] {
            std::unique_ptr<ClassifierWeights> scorer_weights;
            if (config.scorer == "mlp") {
                if (config.scorer_weights_path.empty())
                    fail(Err::BadConfig, "mlp scorer needs a weights path");
                scorer_weights = std::make_unique<ClassifierWeights>(load_weights(config.scorer_weights_path));
            }
            for (auto& p : proposals) {
                p.confidence = scorer_weights
                                   ? mlp_forward(*scorer_weights,
                                                 features[static_cast<std::size_t>(p.node_id)])[0]
                                   : heuristic_score(p, tree);
            }
            return 0;
        });
    }
    report["num_proposals"] = proposals.size();

    if (!config.proposals_path.empty())
        detail::run_stage("save", [&] {
            save_proposals(config.proposals_path, proposals, scene);
            return 0;
        });

    if (scene.has_instance_gt() && scene.has_semantic_gt()) {
        const auto metrics = detail::run_stage("evaluate", [&] {
            return evaluate_map(proposals, scene, config.eval);
        });
        json per_category = json::object();
        for (const auto& cat : metrics.per_category)
            per_category[std::to_string(cat.category)] = {{"ap", cat.ap}, {"ap50", cat.ap50}, {"ap25", cat.ap25}};
        report["metrics"] = {{"map", metrics.map},
                             {"ap50", metrics.ap50},
                             {"ap25", metrics.ap25},
                             {"per_category", per_category}};
    } else {
        notes.push_back("no ground truth, evaluation skipped");
    }
    report["notes"] = notes;
    return report;
}

namespace detail {

inline void write_report(const std::string& path, const json& report) {
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) fail(Err::MissingFile, "cannot open for writing: " + path);
    f << report.dump(2) << "\n";
}

inline json run_single(PipelineConfig config) {
    if (config.scene_path.empty() || config.predictions_path.empty())
        fail(Err::BadConfig, "pipeline config needs scene and predictions paths");
    const auto scene = run_stage("load", [&] { return load_scene(config.scene_path); });
    const auto predictions =
        run_stage("load", [&] { return load_predictions(config.predictions_path, scene); });
    json report = run_pipeline_on(scene, predictions, config);
    write_report(config.report_path, report);
    return report;
}

} // namespace detail

// Single scene, or a batch when config.scenes is set. Batch scenes run on a
// worker pool; stages within a scene stay sequential and share no mutable
// state, so the per-scene reports are identical to sequential runs.
inline json run_pipeline(const PipelineConfig& config) {
    if (config.scenes.empty()) return detail::run_single(config);

    std::vector<json> reports(config.scenes.size());
    std::vector<std::string> errors(config.scenes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= config.scenes.size()) return;
            PipelineConfig local = config;
            local.scenes.clear();
            const auto& paths = config.scenes[i];
            local.scene_path = paths.scene;
            local.predictions_path = paths.predictions;
            local.superpoints_path = paths.superpoints;
            local.tree_path = paths.tree;
            local.proposals_path = paths.proposals;
            local.report_path = paths.report;
            try {
                reports[i] = detail::run_single(local);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned pool = std::min<unsigned>(config.workers ? config.workers : hw,
                                             static_cast<unsigned>(config.scenes.size()));
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            fail(Err::BadConfig, "scene " + std::to_string(i) + ": " + errors[i]);

    json batch;
    batch["scenes"] = reports;
    double map_sum = 0, ap50_sum = 0, ap25_sum = 0;
    std::size_t evaluated = 0, proposals = 0;
    for (const auto& r : reports) {
        proposals += r["num_proposals"].get<std::size_t>();
        if (r.contains("metrics")) {
            map_sum += r["metrics"]["map"].get<double>();
            ap50_sum += r["metrics"]["ap50"].get<double>();
            ap25_sum += r["metrics"]["ap25"].get<double>();
            ++evaluated;
        }
    }
    batch["num_proposals"] = proposals;
    if (evaluated > 0) {
        const auto c = static_cast<double>(evaluated);
        batch["metrics"] = {{"map", map_sum / c}, {"ap50", ap50_sum / c}, {"ap25", ap25_sum / c}};
    }
    detail::write_report(config.report_path, batch);
    return batch;
}

} // namespace sst
