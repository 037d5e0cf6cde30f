// Command-line front end for the superpoint-tree proposal pipeline. Each
// subcommand maps to one pipeline stage; `run` executes all of them from a
// single JSON config. Exit code 0 on success, 1 with a diagnostic otherwise.

#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sst/sst.hpp"

namespace {

using sst::json;

std::set<std::int32_t> parse_id_list(const std::vector<std::int32_t>& ids) {
    return std::set<std::int32_t>(ids.begin(), ids.end());
}

sst::ClassifierSpec parse_classifier_arg(const std::string& arg) {
    sst::ClassifierSpec spec;
    const auto colon = arg.find(':');
    const std::string kind = arg.substr(0, colon);
    const std::string value = colon == std::string::npos ? "" : arg.substr(colon + 1);
    if (kind == "threshold") {
        spec.type = "threshold";
        if (!value.empty()) spec.theta = std::stod(value);
    } else if (kind == "mlp") {
        spec.type = "mlp";
        spec.weights_path = value;
        if (value.empty()) sst::fail(sst::Err::BadConfig, "mlp classifier needs mlp:<weights.sstw>");
    } else {
        sst::fail(sst::Err::BadConfig, "classifier must be threshold:<theta> or mlp:<weights.sstw>");
    }
    return spec;
}

int cmd_synth(const std::string& out_scene, const std::string& out_pred, std::uint32_t instances,
              std::uint32_t points, double sigma, std::uint64_t seed, std::uint32_t background,
              std::uint32_t categories, std::uint32_t feature_dim, double spacing) {
    sst::SynthSpec spec;
    spec.instances = instances;
    spec.points_per_instance = points;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    spec.background_points = background;
    spec.num_categories = categories;
    spec.feature_dim = feature_dim;
    spec.spacing = spacing;
    const auto synth = sst::synth_scene(spec);
    sst::save_scene(out_scene, synth.scene);
    sst::save_predictions(out_pred, synth.predictions);
    std::printf("wrote %s (%zu points, %u categories) and %s (n=%u)\n", out_scene.c_str(),
                synth.scene.size(), synth.scene.num_categories, out_pred.c_str(), spec.feature_dim);
    return 0;
}

int cmd_oversegment(const std::string& in, const std::string& out, const sst::OversegmentParams& params) {
    const auto scene = sst::load_scene(in);
    const auto assignment = sst::oversegment_scene(scene, params);
    sst::save_assignment(out, assignment);
    std::printf("%s: %zu points -> %u superpoints\n", out.c_str(), scene.size(), assignment.count);
    return 0;
}

int cmd_pool(const std::string& scene_path, const std::string& pred_path, const std::string& sp_path,
             const std::string& out) {
    const auto scene = sst::load_scene(scene_path);
    const auto pred = sst::load_predictions(pred_path, scene);
    const auto assignment = sst::load_assignment(sp_path);
    if (assignment.labels.size() != scene.size())
        sst::fail(sst::Err::DimensionMismatch, "assignment N != scene N");
    auto sps = sst::pool_superpoints(assignment, pred);
    sst::compute_centers(sps, scene);
    if (scene.has_instance_gt()) sst::compute_soft_labels(sps, scene);

    json out_json;
    out_json["num_superpoints"] = sps.size();
    json items = json::array();
    for (const auto& sp : sps) {
        json item;
        item["id"] = sp.id;
        item["size"] = sp.size();
        item["category"] = sst::argmax_category(sp.semantic);
        item["semantic"] = sp.semantic;
        item["offset"] = {sp.offset[0], sp.offset[1], sp.offset[2]};
        item["center"] = {sp.center[0], sp.center[1], sp.center[2]};
        if (!sp.soft_label.empty()) item["soft_label"] = sp.soft_label;
        items.push_back(std::move(item));
    }
    out_json["superpoints"] = std::move(items);
    std::ofstream f(out);
    if (!f) sst::fail(sst::Err::MissingFile, "cannot open for writing: " + out);
    f << out_json.dump(2) << "\n";
    std::printf("%s: pooled %zu superpoints\n", out.c_str(), sps.size());
    return 0;
}

int cmd_build_tree(const std::string& scene_path, const std::string& pred_path,
                   const std::string& sp_path, const std::string& out,
                   const std::vector<std::int32_t>& background, const std::string& linkage_name) {
    const auto scene = sst::load_scene(scene_path);
    const auto pred = sst::load_predictions(pred_path, scene);
    const auto assignment = sst::load_assignment(sp_path);
    auto sps = sst::pool_superpoints(assignment, pred);
    sst::compute_centers(sps, scene);
    if (scene.has_instance_gt()) sst::compute_soft_labels(sps, scene);
    auto [foreground, ignored] = sst::filter_foreground(sps, parse_id_list(background));
    if (foreground.empty()) sst::fail(sst::Err::NoForegroundPoints, "no foreground superpoints");

    const auto linkage = linkage_name == "centroid" ? sst::Linkage::Centroid : sst::Linkage::WardLike;
    const auto tree = sst::build_nn_chain(foreground, linkage);
    sst::save_tree(out, tree, foreground, static_cast<std::uint32_t>(scene.size()));
    std::printf("%s: %u leaves, depth %u, %zu nodes\n", out.c_str(), tree.num_leaves,
                sst::tree_depth(tree), tree.nodes.size());
    return 0;
}

int cmd_propose(const std::string& tree_path, const std::string& classifier_arg,
                std::size_t min_size, const std::string& out, const std::string& refine_weights,
                const std::string& scene_path) {
    const auto tree_file = sst::load_tree(tree_path);
    const auto& tree = tree_file.tree;
    if (tree.empty()) sst::fail(sst::Err::InvalidNode, "tree file holds no nodes");
    const auto features = sst::build_node_features(tree);

    const auto spec = parse_classifier_arg(classifier_arg);
    const auto classifier = sst::make_classifier(spec, tree.nodes[0].augmented.size());
    auto proposals = sst::traverse_and_split(tree, features, *classifier);
    sst::materialize_points(proposals, tree, tree_file.leaf_points);
    proposals = sst::filter_min_size(std::move(proposals), min_size);

    if (!refine_weights.empty()) {
        const auto psi = sst::load_weights(refine_weights);
        for (auto& p : proposals) {
            const auto clique = sst::build_clique(tree, p, features);
            const auto scores = sst::cliquenet_forward(clique, psi);
            p = sst::prune(p, clique, scores, tree, tree_file.leaf_points);
        }
    }
    for (auto& p : proposals) p.confidence = sst::heuristic_score(p, tree);

    if (scene_path.empty()) {
        sst::save_proposals_records(out, proposals, tree_file.scene_points);
    } else {
        sst::save_proposals(out, proposals, sst::load_scene(scene_path));
    }
    std::printf("%s: %zu proposals\n", out.c_str(), proposals.size());
    return 0;
}

int cmd_evaluate(const std::string& props_path, const std::string& scene_path,
                 const std::string& report_path) {
    const auto scene = sst::load_scene(scene_path);
    const auto proposals = sst::load_proposals(props_path, scene.size());
    const auto metrics = sst::evaluate_map(proposals, scene);

    json report;
    report["num_proposals"] = proposals.size();
    report["map"] = metrics.map;
    report["ap50"] = metrics.ap50;
    report["ap25"] = metrics.ap25;
    json per_category = json::object();
    for (const auto& cat : metrics.per_category)
        per_category[std::to_string(cat.category)] = {{"ap", cat.ap}, {"ap50", cat.ap50}, {"ap25", cat.ap25}};
    report["per_category"] = std::move(per_category);
    std::ofstream f(report_path);
    if (!f) sst::fail(sst::Err::MissingFile, "cannot open for writing: " + report_path);
    f << report.dump(2) << "\n";
    std::printf("mAP %.4f  AP@50 %.4f  AP@25 %.4f  (%zu proposals, report: %s)\n", metrics.map,
                metrics.ap50, metrics.ap25, proposals.size(), report_path.c_str());
    return 0;
}

int cmd_run(const std::string& config_path) {
    const auto config = sst::load_config(config_path);
    const auto report = sst::run_pipeline(config);
    if (report.contains("metrics"))
        std::printf("mAP %.4f  AP@50 %.4f  AP@25 %.4f  (%llu proposals)\n",
                    report["metrics"]["map"].get<double>(), report["metrics"]["ap50"].get<double>(),
                    report["metrics"]["ap25"].get<double>(),
                    static_cast<unsigned long long>(report["num_proposals"].get<std::size_t>()));
    else
        std::printf("%llu proposals (no ground truth, evaluation skipped)\n",
                    static_cast<unsigned long long>(report["num_proposals"].get<std::size_t>()));
    return 0;
}

int cmd_export_ply(const std::string& scene_path, const std::string& out,
                   const std::string& props_path, const std::string& color_by) {
    const auto scene = sst::load_scene(scene_path);
    std::vector<std::array<std::uint8_t, 3>> colors;
    if (!props_path.empty()) {
        const auto props = sst::load_proposals(props_path, scene.size());
        colors = sst::proposal_vertex_colors(props, scene.size());
    } else if (color_by == "instance" && scene.has_instance_gt()) {
        colors.assign(scene.size(), {128, 128, 128});
        for (std::size_t i = 0; i < scene.size(); ++i)
            if (scene.gt_instance[i] != sst::kNoInstance)
                colors[i] = sst::proposal_color(static_cast<std::size_t>(scene.gt_instance[i]));
    } else {
        colors.resize(scene.size());
        for (std::size_t i = 0; i < scene.size(); ++i)
            for (int c = 0; c < 3; ++c)
                colors[i][c] = static_cast<std::uint8_t>(scene.colors[i][c] * 255.0 + 0.5);
    }
    sst::export_ply(out, scene, colors);
    std::printf("%s: %zu vertices\n", out.c_str(), scene.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic superpoint tree instance-proposal pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with oracle predictions");
    std::string synth_scene_out, synth_pred_out;
    std::uint32_t synth_instances = 5, synth_points = 200, synth_background = 0, synth_categories = 0,
                  synth_fdim = 8;
    double synth_sigma = 0.02, synth_spacing = 4.0;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out-scene", synth_scene_out, "Output .ssts path")->required();
    synth->add_option("--out-pred", synth_pred_out, "Output .sstp path")->required();
    synth->add_option("--instances", synth_instances, "Instance count");
    synth->add_option("--points", synth_points, "Points per instance");
    synth->add_option("--sigma", synth_sigma, "Prediction noise in [0,1)");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--background-points", synth_background, "Unlabeled clutter points");
    synth->add_option("--categories", synth_categories, "Category count (0 = instances + 1)");
    synth->add_option("--feature-dim", synth_fdim, "Backbone feature width n");
    synth->add_option("--spacing", synth_spacing, "Distance between instance centers (m)");

    // oversegment
    auto* overseg = app.add_subcommand("oversegment", "Graph-based over-segmentation into superpoints");
    std::string ov_in, ov_out;
    sst::OversegmentParams ov_params;
    overseg->add_option("--in", ov_in, "Scene .ssts")->required();
    overseg->add_option("--out", ov_out, "Output sp.json")->required();
    overseg->add_option("--k", ov_params.k, "kNN graph degree");
    overseg->add_option("--tau", ov_params.tau, "Segmentation threshold");
    overseg->add_option("--min-size", ov_params.min_size, "Minimum superpoint size");
    overseg->add_option("--lambda-n", ov_params.lambda_normal, "Normal term weight");
    overseg->add_option("--lambda-c", ov_params.lambda_color, "Color term weight");

    // pool
    auto* pool = app.add_subcommand("pool", "Average-pool predictions into superpoints");
    std::string pool_scene, pool_pred, pool_sp, pool_out;
    pool->add_option("--scene", pool_scene, "Scene .ssts")->required();
    pool->add_option("--pred", pool_pred, "Predictions .sstp")->required();
    pool->add_option("--sp", pool_sp, "Superpoints sp.json")->required();
    pool->add_option("--out", pool_out, "Output pooled.json")->required();

    // build-tree
    auto* build = app.add_subcommand("build-tree", "Construct the superpoint merge tree");
    std::string bt_scene, bt_pred, bt_sp, bt_out, bt_linkage = "ward";
    std::vector<std::int32_t> bt_background;
    build->add_option("--scene", bt_scene, "Scene .ssts")->required();
    build->add_option("--pred", bt_pred, "Predictions .sstp")->required();
    build->add_option("--sp", bt_sp, "Superpoints sp.json")->required();
    build->add_option("--out", bt_out, "Output tree file")->required();
    build->add_option("--background", bt_background, "Background category ids");
    build->add_option("--linkage", bt_linkage, "ward | centroid")
        ->check(CLI::IsMember({"ward", "centroid"}));

    // propose
    auto* propose = app.add_subcommand("propose", "Traverse the tree into instance proposals");
    std::string pr_tree, pr_classifier = "threshold:0.5", pr_out, pr_refine, pr_scene;
    std::size_t pr_min_size = 50;
    propose->add_option("--tree", pr_tree, "Tree file from build-tree")->required();
    propose->add_option("--classifier", pr_classifier, "threshold:<theta> or mlp:<weights.sstw>");
    propose->add_option("--min-size", pr_min_size, "Minimum proposal size in points");
    propose->add_option("--out", pr_out, "Output proposals .sstr")->required();
    propose->add_option("--refine", pr_refine, "CliqueNet weights .sstw (optional)");
    propose->add_option("--scene", pr_scene, "Scene .ssts for the PLY sidecar (optional)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score proposals against ground truth");
    std::string ev_props, ev_scene, ev_report;
    evaluate->add_option("--props", ev_props, "Proposals .sstr")->required();
    evaluate->add_option("--scene", ev_scene, "Scene .ssts with ground truth")->required();
    evaluate->add_option("--report", ev_report, "Output report.json")->required();

    // run
    auto* run = app.add_subcommand("run", "Run the whole pipeline from a JSON config");
    std::string run_config;
    run->add_option("--config", run_config, "Pipeline config.json")->required();

    // export-ply
    auto* ply = app.add_subcommand("export-ply", "Write a colored ASCII PLY of a scene");
    std::string ply_scene, ply_out, ply_props, ply_color = "color";
    ply->add_option("--scene", ply_scene, "Scene .ssts")->required();
    ply->add_option("--out", ply_out, "Output .ply")->required();
    ply->add_option("--props", ply_props, "Color by proposals .sstr (optional)");
    ply->add_option("--color-by", ply_color, "color | instance")
        ->check(CLI::IsMember({"color", "instance"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(synth_scene_out, synth_pred_out, synth_instances, synth_points,
                             synth_sigma, synth_seed, synth_background, synth_categories, synth_fdim,
                             synth_spacing);
        if (overseg->parsed()) return cmd_oversegment(ov_in, ov_out, ov_params);
        if (pool->parsed()) return cmd_pool(pool_scene, pool_pred, pool_sp, pool_out);
        if (build->parsed())
            return cmd_build_tree(bt_scene, bt_pred, bt_sp, bt_out, bt_background, bt_linkage);
        if (propose->parsed())
            return cmd_propose(pr_tree, pr_classifier, pr_min_size, pr_out, pr_refine, pr_scene);
        if (evaluate->parsed()) return cmd_evaluate(ev_props, ev_scene, ev_report);
        if (run->parsed()) return cmd_run(run_config);
        if (ply->parsed()) return cmd_export_ply(ply_scene, ply_out, ply_props, ply_color);
    } catch (const sst::SstError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
