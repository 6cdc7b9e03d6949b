#include "motgnn/cli.hpp"

#include "motgnn/checkpoint.hpp"
#include "motgnn/error.hpp"
#include "motgnn/experiment.hpp"
#include "motgnn/graph.hpp"
#include "motgnn/interpret.hpp"
#include "motgnn/io.hpp"
#include "motgnn/metrics.hpp"
#include "motgnn/report.hpp"

#include <json.hpp>

#include <filesystem>
#include <utility>

namespace motgnn {

using nlohmann::ordered_json;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string rankings_csv(const std::array<std::vector<interpret::Biomarker>, 3>& per_modality) {
    std::string csv = "modality,rank,feature,score\n";
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t r = 0; r < per_modality[i].size(); ++r) {
            const auto& b = per_modality[i][r];
            csv += std::to_string(i + 1) + "," + std::to_string(r + 1) + "," + b.name + "," +
                   format_double(b.score) + "\n";
        }
    return csv;
}

ordered_json summary_json(const Summary& s) {
    return {{"mean", s.mean}, {"sd", s.sd}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
}

}  // namespace

MultiOmicsDataset prepare_dataset(const RunConfig& config, std::uint64_t seed) {
    if (config.use_synth) return generate_synthetic(config.synth, seed).dataset;

    std::array<OmicsMatrix, 3> m;
    std::map<std::string, int> labels;
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < 3; ++i) {
        try {
            m[i] = load_omics_csv(config.omics_paths[i]);
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
    }
    try {
        labels = load_labels_csv(config.labels_path);
    } catch (const Error& e) {
        problems.push_back(e.what());
    }
    if (!problems.empty()) {
        std::string msg = "data:";
        for (const std::string& s : problems) msg += " " + s + ";";
        msg.pop_back();
        throw Error(msg);
    }

    AlignResult aligned = align_samples(m[0], m[1], m[2], labels);
    validate_dataset(aligned.dataset);
    for (std::size_t i = 0; i < 3; ++i)
        aligned.dataset.modalities[i] = minmax_normalize(aligned.dataset.modalities[i]).first;
    return std::move(aligned.dataset);
}

void cmd_synth(const RunConfig& config, std::uint64_t seed, const std::string& out_dir) {
    if (!config.use_synth)
        throw Error("synth: the config selects CSV input; synthesis wants synth.* keys");
    const SynthResult sr = generate_synthetic(config.synth, seed);
    for (std::size_t i = 0; i < 3; ++i)
        write_omics_csv(sr.dataset.modalities[i],
                        join_path(out_dir, "omics" + std::to_string(i + 1) + ".csv"));
    write_labels_csv(sr.dataset.modalities[0].sample_ids, sr.dataset.labels,
                     join_path(out_dir, "labels.csv"));
    ordered_json truth;
    for (std::size_t i = 0; i < 3; ++i)
        truth["modality" + std::to_string(i + 1)] = sr.planted[i];
    atomic_write_text(join_path(out_dir, "ground_truth.json"), truth.dump(1) + "\n");
}

void cmd_experiment(const RunConfig& config, std::uint64_t seed, int jobs,
                    const std::string& out_dir) {
    const MultiOmicsDataset dataset = prepare_dataset(config, seed);
    ExperimentConfig ec;
    ec.n_repeats = config.n_repeats;
    ec.top_k = config.top_k;
    ec.split_ratios = config.split_ratios;
    ec.gbt = config.gbt;
    ec.train = config.train;
    ec.jobs = jobs;
    const ExperimentReport er = run_experiment(dataset, ec);

    write_report(build_report(config, seed, er), join_path(out_dir, "report.json"));
    atomic_write_text(join_path(out_dir, "rankings.csv"), rankings_csv(er.biomarkers));

    std::array<std::size_t, 3> n_features{};
    for (std::size_t i = 0; i < 3; ++i) {
        n_features[i] = dataset.modalities[i].feature_names.size();
        const std::string tag = "modality" + std::to_string(i + 1);
        write_edge_list(er.best_model.graphs[i], join_path(out_dir, tag + "_edges.csv"));
        write_node_map(er.best_model.graphs[i], dataset.modalities[i].feature_names,
                       join_path(out_dir, tag + "_nodes.csv"));
    }
    save_checkpoint(er.best_model, er.best_node_names, n_features,
                    join_path(out_dir, "checkpoint.json"));
}

void cmd_baseline(const RunConfig& config, const std::string& which, std::uint64_t seed,
                  const std::string& out_dir) {
    if (which != "gbt" && which != "dfn")
        throw Error("baseline: unknown baseline '" + which + "' (expected gbt or dfn)");
    const MultiOmicsDataset dataset = prepare_dataset(config, seed);

    ordered_json repeats = ordered_json::array();
    std::vector<double> acc, auc_v, f1;
    for (std::size_t r = 0; r < config.n_repeats; ++r) {
        const SplitIndices split = stratified_split(dataset.labels, config.split_ratios, r);
        BaselineResult res;
        if (which == "gbt") {
            res = baseline_gbt(dataset, split, config.gbt);
        } else {
            TrainConfig tc = config.train;
            tc.seed = r;
            res = baseline_dfn(dataset, split, tc);
        }
        acc.push_back(res.test.accuracy);
        auc_v.push_back(res.test.auc);
        f1.push_back(res.test.f1);
        repeats.push_back({{"seed", r},
                           {"accuracy", res.test.accuracy},
                           {"auc", res.test.auc},
                           {"f1", res.test.f1},
                           {"timing", {{"fit", res.fit_seconds}, {"eval", res.eval_seconds}}}});
    }

    ordered_json report;
    ordered_json cfg;
    cfg["seed"] = seed;
    for (const auto& [key, value] : config_items(config)) cfg[key] = value;
    report["config"] = std::move(cfg);
    report["baseline"] = which;
    report["repeats"] = std::move(repeats);
    report["aggregate"] = {{"accuracy", summary_json(summarize(acc))},
                           {"auc", summary_json(summarize(auc_v))},
                           {"f1", summary_json(summarize(f1))}};
    atomic_write_text(join_path(out_dir, "baseline_report.json"), report.dump(1) + "\n");
}

void cmd_explain(const std::string& checkpoint_path, std::size_t top_k,
                 const std::string& out_dir) {
    if (top_k == 0) throw Error("explain: top_k must be at least 1");
    const LoadedCheckpoint lc = load_checkpoint(checkpoint_path);

    std::array<std::vector<interpret::Biomarker>, 3> ranked;
    for (std::size_t i = 0; i < 3; ++i) {
        // name table over original columns, populated at the graph nodes only
        std::vector<std::string> names(lc.n_features[i]);
        const auto& cols = lc.model.graphs[i].node_columns;
        for (std::size_t j = 0; j < cols.size(); ++j) names[cols[j]] = lc.node_names[i][j];
        const auto scores =
            interpret::feature_importance(lc.model.branches[i], lc.model.graphs[i], names);
        ranked[i] = interpret::rank_biomarkers(scores, top_k);
    }
    atomic_write_text(join_path(out_dir, "rankings.csv"), rankings_csv(ranked));

    const std::array<double, 3> rig = interpret::relative_graph_importance(
        lc.model.fusion, {kEmbedWidth, kEmbedWidth, kEmbedWidth});
    ordered_json rj;
    for (std::size_t i = 0; i < 3; ++i) rj["modality" + std::to_string(i + 1)] = rig[i];
    atomic_write_text(join_path(out_dir, "rig.json"), rj.dump(1) + "\n");
}

}  // namespace motgnn
