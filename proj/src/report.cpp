#include "motgnn/report.hpp"

#include "motgnn/error.hpp"
#include "motgnn/io.hpp"

namespace motgnn {

using nlohmann::ordered_json;

namespace {

const char* kModalityKeys[3] = {"modality1", "modality2", "modality3"};
const char* kMetricKeys[3] = {"accuracy", "auc", "f1"};
const char* kTimingKeys[4] = {"ensemble_fit", "graph_build", "nn_train", "eval"};

ordered_json summary_json(const Summary& s) {
    return {{"mean", s.mean}, {"sd", s.sd}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
}

void fail(const std::string& what) { throw Error("report schema: " + what); }

void require_number(const ordered_json& j, const std::string& where) {
    if (!j.is_number()) fail(where + " is not a number");
}

void require_rig(const ordered_json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) fail(where + " is not a 3-vector");
    for (const auto& v : j) require_number(v, where + " entry");
}

}  // namespace

ordered_json build_report(const RunConfig& config, std::uint64_t data_seed,
                          const ExperimentReport& experiment) {
    ordered_json report;
    ordered_json cfg;
    cfg["seed"] = data_seed;
    for (const auto& [key, value] : config_items(config)) cfg[key] = value;
    report["config"] = std::move(cfg);

    ordered_json repeats = ordered_json::array();
    for (const RepeatOutcome& r : experiment.repeats) {
        ordered_json row;
        row["seed"] = r.seed;
        row["accuracy"] = r.metrics.accuracy;
        row["auc"] = r.metrics.auc;
        row["f1"] = r.metrics.f1;
        row["rig"] = r.rig;
        row["timing"] = {{"ensemble_fit", r.timing.ensemble_fit},
                         {"graph_build", r.timing.graph_build},
                         {"nn_train", r.timing.nn_train},
                         {"eval", r.timing.eval}};
        repeats.push_back(std::move(row));
    }
    report["repeats"] = std::move(repeats);

    report["aggregate"] = {{"accuracy", summary_json(experiment.accuracy)},
                           {"auc", summary_json(experiment.auc)},
                           {"f1", summary_json(experiment.f1)}};
    report["rig_mean"] = experiment.rig_mean;

    ordered_json biomarkers;
    for (std::size_t i = 0; i < 3; ++i) {
        ordered_json rows = ordered_json::array();
        for (std::size_t r = 0; r < experiment.biomarkers[i].size(); ++r) {
            const auto& b = experiment.biomarkers[i][r];
            rows.push_back({{"rank", r + 1}, {"feature", b.name}, {"score", b.score}});
        }
        biomarkers[kModalityKeys[i]] = std::move(rows);
    }
    report["biomarkers"] = std::move(biomarkers);

    validate_report(report);
    return report;
}

void validate_report(const ordered_json& report) {
    if (!report.is_object()) fail("root is not an object");
    for (const char* key : {"config", "repeats", "aggregate", "rig_mean", "biomarkers"})
        if (!report.contains(key)) fail(std::string("missing ") + key);

    if (!report["config"].is_object() || report["config"].empty()) fail("config block is empty");

    const auto& repeats = report["repeats"];
    if (!repeats.is_array() || repeats.empty()) fail("repeats is not a non-empty array");
    for (std::size_t i = 0; i < repeats.size(); ++i) {
        const auto& row = repeats[i];
        const std::string where = "repeats[" + std::to_string(i) + "]";
        if (!row.is_object()) fail(where + " is not an object");
        if (!row.contains("seed") || !row["seed"].is_number_unsigned())
            fail(where + ".seed is not a non-negative integer");
        for (const char* m : kMetricKeys) {
            if (!row.contains(m)) fail(where + " lacks " + m);
            require_number(row[m], where + "." + m);
        }
        if (!row.contains("rig")) fail(where + " lacks rig");
        require_rig(row["rig"], where + ".rig");
        if (!row.contains("timing") || !row["timing"].is_object()) fail(where + ".timing missing");
        for (const char* t : kTimingKeys) {
            if (!row["timing"].contains(t)) fail(where + ".timing lacks " + t);
            require_number(row["timing"][t], where + ".timing." + t);
        }
    }

    const auto& agg = report["aggregate"];
    if (!agg.is_object()) fail("aggregate is not an object");
    for (const char* m : kMetricKeys) {
        if (!agg.contains(m) || !agg[m].is_object()) fail(std::string("aggregate lacks ") + m);
        for (const char* f : {"mean", "sd", "ci_low", "ci_high"}) {
            if (!agg[m].contains(f)) fail(std::string("aggregate.") + m + " lacks " + f);
            require_number(agg[m][f], std::string("aggregate.") + m + "." + f);
        }
    }

    require_rig(report["rig_mean"], "rig_mean");

    const auto& bio = report["biomarkers"];
    if (!bio.is_object()) fail("biomarkers is not an object");
    for (const char* mk : kModalityKeys) {
        if (!bio.contains(mk) || !bio[mk].is_array())
            fail(std::string("biomarkers lacks the ") + mk + " array");
        const auto& rows = bio[mk];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = rows[r];
            const std::string where = std::string("biomarkers.") + mk + "[" + std::to_string(r) + "]";
            if (!row.is_object()) fail(where + " is not an object");
            if (!row.contains("rank") || !row["rank"].is_number_unsigned() ||
                row["rank"].get<std::size_t>() != r + 1)
                fail(where + ".rank is not " + std::to_string(r + 1));
            if (!row.contains("feature") || !row["feature"].is_string())
                fail(where + ".feature is not a string");
            if (!row.contains("score")) fail(where + " lacks score");
            require_number(row["score"], where + ".score");
        }
    }
}

void write_report(const ordered_json& report, const std::string& path) {
    validate_report(report);
    atomic_write_text(path, report.dump(1) + "\n");
}

}  // namespace motgnn
