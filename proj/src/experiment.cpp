#include "motgnn/experiment.hpp"

#include "motgnn/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace motgnn {

namespace {

double loss_key(double loss) {
    return std::isnan(loss) ? std::numeric_limits<double>::infinity() : loss;
}

} // namespace

ExperimentReport run_experiment(const MultiOmicsDataset& dataset, const ExperimentConfig& config) {
    if (config.n_repeats < 2) throw Error("experiment: need at least 2 repeats");
    if (config.top_k == 0) throw Error("experiment: top_k must be at least 1");
    if (config.jobs < 1) throw Error("experiment: jobs must be at least 1");
    validate_train_config(config.train);

    const std::size_t n = config.n_repeats;
    std::vector<RepeatOutcome> outcomes(n);
    std::array<std::vector<interpret::ImportanceScores>, 3> scores;
    for (auto& s : scores) s.resize(n);
    std::vector<std::exception_ptr> failures(n);

    // the kept model converges to the (loss, seed)-minimal repeat no matter
    // in which order workers finish
    std::mutex best_mutex;
    MOTGNNModel best_model;
    std::uint64_t best_seed = std::numeric_limits<std::uint64_t>::max();
    double best_loss = std::numeric_limits<double>::infinity();
    bool have_best = false;

    auto run_one = [&](std::size_t r) {
        try {
            SplitIndices split = stratified_split(dataset.labels, config.split_ratios,
                                                  static_cast<std::uint64_t>(r));
            TrainConfig tc = config.train;
            tc.seed = static_cast<std::uint64_t>(r);
            PipelineResult pr = run_pipeline(dataset, split, config.gbt, tc);
            outcomes[r] = {static_cast<std::uint64_t>(r), pr.test, pr.rig, pr.timing,
                           pr.training.best_validation_loss};
            for (std::size_t i = 0; i < 3; ++i)
                scores[i][r] = interpret::feature_importance(pr.model.branches[i], pr.model.graphs[i],
                                                             dataset.modalities[i].feature_names);
            const double key = loss_key(pr.training.best_validation_loss);
            std::lock_guard<std::mutex> lock(best_mutex);
            if (!have_best || key < best_loss || (key == best_loss && r < best_seed)) {
                best_model = std::move(pr.model);
                best_seed = r;
                best_loss = key;
                have_best = true;
            }
        } catch (...) {
            failures[r] = std::current_exception();
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n);
    if (workers <= 1) {
        for (std::size_t r = 0; r < n; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (std::size_t r = next.fetch_add(1); r < n; r = next.fetch_add(1)) run_one(r);
            });
        for (std::thread& t : pool) t.join();
    }
    for (std::size_t r = 0; r < n; ++r)
        if (failures[r]) {
            try {
                std::rethrow_exception(failures[r]);
            } catch (...) {
                rethrow_with_stage("repeat " + std::to_string(r));
            }
        }

    ExperimentReport report;
    report.repeats = std::move(outcomes);
    std::vector<double> acc, auc_values, f1;
    for (const RepeatOutcome& o : report.repeats) {
        acc.push_back(o.metrics.accuracy);
        auc_values.push_back(o.metrics.auc);
        f1.push_back(o.metrics.f1);
        for (std::size_t i = 0; i < 3; ++i) report.rig_mean[i] += o.rig[i];
    }
    for (double& v : report.rig_mean) v /= static_cast<double>(n);
    report.accuracy = summarize(acc);
    report.auc = summarize(auc_values);
    report.f1 = summarize(f1);

    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t p = dataset.modalities[i].values.cols;
        interpret::ImportanceScores consensus;
        consensus.scores = interpret::consensus_scores(scores[i], p);
        consensus.columns.resize(p);
        std::iota(consensus.columns.begin(), consensus.columns.end(), 0);
        consensus.names = dataset.modalities[i].feature_names;
        report.biomarkers[i] = interpret::rank_biomarkers(consensus, config.top_k);
    }

    report.best_model = std::move(best_model);
    report.best_seed = best_seed;
    for (std::size_t i = 0; i < 3; ++i) {
        const FeatureGraph& g = report.best_model.graphs[i];
        report.best_node_names[i].reserve(g.node_columns.size());
        for (const std::size_t col : g.node_columns)
            report.best_node_names[i].push_back(dataset.modalities[i].feature_names[col]);
    }
    return report;
}

}  // namespace motgnn
