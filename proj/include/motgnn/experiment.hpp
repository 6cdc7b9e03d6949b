#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "motgnn/interpret.hpp"
#include "motgnn/metrics.hpp"
#include "motgnn/model.hpp"

namespace motgnn {

struct ExperimentConfig {
    std::size_t n_repeats = 20;
    std::size_t top_k = 30;
    std::array<double, 3> split_ratios = {0.6, 0.2, 0.2};
    GBTConfig gbt;
    TrainConfig train; // its seed is replaced by the repeat seed
    int jobs = 1;
};

struct RepeatOutcome {
    std::uint64_t seed = 0;
    SplitMetrics metrics;
    std::array<double, 3> rig{};
    PipelineTiming timing;
    double best_validation_loss = 0.0;
};

struct ExperimentReport {
    std::vector<RepeatOutcome> repeats; // seed order
    Summary accuracy, auc, f1;
    std::array<double, 3> rig_mean{};
    // consensus ranking: mean importance across repeats, absent features
    // scoring zero in the repeats whose graphs skip them
    std::array<std::vector<interpret::Biomarker>, 3> biomarkers;
    MOTGNNModel best_model; // lowest best-epoch validation loss, ties to the lowest seed
    std::array<std::vector<std::string>, 3> best_node_names;
    std::uint64_t best_seed = 0;
};

// Seeds 0..n_repeats-1, one stratified split per seed. Repeats may run on
// `jobs` worker threads; results merge in seed order, so the report is
// identical for any job count.
ExperimentReport run_experiment(const MultiOmicsDataset& dataset, const ExperimentConfig& config);

}  // namespace motgnn
