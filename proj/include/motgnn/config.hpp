#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "motgnn/boosting.hpp"
#include "motgnn/data.hpp"
#include "motgnn/model.hpp"

namespace motgnn {

// Resolved run configuration. The text format is flat `key=value` lines;
// `#` starts a comment. Exactly one data source must be present: either
// all four data.* paths or a synth.* block.
//
//   data.omics1 data.omics2 data.omics3 data.labels   CSV paths
//   synth.n synth.p1..p3 synth.k1..k3 synth.effect synth.imbalance
//   gbt.trees gbt.max_depth gbt.learning_rate gbt.lambda gbt.gamma
//   gbt.min_child_hessian
//   train.learning_rate train.batch_size train.max_epochs train.dropout
//   train.l2_lambda train.patience train.min_delta
//   experiment.repeats experiment.top_k
//   split.train split.validation split.test
//
// Unknown keys, duplicate keys, and malformed values are hard errors;
// every problem in the file is reported in one message.
struct RunConfig {
    bool use_synth = true;
    std::array<std::string, 3> omics_paths;
    std::string labels_path;
    SynthConfig synth;
    GBTConfig gbt;
    TrainConfig train;
    std::size_t n_repeats = 20;
    std::size_t top_k = 30;
    std::array<double, 3> split_ratios = {0.6, 0.2, 0.2};
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Every key with its resolved value, in documented order; the provenance
// block of report.json. Numbers use the shortest exact decimal form.
std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& config);

}  // namespace motgnn
