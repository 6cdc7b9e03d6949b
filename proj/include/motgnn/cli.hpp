#pragma once

#include <cstdint>
#include <string>

#include "motgnn/config.hpp"
#include "motgnn/data.hpp"

namespace motgnn {

// Loads and normalizes the configured CSV inputs, or generates the
// synthetic dataset. `seed` only matters for synthesis.
MultiOmicsDataset prepare_dataset(const RunConfig& config, std::uint64_t seed);

// Writes omics1..3.csv, labels.csv and ground_truth.json (planted column
// indices per modality) into out_dir.
void cmd_synth(const RunConfig& config, std::uint64_t seed, const std::string& out_dir);

// Full run: report.json, rankings.csv, the best model's checkpoint.json
// and its modality{1..3}_{edges,nodes}.csv. Repeats may fan across `jobs`
// threads; outputs are identical for any job count, and only the timing
// numbers inside report.json vary between runs.
void cmd_experiment(const RunConfig& config, std::uint64_t seed, int jobs,
                    const std::string& out_dir);

// One baseline ("gbt" or "dfn") over the same dataset and the same split
// seeds 0..repeats-1 as cmd_experiment, for paired comparison. Writes
// baseline_report.json: {config, baseline, repeats:[{seed, accuracy, auc,
// f1, timing:{fit, eval}}], aggregate}.
void cmd_baseline(const RunConfig& config, const std::string& which, std::uint64_t seed,
                  const std::string& out_dir);

// Re-derives rankings.csv and rig.json from a stored checkpoint alone.
// top_k larger than a branch's node count lists every node.
void cmd_explain(const std::string& checkpoint_path, std::size_t top_k,
                 const std::string& out_dir);

}  // namespace motgnn
