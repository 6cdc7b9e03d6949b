#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "motgnn/config.hpp"
#include "motgnn/experiment.hpp"

namespace motgnn {

// report.json layout:
//   config      resolved key=value map plus the dataset seed
//   repeats     [{seed, accuracy, auc, f1, rig:[3],
//                 timing:{ensemble_fit, graph_build, nn_train, eval}}]
//   aggregate   {accuracy|auc|f1: {mean, sd, ci_low, ci_high}}
//   rig_mean    [3], mean relative graph importance across repeats
//   biomarkers  {modality1|modality2|modality3: [{rank, feature, score}]}
// The timing numbers are wall-clock and the only fields expected to vary
// between otherwise identical runs.
nlohmann::ordered_json build_report(const RunConfig& config, std::uint64_t data_seed,
                                    const ExperimentReport& experiment);

// Structural check of the layout above; throws on any violation.
void validate_report(const nlohmann::ordered_json& report);

// validate_report then an atomic write.
void write_report(const nlohmann::ordered_json& report, const std::string& path);

}  // namespace motgnn
