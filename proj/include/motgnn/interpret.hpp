#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "motgnn/graph.hpp"
#include "motgnn/model.hpp"

namespace motgnn::interpret {

// Per-node importance of one branch; parallel arrays in graph node order.
struct ImportanceScores {
    std::vector<double> scores;
    std::vector<std::size_t> columns; // original column indices
    std::vector<std::string> names;
};

struct Biomarker {
    std::size_t column = 0;
    std::string name;
    double score = 0.0;
};

// score_j = sum of |W(j, u)| over the mask-1 entries of row j of the
// branch's masked weight matrix. feature_names indexes original columns.
ImportanceScores feature_importance(const BranchModel& branch, const FeatureGraph& graph,
                                    const std::vector<std::string>& feature_names);

// Descending by score, ties by ascending original column; min(k, p*) rows.
std::vector<Biomarker> rank_biomarkers(const ImportanceScores& scores, std::size_t k);

// L1 mass of each branch's row block of the first fusion weight matrix,
// normalized to sum 1. A fully zero matrix splits evenly.
std::array<double, 3> relative_graph_importance(const FusionModel& fusion,
                                                const std::array<std::size_t, 3>& widths);

// Mean score per original column across repeats; a feature absent from a
// repeat's graph contributes zero to that repeat.
std::vector<double> consensus_scores(const std::vector<ImportanceScores>& per_repeat,
                                     std::size_t n_features);

}  // namespace motgnn::interpret
