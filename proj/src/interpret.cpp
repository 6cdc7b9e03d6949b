#include "motgnn/interpret.hpp"

#include "motgnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace motgnn::interpret {

ImportanceScores feature_importance(const BranchModel& branch, const FeatureGraph& graph,
                                    const std::vector<std::string>& feature_names) {
    const std::size_t p = graph.node_columns.size();
    if (branch.masked.mask.rows != p || branch.masked.mask.cols != p)
        throw Error("feature_importance: branch width disagrees with graph");
    ImportanceScores out;
    out.scores.assign(p, 0.0);
    out.columns = graph.node_columns;
    out.names.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (const std::uint32_t u : branch.masked.active[j]) s += std::fabs(branch.masked.weight(j, u));
        out.scores[j] = s;
        const std::size_t col = graph.node_columns[j];
        if (col >= feature_names.size())
            throw Error("feature_importance: node column outside the name table");
        out.names.push_back(feature_names[col]);
    }
    return out;
}

std::vector<Biomarker> rank_biomarkers(const ImportanceScores& scores, std::size_t k) {
    if (k == 0) throw Error("rank_biomarkers: k must be at least 1");
    const std::size_t p = scores.scores.size();
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
        return scores.columns[a] < scores.columns[b];
    });
    std::vector<Biomarker> out;
    const std::size_t take = std::min(k, p);
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const std::size_t j = order[r];
        out.push_back({scores.columns[j], scores.names[j], scores.scores[j]});
    }
    return out;
}

std::array<double, 3> relative_graph_importance(const FusionModel& fusion,
                                                const std::array<std::size_t, 3>& widths) {
    const std::size_t total_rows = widths[0] + widths[1] + widths[2];
    if (fusion.layer1.weight.rows != total_rows)
        throw Error("relative_graph_importance: fusion input width disagrees with branch widths");
    std::array<double, 3> mass{};
    std::size_t offset = 0;
    for (std::size_t b = 0; b < 3; ++b) {
        double s = 0.0;
        for (std::size_t r = offset; r < offset + widths[b]; ++r)
            for (std::size_t c = 0; c < fusion.layer1.weight.cols; ++c)
                s += std::fabs(fusion.layer1.weight(r, c));
        mass[b] = s;
        offset += widths[b];
    }
    const double total = mass[0] + mass[1] + mass[2];
    if (total == 0.0) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return {mass[0] / total, mass[1] / total, mass[2] / total};
}

std::vector<double> consensus_scores(const std::vector<ImportanceScores>& per_repeat,
                                     std::size_t n_features) {
    if (per_repeat.empty()) throw Error("consensus_scores: no repeats");
    std::vector<double> out(n_features, 0.0);
    for (const ImportanceScores& rep : per_repeat) {
        for (std::size_t j = 0; j < rep.scores.size(); ++j) {
            if (rep.columns[j] >= n_features)
                throw Error("consensus_scores: column outside the feature range");
            out[rep.columns[j]] += rep.scores[j];
        }
    }
    const double n = static_cast<double>(per_repeat.size());
    for (double& v : out) v /= n;
    return out;
}

}  // namespace motgnn::interpret
