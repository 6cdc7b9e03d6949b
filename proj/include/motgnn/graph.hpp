#pragma once

#include "motgnn/boosting.hpp"
#include "motgnn/data.hpp"
#include "motgnn/tensor.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace motgnn {

// Undirected feature graph over the columns an ensemble actually splits
// on. The adjacency carries a unit diagonal (self-loops) and edge_count
// counts each off-diagonal pair once plus every self-loop.
struct FeatureGraph {
    std::vector<std::size_t> node_columns; // ascending original column indices
    Tensor2 adjacency;                     // p* x p*, entries 0/1, diagonal 1
    std::size_t edge_count = 0;
    double edge_node_ratio = 0.0;
};

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double ratio = 0.0;
};

// Unordered split-feature pairs of direct parent-child internal nodes;
// pairs on one and the same feature are dropped.
std::set<std::pair<std::size_t, std::size_t>> tree_edges(const Tree& tree);

FeatureGraph build_feature_graph(const GBTEnsemble& ens);

GraphStats graph_stats(const FeatureGraph& graph);

OmicsMatrix reduce_matrix(const OmicsMatrix& m, const FeatureGraph& graph);
Tensor2 reduce_values(const Tensor2& values, const FeatureGraph& graph);

// One `u,v` line per edge (u <= v, original column indices, self-loops
// included), ascending.
void write_edge_list(const FeatureGraph& graph, const std::string& path);

// One `index,name` line per node, in graph order.
void write_node_map(const FeatureGraph& graph, const std::vector<std::string>& feature_names,
                    const std::string& path);

} // namespace motgnn
