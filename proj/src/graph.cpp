#include "motgnn/graph.hpp"

#include "motgnn/error.hpp"
#include "motgnn/io.hpp"

#include <algorithm>
#include <unordered_map>

namespace motgnn {

std::set<std::pair<std::size_t, std::size_t>> tree_edges(const Tree& tree) {
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) continue;
        for (const std::int32_t child_id : {node.left, node.right}) {
            const TreeNode& child = tree.nodes[child_id];
            if (child.is_leaf()) continue;
            const std::size_t a = node.split_feature, b = child.split_feature;
            if (a == b) continue;
            edges.emplace(std::min(a, b), std::max(a, b));
        }
    }
    return edges;
}

FeatureGraph build_feature_graph(const GBTEnsemble& ens) {
    FeatureGraph graph;
    graph.node_columns = used_features(ens);
    const std::size_t p = graph.node_columns.size();

    std::unordered_map<std::size_t, std::size_t> compact;
    for (std::size_t i = 0; i < p; ++i) compact[graph.node_columns[i]] = i;

    graph.adjacency.resize(p, p);
    for (std::size_t i = 0; i < p; ++i) graph.adjacency(i, i) = 1.0;
    for (const Tree& tree : ens.trees)
        for (const auto& [a, b] : tree_edges(tree)) {
            const std::size_t i = compact.at(a), j = compact.at(b);
            graph.adjacency(i, j) = 1.0;
            graph.adjacency(j, i) = 1.0;
        }

    std::size_t offdiag = 0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (i != j && graph.adjacency(i, j) == 1.0) ++offdiag;
    graph.edge_count = p + offdiag / 2;
    graph.edge_node_ratio = static_cast<double>(graph.edge_count) / static_cast<double>(p);
    return graph;
}

GraphStats graph_stats(const FeatureGraph& graph) {
    return {graph.node_columns.size(), graph.edge_count, graph.edge_node_ratio};
}

Tensor2 reduce_values(const Tensor2& values, const FeatureGraph& graph) {
    for (std::size_t c : graph.node_columns)
        if (c >= values.cols)
            throw Error("reduce: graph column " + std::to_string(c) + " outside matrix with " +
                        std::to_string(values.cols) + " columns");
    return take_cols(values, graph.node_columns);
}

OmicsMatrix reduce_matrix(const OmicsMatrix& m, const FeatureGraph& graph) {
    OmicsMatrix out;
    out.sample_ids = m.sample_ids;
    out.values = reduce_values(m.values, graph);
    out.feature_names.reserve(graph.node_columns.size());
    for (std::size_t c : graph.node_columns) out.feature_names.push_back(m.feature_names[c]);
    return out;
}

void write_edge_list(const FeatureGraph& graph, const std::string& path) {
    const std::size_t p = graph.node_columns.size();
    std::string out;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j)
            if (graph.adjacency(i, j) == 1.0) {
                out += std::to_string(graph.node_columns[i]);
                out += ',';
                out += std::to_string(graph.node_columns[j]);
                out += '\n';
            }
    atomic_write_text(path, out);
}

void write_node_map(const FeatureGraph& graph, const std::vector<std::string>& feature_names,
                    const std::string& path) {
    std::string out;
    for (const std::size_t c : graph.node_columns) {
        if (c >= feature_names.size()) throw Error("node map: column index outside feature names");
        out += std::to_string(c);
        out += ',';
        out += feature_names[c];
        out += '\n';
    }
    atomic_write_text(path, out);
}

} // namespace motgnn
