#pragma once

#include <array>
#include <string>
#include <vector>

#include "motgnn/model.hpp"

namespace motgnn {

// Versioned single-file archive of a trained model: graphs, network
// parameters (batchnorm running statistics included), and the three tree
// ensembles. Weight arrays travel as base64 of little-endian doubles and
// round-trip exactly.
void save_checkpoint(const MOTGNNModel& model,
                     const std::array<std::vector<std::string>, 3>& node_names,
                     const std::array<std::size_t, 3>& n_features, const std::string& path);

struct LoadedCheckpoint {
    MOTGNNModel model;
    std::array<std::vector<std::string>, 3> node_names;
    std::array<std::size_t, 3> n_features{};
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace motgnn
