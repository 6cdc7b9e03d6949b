#pragma once

#include "motgnn/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace motgnn {

struct GBTConfig {
    std::size_t num_trees = 100;
    std::size_t max_depth = 6;
    double lambda = 1.0;       // L2 on leaf weights
    double gamma = 0.0;        // minimum gain to keep a split
    double learning_rate = 0.3;
    double min_child_hessian = 1.0;
};

struct TreeNode {
    std::int32_t left = -1; // -1 marks a leaf
    std::int32_t right = -1;
    std::uint32_t split_feature = 0;
    double threshold = 0.0;
    double weight = 0.0; // leaf value, unscaled

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    // raw leaf value for one sample row (left branch takes x < threshold)
    double eval(const double* x) const;
};

struct GBTEnsemble {
    std::vector<Tree> trees;
    double learning_rate = 0.3;
    double base_logit = 0.0;
    std::size_t num_features = 0;
};

struct GBTFitResult {
    GBTEnsemble ensemble;
    std::vector<double> train_loss; // index 0 is the pre-training loss ln 2
};

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// p = sigmoid(logit); g = p - y, h = p(1-p)
void logistic_grad_hess(const std::vector<int>& y, const std::vector<double>& logit,
                        std::vector<double>& g, std::vector<double>& h);

// Exact greedy scan over every feature and every midpoint between
// consecutive distinct values among `rows`. Ties resolve to the lowest
// feature index, then the lowest threshold.
std::optional<SplitCandidate> best_split(const Tensor2& X, const std::vector<std::size_t>& rows,
                                         const std::vector<double>& g, const std::vector<double>& h,
                                         double lambda, double gamma, double min_child_hessian);

// Level-wise greedy growth over all rows of X to config.max_depth;
// leaf weight w = -G/(H+lambda).
Tree fit_tree(const Tensor2& X, const std::vector<double>& g, const std::vector<double>& h,
              const GBTConfig& config);

GBTFitResult fit_ensemble(const Tensor2& X, const std::vector<int>& y, const GBTConfig& config);

std::vector<double> predict_logit(const GBTEnsemble& ens, const Tensor2& X);
std::vector<double> predict_proba(const GBTEnsemble& ens, const Tensor2& X);

// Ascending column indices split on anywhere in the ensemble; an ensemble
// of bare leaves is a degenerate-training error.
std::vector<std::size_t> used_features(const GBTEnsemble& ens);

// mean of max(z,0) - z*y + log(1+exp(-|z|)), the overflow-safe BCE
double logistic_loss(const std::vector<int>& y, const std::vector<double>& logit);

std::string ensemble_to_json(const GBTEnsemble& ens);
GBTEnsemble ensemble_from_json(const std::string& text);

} // namespace motgnn
