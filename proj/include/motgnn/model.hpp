#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "motgnn/boosting.hpp"
#include "motgnn/data.hpp"
#include "motgnn/graph.hpp"
#include "motgnn/nn.hpp"
#include "motgnn/rng.hpp"
#include "motgnn/tensor.hpp"

namespace motgnn {

inline constexpr std::size_t kEmbedWidth = 64;

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 500;
    double dropout = 0.5;
    double l2_lambda = 0.01;
    std::size_t patience = 10;
    double min_delta = 0.001;
    std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& config);

// One omics branch: adjacency-masked layer followed by the embedding layer
// whose output Z_i feeds the fusion network.
struct BranchModel {
    nn::MaskedDenseParams masked;
    nn::DenseParams hidden; // p* -> kEmbedWidth
};

// Two 64-unit blocks (dense, batchnorm, relu, dropout) and a 2-unit head.
// layer1's input width is 3*kEmbedWidth for the fused model and the raw
// feature count for the standalone feedforward baseline.
struct FusionModel {
    nn::DenseParams layer1;
    nn::BatchNormParams batchnorm1;
    nn::DenseParams layer2;
    nn::BatchNormParams batchnorm2;
    nn::DenseParams head;
};

struct MOTGNNModel {
    std::array<BranchModel, 3> branches;
    FusionModel fusion;
    std::array<FeatureGraph, 3> graphs;
    std::array<GBTEnsemble, 3> ensembles; // retained for provenance
};

struct BranchCache {
    Tensor2 a0, r0, d0, dmask0, a1, z;
};

struct FusionCache {
    Tensor2 f1, b1, r1, d1, m1;
    nn::BatchNormCache bn1;
    Tensor2 f2, b2, r2, d2, m2;
    nn::BatchNormCache bn2;
    Tensor2 logits, probs;
};

struct ForwardCache {
    std::array<BranchCache, 3> branch;
    Tensor2 concat;
    FusionCache fusion;
};

// Inference ignores rng and rate and leaves the model untouched; training
// draws dropout masks from rng in a fixed order (branch 0..2 then the two
// fusion blocks) and folds batch statistics into the batchnorm running
// estimates, hence the mutable model.
void model_forward(MOTGNNModel& model, const std::array<const Tensor2*, 3>& inputs,
                   bool training, double dropout_rate, Rng* rng, ForwardCache& cache);

struct EpochRecord {
    double train_loss = 0.0;
    double validation_loss = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_validation_loss = 0.0;
    bool stopped_early = false;
};

struct SplitMetrics {
    double accuracy = 0.0;
    double auc = 0.0;
    double f1 = 0.0;
};

struct PipelineTiming {
    double ensemble_fit = 0.0;
    double graph_build = 0.0;
    double nn_train = 0.0;
    double eval = 0.0;
};

struct PipelineResult {
    MOTGNNModel model;
    TrainResult training;
    SplitMetrics test;
    std::array<double, 3> rig{};
    PipelineTiming timing;
};

MOTGNNModel build_model(const std::array<FeatureGraph, 3>& graphs, std::uint64_t seed);

// inputs hold the reduced matrices for every sample; the split picks the
// rows. Early stopping restores the parameters of the epoch with the
// lowest validation loss (batchnorm running statistics included).
TrainResult train_model(MOTGNNModel& model, const std::array<Tensor2, 3>& inputs,
                        const std::vector<int>& labels, const SplitIndices& split,
                        const TrainConfig& config);

struct Prediction {
    std::vector<int> labels;
    std::vector<double> prob1;
};

// Class 1 wins at probability >= 0.5.
Prediction predict(const MOTGNNModel& model, const std::array<const Tensor2*, 3>& inputs);

SplitMetrics evaluate_metrics(const std::vector<int>& truth, const Prediction& pred);

// Fits the boosting and graph stages on the training part only, trains the
// fused model, and scores the test part. Stage failures carry the stage name.
PipelineResult run_pipeline(const MultiOmicsDataset& dataset, const SplitIndices& split,
                            const GBTConfig& gbt_config, const TrainConfig& train_config);

struct BaselineResult {
    SplitMetrics test;
    double fit_seconds = 0.0;
    double eval_seconds = 0.0;
};

// Both baselines consume the column-wise concatenation of the three
// modalities on the same split.
BaselineResult baseline_gbt(const MultiOmicsDataset& dataset, const SplitIndices& split,
                            const GBTConfig& config);
BaselineResult baseline_dfn(const MultiOmicsDataset& dataset, const SplitIndices& split,
                            const TrainConfig& config);

Tensor2 concat_modalities(const MultiOmicsDataset& dataset);

}  // namespace motgnn
