#include "motgnn/model.hpp"

#include "motgnn/error.hpp"
#include "motgnn/interpret.hpp"
#include "motgnn/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>

namespace motgnn {

namespace {

// rng stream tags, fixed so every stage draws from its own sequence
constexpr std::uint64_t kInitStream = 100;
constexpr std::uint64_t kShuffleStream = 201;
constexpr std::uint64_t kDropoutStream = 202;
constexpr std::uint64_t kBaselineInitStream = 300;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_both_classes(const std::vector<int>& labels, const std::vector<std::size_t>& part,
                        const char* name) {
    bool has0 = false, has1 = false;
    for (const std::size_t i : part) (labels[i] == 1 ? has1 : has0) = true;
    if (!has0 || !has1)
        throw Error(std::string(name) + " part must contain both classes");
}

std::vector<int> labels_at(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (const std::size_t i : idx) out.push_back(labels[i]);
    return out;
}

void fusion_init(FusionModel& fusion, std::size_t input_width, Rng& rng) {
    nn::dense_init(fusion.layer1, input_width, kEmbedWidth, rng);
    fusion.batchnorm1.init(kEmbedWidth);
    nn::dense_init(fusion.layer2, kEmbedWidth, kEmbedWidth, rng);
    fusion.batchnorm2.init(kEmbedWidth);
    nn::dense_init(fusion.head, kEmbedWidth, 2, rng);
}

void branch_forward(const BranchModel& branch, const Tensor2& x, bool training,
                    double dropout_rate, Rng* rng, BranchCache& c) {
    nn::masked_dense_forward(x, branch.masked, c.a0);
    nn::relu_forward(c.a0, c.r0);
    Rng dummy(0);
    nn::dropout_forward(c.r0, training ? dropout_rate : 0.0, training, rng ? *rng : dummy, c.d0,
                        c.dmask0);
    nn::dense_forward(c.d0, branch.hidden, c.a1);
    nn::relu_forward(c.a1, c.z);
}

void fusion_forward(FusionModel& fusion, const Tensor2& x, bool training,
                    double dropout_rate, Rng* rng, FusionCache& c) {
    Rng dummy(0);
    nn::dense_forward(x, fusion.layer1, c.f1);
    nn::batchnorm_forward(c.f1, fusion.batchnorm1, training, c.b1, training ? &c.bn1 : nullptr);
    nn::relu_forward(c.b1, c.r1);
    nn::dropout_forward(c.r1, training ? dropout_rate : 0.0, training, rng ? *rng : dummy, c.d1,
                        c.m1);
    nn::dense_forward(c.d1, fusion.layer2, c.f2);
    nn::batchnorm_forward(c.f2, fusion.batchnorm2, training, c.b2, training ? &c.bn2 : nullptr);
    nn::relu_forward(c.b2, c.r2);
    nn::dropout_forward(c.r2, training ? dropout_rate : 0.0, training, rng ? *rng : dummy, c.d2,
                        c.m2);
    nn::dense_forward(c.d2, fusion.head, c.logits);
    nn::softmax2_probs(c.logits, c.probs);
}

struct FusionGrads {
    Tensor2 w1, w2, wh;
    std::vector<double> b1, b2, bh;
    std::vector<double> gamma1, beta1, gamma2, beta2;
    Tensor2 input; // gradient with respect to the fusion input
};

void fusion_backward(const FusionModel& fusion, const Tensor2& x, const FusionCache& c,
                     const Tensor2& glogits, FusionGrads& g) {
    Tensor2 gd2, gr2, gb2, gf2, gd1, gr1, gb1, gf1;
    nn::dense_backward(c.d2, fusion.head, glogits, g.wh, g.bh, gd2);
    nn::dropout_backward(gd2, c.m2, gr2);
    nn::relu_backward(c.b2, gr2, gb2);
    nn::batchnorm_backward(c.f2, fusion.batchnorm2, c.bn2, gb2, gf2, g.gamma2, g.beta2);
    nn::dense_backward(c.d1, fusion.layer2, gf2, g.w2, g.b2, gd1);
    nn::dropout_backward(gd1, c.m1, gr1);
    nn::relu_backward(c.b1, gr1, gb1);
    nn::batchnorm_backward(c.f1, fusion.batchnorm1, c.bn1, gb1, gf1, g.gamma1, g.beta1);
    nn::dense_backward(x, fusion.layer1, gf1, g.w1, g.b1, g.input);
}

struct BranchGrads {
    Tensor2 wm, wh;
    std::vector<double> bm, bh;
};

void branch_backward(const BranchModel& branch, const Tensor2& x, const BranchCache& c,
                     const Tensor2& gz, BranchGrads& g) {
    Tensor2 ga1, gd0, gr0, ga0, gx;
    nn::relu_backward(c.a1, gz, ga1);
    nn::dense_backward(c.d0, branch.hidden, ga1, g.wh, g.bh, gd0);
    nn::dropout_backward(gd0, c.dmask0, gr0);
    nn::relu_backward(c.a0, gr0, ga0);
    nn::masked_dense_backward(x, branch.masked, ga0, g.wm, g.bm, gx);
}

// snapshot of everything training mutates
struct ModelState {
    std::array<BranchModel, 3> branches;
    FusionModel fusion;
};

// per-unit mean and biased variance, rows accumulated in ascending order
void population_stats(const Tensor2& x, nn::BatchNormParams& p) {
    const std::size_t n = x.rows, m = x.cols;
#pragma omp parallel for schedule(static)
    for (std::size_t u = 0; u < m; ++u) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x(r, u);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (x(r, u) - mean) * (x(r, u) - mean);
        p.running_mean[u] = mean;
        p.running_var[u] = var / static_cast<double>(n);
    }
}

// Dropout noise inflates the batch statistics the momentum average
// accumulates, severely so when a branch is only a few dozen units wide,
// and inference would then over-normalize and squash every logit. After
// each epoch the running statistics are re-estimated from one
// dropout-free pass over the training part, which is what inference sees.
void refresh_running_stats(FusionModel& fusion, const Tensor2& fusion_input) {
    Tensor2 f1;
    nn::dense_forward(fusion_input, fusion.layer1, f1);
    population_stats(f1, fusion.batchnorm1);
    Tensor2 b1, r1, f2;
    nn::batchnorm_forward(f1, fusion.batchnorm1, false, b1, nullptr);
    nn::relu_forward(b1, r1);
    nn::dense_forward(r1, fusion.layer2, f2);
    population_stats(f2, fusion.batchnorm2);
}

struct EarlyStopLoop {
    double best_strict = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    double best_patience = std::numeric_limits<double>::infinity();
    std::size_t wait = 0;
};

// Shared epoch loop: shuffles, batches (a trailing single-row batch is
// dropped because batchnorm cannot train on it), tracks the strict best
// for restoration and a min_delta-gated counter for patience.
TrainResult run_training_loop(std::size_t n_train, const TrainConfig& config, Rng& shuffle_rng,
                              const std::function<double(const std::vector<std::size_t>&)>& step,
                              const std::function<void()>& refresh_normalization,
                              const std::function<double()>& validation_loss,
                              const std::function<void()>& snapshot,
                              const std::function<void()>& restore) {
    if (n_train < 2) throw Error("train: need at least 2 training rows");
    TrainResult result;
    EarlyStopLoop stop;
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t rows_used = 0;
        for (std::size_t start = 0; start < n_train; start += config.batch_size) {
            const std::size_t end = std::min(n_train, start + config.batch_size);
            if (end - start < 2) break;
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(end));
            loss_sum += step(batch) * static_cast<double>(batch.size());
            rows_used += batch.size();
        }
        const double train_loss = loss_sum / static_cast<double>(rows_used);
        refresh_normalization();
        const double val_loss = validation_loss();
        result.history.push_back({train_loss, val_loss});
        if (val_loss < stop.best_strict) {
            stop.best_strict = val_loss;
            stop.best_epoch = epoch;
            snapshot();
        }
        if (val_loss < stop.best_patience - config.min_delta) {
            stop.best_patience = val_loss;
            stop.wait = 0;
        } else if (++stop.wait >= config.patience) {
            result.stopped_early = true;
            break;
        }
    }
    restore();
    result.best_epoch = stop.best_epoch;
    result.best_validation_loss = stop.best_strict;
    return result;
}

double weight_decay_loss(Tensor2& w, Tensor2& gw, double lambda) {
    return nn::l2_penalty(w.data.data(), gw.data.data(), w.data.size(), lambda);
}

} // namespace

void validate_train_config(const TrainConfig& config) {
    std::vector<std::string> problems;
    if (!(config.learning_rate > 0.0)) problems.push_back("learning_rate must be positive");
    if (config.batch_size < 2) problems.push_back("batch_size must be at least 2");
    if (config.max_epochs == 0) problems.push_back("max_epochs must be positive");
    if (!(config.dropout >= 0.0 && config.dropout < 1.0))
        problems.push_back("dropout must be in [0, 1)");
    if (!(config.l2_lambda >= 0.0)) problems.push_back("l2_lambda must be non-negative");
    if (config.patience == 0) problems.push_back("patience must be at least 1");
    if (!(config.min_delta >= 0.0)) problems.push_back("min_delta must be non-negative");
    if (!problems.empty()) {
        std::string msg = "train config invalid:";
        for (const std::string& p : problems) msg += " " + p + ";";
        msg.pop_back();
        throw Error(msg);
    }
}

MOTGNNModel build_model(const std::array<FeatureGraph, 3>& graphs, std::uint64_t seed) {
    MOTGNNModel model;
    Rng rng(mix_seed(seed, kInitStream));
    for (std::size_t i = 0; i < 3; ++i) {
        if (graphs[i].node_columns.empty()) throw Error("build_model: empty graph");
        nn::masked_dense_init(model.branches[i].masked, graphs[i].adjacency, rng);
        nn::dense_init(model.branches[i].hidden, graphs[i].node_columns.size(), kEmbedWidth, rng);
        model.graphs[i] = graphs[i];
    }
    fusion_init(model.fusion, 3 * kEmbedWidth, rng);
    return model;
}

void model_forward(MOTGNNModel& model, const std::array<const Tensor2*, 3>& inputs,
                   bool training, double dropout_rate, Rng* rng, ForwardCache& cache) {
    const std::size_t n = inputs[0]->rows;
    for (std::size_t i = 0; i < 3; ++i) {
        if (inputs[i]->rows != n) throw Error("forward: modality row counts disagree");
        if (inputs[i]->cols != model.branches[i].masked.mask.rows)
            throw Error("forward: modality width disagrees with branch");
        branch_forward(model.branches[i], *inputs[i], training, dropout_rate, rng,
                       cache.branch[i]);
    }
    cache.concat.resize(n, 3 * kEmbedWidth);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < kEmbedWidth; ++c)
                cache.concat(r, i * kEmbedWidth + c) = cache.branch[i].z(r, c);
    fusion_forward(model.fusion, cache.concat, training, dropout_rate, rng, cache.fusion);
}

TrainResult train_model(MOTGNNModel& model, const std::array<Tensor2, 3>& inputs,
                        const std::vector<int>& labels, const SplitIndices& split,
                        const TrainConfig& config) {
    validate_train_config(config);
    if (labels.size() != inputs[0].rows) throw Error("train: label count disagrees with rows");
    check_both_classes(labels, split.train, "training");
    check_both_classes(labels, split.validation, "validation");

    std::array<Tensor2, 3> train_x, val_x;
    for (std::size_t i = 0; i < 3; ++i) {
        train_x[i] = take_rows(inputs[i], split.train);
        val_x[i] = take_rows(inputs[i], split.validation);
    }
    const std::vector<int> train_y = labels_at(labels, split.train);
    const std::vector<int> val_y = labels_at(labels, split.validation);

    std::array<std::vector<std::uint32_t>, 3> active;
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < 3; ++i) {
        active[i] = nn::masked_active_flat(model.branches[i].masked);
        sizes.push_back(model.branches[i].masked.weight.size());
        sizes.push_back(model.branches[i].masked.bias.size());
        sizes.push_back(model.branches[i].hidden.weight.size());
        sizes.push_back(model.branches[i].hidden.bias.size());
    }
    sizes.insert(sizes.end(),
                 {model.fusion.layer1.weight.size(), model.fusion.layer1.bias.size(),
                  model.fusion.batchnorm1.gamma.size(), model.fusion.batchnorm1.beta.size(),
                  model.fusion.layer2.weight.size(), model.fusion.layer2.bias.size(),
                  model.fusion.batchnorm2.gamma.size(), model.fusion.batchnorm2.beta.size(),
                  model.fusion.head.weight.size(), model.fusion.head.bias.size()});
    nn::Adam adam;
    adam.init(sizes);

    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
    Rng dropout_rng(mix_seed(config.seed, kDropoutStream));

    ForwardCache cache;
    std::array<BranchGrads, 3> bg;
    FusionGrads fg;
    Tensor2 glogits, probs;
    ModelState best{model.branches, model.fusion};

    auto step = [&](const std::vector<std::size_t>& rows) {
        std::array<Tensor2, 3> bx;
        std::array<const Tensor2*, 3> bp{};
        for (std::size_t i = 0; i < 3; ++i) {
            bx[i] = take_rows(train_x[i], rows);
            bp[i] = &bx[i];
        }
        const std::vector<int> by = labels_at(train_y, rows);
        model_forward(model, bp, true, config.dropout, &dropout_rng, cache);
        double loss = nn::softmax2_bce(cache.fusion.logits, by, probs, glogits);
        fusion_backward(model.fusion, cache.concat, cache.fusion, glogits, fg);
        for (std::size_t i = 0; i < 3; ++i) {
            Tensor2 gz(rows.size(), kEmbedWidth);
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < kEmbedWidth; ++c)
                    gz(r, c) = fg.input(r, i * kEmbedWidth + c);
            branch_backward(model.branches[i], bx[i], cache.branch[i], gz, bg[i]);
        }
        for (std::size_t i = 0; i < 3; ++i) {
            loss += weight_decay_loss(model.branches[i].masked.weight, bg[i].wm, config.l2_lambda);
            loss += weight_decay_loss(model.branches[i].hidden.weight, bg[i].wh, config.l2_lambda);
        }
        loss += weight_decay_loss(model.fusion.layer1.weight, fg.w1, config.l2_lambda);
        loss += weight_decay_loss(model.fusion.layer2.weight, fg.w2, config.l2_lambda);
        loss += weight_decay_loss(model.fusion.head.weight, fg.wh, config.l2_lambda);

        std::vector<nn::ParamView> views;
        for (std::size_t i = 0; i < 3; ++i) {
            BranchModel& b = model.branches[i];
            views.push_back({b.masked.weight.data.data(), bg[i].wm.data.data(),
                             b.masked.weight.size(), &active[i]});
            views.push_back({b.masked.bias.data(), bg[i].bm.data(), b.masked.bias.size(), nullptr});
            views.push_back({b.hidden.weight.data.data(), bg[i].wh.data.data(),
                             b.hidden.weight.size(), nullptr});
            views.push_back({b.hidden.bias.data(), bg[i].bh.data(), b.hidden.bias.size(), nullptr});
        }
        FusionModel& f = model.fusion;
        views.push_back({f.layer1.weight.data.data(), fg.w1.data.data(), f.layer1.weight.size(), nullptr});
        views.push_back({f.layer1.bias.data(), fg.b1.data(), f.layer1.bias.size(), nullptr});
        views.push_back({f.batchnorm1.gamma.data(), fg.gamma1.data(), f.batchnorm1.gamma.size(), nullptr});
        views.push_back({f.batchnorm1.beta.data(), fg.beta1.data(), f.batchnorm1.beta.size(), nullptr});
        views.push_back({f.layer2.weight.data.data(), fg.w2.data.data(), f.layer2.weight.size(), nullptr});
        views.push_back({f.layer2.bias.data(), fg.b2.data(), f.layer2.bias.size(), nullptr});
        views.push_back({f.batchnorm2.gamma.data(), fg.gamma2.data(), f.batchnorm2.gamma.size(), nullptr});
        views.push_back({f.batchnorm2.beta.data(), fg.beta2.data(), f.batchnorm2.beta.size(), nullptr});
        views.push_back({f.head.weight.data.data(), fg.wh.data.data(), f.head.weight.size(), nullptr});
        views.push_back({f.head.bias.data(), fg.bh.data(), f.head.bias.size(), nullptr});
        adam.step(views, config.learning_rate);
        return loss;
    };

    ForwardCache rcache;
    auto refresh = [&]() {
        std::array<const Tensor2*, 3> tp{&train_x[0], &train_x[1], &train_x[2]};
        model_forward(model, tp, false, 0.0, nullptr, rcache);
        refresh_running_stats(model.fusion, rcache.concat);
    };
    ForwardCache vcache;
    Tensor2 vprobs, vglogits;
    auto validation_loss = [&]() {
        std::array<const Tensor2*, 3> vp{&val_x[0], &val_x[1], &val_x[2]};
        model_forward(model, vp, false, 0.0, nullptr, vcache);
        return nn::softmax2_bce(vcache.fusion.logits, val_y, vprobs, vglogits);
    };
    auto snapshot = [&]() { best = {model.branches, model.fusion}; };
    auto restore = [&]() {
        model.branches = best.branches;
        model.fusion = best.fusion;
    };
    return run_training_loop(split.train.size(), config, shuffle_rng, step, refresh,
                             validation_loss, snapshot, restore);
}

Prediction predict(const MOTGNNModel& model, const std::array<const Tensor2*, 3>& inputs) {
    ForwardCache cache;
    // inference mode performs no writes through the reference
    model_forward(const_cast<MOTGNNModel&>(model), inputs, false, 0.0, nullptr, cache);
    Prediction out;
    const std::size_t n = cache.fusion.probs.rows;
    out.labels.reserve(n);
    out.prob1.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = cache.fusion.probs(i, 1);
        out.prob1.push_back(p1);
        out.labels.push_back(p1 >= 0.5 ? 1 : 0);
    }
    return out;
}

SplitMetrics evaluate_metrics(const std::vector<int>& truth, const Prediction& pred) {
    SplitMetrics m;
    m.accuracy = accuracy(truth, pred.labels);
    m.auc = auc(truth, pred.prob1);
    m.f1 = f1_score(truth, pred.labels);
    return m;
}

PipelineResult run_pipeline(const MultiOmicsDataset& dataset, const SplitIndices& split,
                            const GBTConfig& gbt_config, const TrainConfig& train_config) {
    PipelineResult result;
    const std::vector<int> train_y = labels_at(dataset.labels, split.train);

    auto t0 = std::chrono::steady_clock::now();
    try {
        for (std::size_t i = 0; i < 3; ++i) {
            const Tensor2 xt = take_rows(dataset.modalities[i].values, split.train);
            result.model.ensembles[i] = fit_ensemble(xt, train_y, gbt_config).ensemble;
        }
    } catch (...) {
        rethrow_with_stage("ensemble fit");
    }
    result.timing.ensemble_fit = seconds_since(t0);

    std::array<Tensor2, 3> reduced;
    t0 = std::chrono::steady_clock::now();
    std::array<FeatureGraph, 3> graphs;
    try {
        for (std::size_t i = 0; i < 3; ++i) {
            graphs[i] = build_feature_graph(result.model.ensembles[i]);
            reduced[i] = reduce_values(dataset.modalities[i].values, graphs[i]);
        }
    } catch (...) {
        rethrow_with_stage("graph build");
    }
    result.timing.graph_build = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    try {
        MOTGNNModel built = build_model(graphs, train_config.seed);
        built.ensembles = std::move(result.model.ensembles);
        result.model = std::move(built);
        result.training = train_model(result.model, reduced, dataset.labels, split, train_config);
    } catch (...) {
        rethrow_with_stage("train");
    }
    result.timing.nn_train = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    try {
        std::array<Tensor2, 3> test_x;
        std::array<const Tensor2*, 3> tp{};
        for (std::size_t i = 0; i < 3; ++i) {
            test_x[i] = take_rows(reduced[i], split.test);
            tp[i] = &test_x[i];
        }
        const Prediction pred = predict(result.model, tp);
        result.test = evaluate_metrics(labels_at(dataset.labels, split.test), pred);
        result.rig = interpret::relative_graph_importance(result.model.fusion,
                                                          {kEmbedWidth, kEmbedWidth, kEmbedWidth});
    } catch (...) {
        rethrow_with_stage("evaluate");
    }
    result.timing.eval = seconds_since(t0);
    return result;
}

Tensor2 concat_modalities(const MultiOmicsDataset& dataset) {
    const std::size_t n = dataset.n_samples();
    std::size_t total = 0;
    for (const OmicsMatrix& m : dataset.modalities) total += m.values.cols;
    Tensor2 out(n, total);
    std::size_t offset = 0;
    for (const OmicsMatrix& m : dataset.modalities) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m.values.cols; ++j) out(i, offset + j) = m.values(i, j);
        offset += m.values.cols;
    }
    return out;
}

BaselineResult baseline_gbt(const MultiOmicsDataset& dataset, const SplitIndices& split,
                            const GBTConfig& config) {
    BaselineResult result;
    const Tensor2 all = concat_modalities(dataset);
    const std::vector<int> train_y = labels_at(dataset.labels, split.train);
    check_both_classes(dataset.labels, split.train, "training");

    auto t0 = std::chrono::steady_clock::now();
    const GBTEnsemble ens = fit_ensemble(take_rows(all, split.train), train_y, config).ensemble;
    result.fit_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const std::vector<double> logits = predict_logit(ens, take_rows(all, split.test));
    Prediction pred;
    for (const double z : logits) {
        const double p = 1.0 / (1.0 + std::exp(-z));
        pred.prob1.push_back(p);
        pred.labels.push_back(p >= 0.5 ? 1 : 0);
    }
    result.test = evaluate_metrics(labels_at(dataset.labels, split.test), pred);
    result.eval_seconds = seconds_since(t0);
    return result;
}

BaselineResult baseline_dfn(const MultiOmicsDataset& dataset, const SplitIndices& split,
                            const TrainConfig& config) {
    validate_train_config(config);
    check_both_classes(dataset.labels, split.train, "training");
    check_both_classes(dataset.labels, split.validation, "validation");
    BaselineResult result;
    const Tensor2 all = concat_modalities(dataset);
    const Tensor2 train_x = take_rows(all, split.train);
    const Tensor2 val_x = take_rows(all, split.validation);
    const std::vector<int> train_y = labels_at(dataset.labels, split.train);
    const std::vector<int> val_y = labels_at(dataset.labels, split.validation);

    auto t0 = std::chrono::steady_clock::now();
    FusionModel net;
    Rng init_rng(mix_seed(config.seed, kBaselineInitStream));
    fusion_init(net, all.cols, init_rng);

    nn::Adam adam;
    adam.init({net.layer1.weight.size(), net.layer1.bias.size(), net.batchnorm1.gamma.size(),
               net.batchnorm1.beta.size(), net.layer2.weight.size(), net.layer2.bias.size(),
               net.batchnorm2.gamma.size(), net.batchnorm2.beta.size(), net.head.weight.size(),
               net.head.bias.size()});
    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
    Rng dropout_rng(mix_seed(config.seed, kDropoutStream));

    FusionCache cache;
    FusionGrads fg;
    Tensor2 probs, glogits;
    FusionModel best = net;

    auto step = [&](const std::vector<std::size_t>& rows) {
        const Tensor2 bx = take_rows(train_x, rows);
        const std::vector<int> by = labels_at(train_y, rows);
        fusion_forward(net, bx, true, config.dropout, &dropout_rng, cache);
        double loss = nn::softmax2_bce(cache.logits, by, probs, glogits);
        fusion_backward(net, bx, cache, glogits, fg);
        loss += weight_decay_loss(net.layer1.weight, fg.w1, config.l2_lambda);
        loss += weight_decay_loss(net.layer2.weight, fg.w2, config.l2_lambda);
        loss += weight_decay_loss(net.head.weight, fg.wh, config.l2_lambda);
        adam.step({{net.layer1.weight.data.data(), fg.w1.data.data(), net.layer1.weight.size(), nullptr},
                   {net.layer1.bias.data(), fg.b1.data(), net.layer1.bias.size(), nullptr},
                   {net.batchnorm1.gamma.data(), fg.gamma1.data(), net.batchnorm1.gamma.size(), nullptr},
                   {net.batchnorm1.beta.data(), fg.beta1.data(), net.batchnorm1.beta.size(), nullptr},
                   {net.layer2.weight.data.data(), fg.w2.data.data(), net.layer2.weight.size(), nullptr},
                   {net.layer2.bias.data(), fg.b2.data(), net.layer2.bias.size(), nullptr},
                   {net.batchnorm2.gamma.data(), fg.gamma2.data(), net.batchnorm2.gamma.size(), nullptr},
                   {net.batchnorm2.beta.data(), fg.beta2.data(), net.batchnorm2.beta.size(), nullptr},
                   {net.head.weight.data.data(), fg.wh.data.data(), net.head.weight.size(), nullptr},
                   {net.head.bias.data(), fg.bh.data(), net.head.bias.size(), nullptr}},
                  config.learning_rate);
        return loss;
    };
    FusionCache vcache;
    Tensor2 vprobs, vglogits;
    auto validation_loss = [&]() {
        fusion_forward(net, val_x, false, 0.0, nullptr, vcache);
        return nn::softmax2_bce(vcache.logits, val_y, vprobs, vglogits);
    };
    run_training_loop(split.train.size(), config, shuffle_rng, step,
                      [&]() { refresh_running_stats(net, train_x); }, validation_loss,
                      [&]() { best = net; }, [&]() { net = best; });
    result.fit_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    FusionCache tcache;
    fusion_forward(net, take_rows(all, split.test), false, 0.0, nullptr, tcache);
    Prediction pred;
    for (std::size_t i = 0; i < tcache.probs.rows; ++i) {
        const double p1 = tcache.probs(i, 1);
        pred.prob1.push_back(p1);
        pred.labels.push_back(p1 >= 0.5 ? 1 : 0);
    }
    result.test = evaluate_metrics(labels_at(dataset.labels, split.test), pred);
    result.eval_seconds = seconds_since(t0);
    return result;
}

}  // namespace motgnn
