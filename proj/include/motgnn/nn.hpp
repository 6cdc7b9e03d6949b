#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "motgnn/rng.hpp"
#include "motgnn/tensor.hpp"

namespace motgnn::nn {

// Dense layer, weights laid out in x out so y = x W + b.
struct DenseParams {
    Tensor2 weight;
    std::vector<double> bias;
};

// Square dense layer with a fixed 0/1 connectivity mask. Only mask-1 weights
// exist logically; off-mask entries of weight stay exactly zero. active[u]
// lists the input indices wired to output unit u, ascending.
struct MaskedDenseParams {
    Tensor2 weight;
    std::vector<double> bias;
    Tensor2 mask;
    std::vector<std::vector<std::uint32_t>> active;

    // Validates the mask (0/1 entries, unit diagonal, symmetric), rebuilds
    // the per-unit index lists, and zeroes off-mask weights.
    void set_mask(const Tensor2& m);
};

struct BatchNormParams {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    void init(std::size_t units);
};

// Saved activations a backward pass needs.
struct BatchNormCache {
    std::vector<double> mean;
    std::vector<double> inv_std;
    Tensor2 xhat;
};

void dense_init(DenseParams& p, std::size_t in, std::size_t out, Rng& rng);
void masked_dense_init(MaskedDenseParams& p, const Tensor2& mask, Rng& rng);

void dense_forward(const Tensor2& x, const DenseParams& p, Tensor2& y);
void dense_backward(const Tensor2& x, const DenseParams& p, const Tensor2& gy,
                    Tensor2& gw, std::vector<double>& gb, Tensor2& gx);

void masked_dense_forward(const Tensor2& x, const MaskedDenseParams& p, Tensor2& y);
void masked_dense_backward(const Tensor2& x, const MaskedDenseParams& p, const Tensor2& gy,
                           Tensor2& gw, std::vector<double>& gb, Tensor2& gx);

void relu_forward(const Tensor2& x, Tensor2& y);
// Subgradient at exactly 0 is taken as 0.
void relu_backward(const Tensor2& x, const Tensor2& gy, Tensor2& gx);

// Inverted dropout: kept entries scale by 1/(1-rate). In inference mode (or
// rate 0) the input passes through and the mask is all ones. mask holds the
// applied factors so backward is gx = gy * mask.
void dropout_forward(const Tensor2& x, double rate, bool training, Rng& rng,
                     Tensor2& y, Tensor2& mask);
void dropout_backward(const Tensor2& gy, const Tensor2& mask, Tensor2& gx);

// Training mode normalizes by batch statistics (biased variance) and folds
// them into the running estimates; requires at least 2 rows. Inference mode
// uses the running estimates and needs no cache.
void batchnorm_forward(const Tensor2& x, BatchNormParams& p, bool training,
                       Tensor2& y, BatchNormCache* cache);
void batchnorm_backward(const Tensor2& x, const BatchNormParams& p,
                        const BatchNormCache& cache, const Tensor2& gy,
                        Tensor2& gx, std::vector<double>& ggamma, std::vector<double>& gbeta);

// Two-logit softmax cross-entropy, mean over rows. probs gets the class
// probabilities (rows sum to 1), glogits the gradient of the mean loss.
// Probabilities are clamped to [1e-12, 1-1e-12] inside the log; a clamped
// row contributes zero gradient.
double softmax2_bce(const Tensor2& logits, const std::vector<int>& labels,
                    Tensor2& probs, Tensor2& glogits);
void softmax2_probs(const Tensor2& logits, Tensor2& probs);

// One flat parameter array paired with its gradient. When active is non-null
// the optimizer touches only those indices; everything else is frozen.
struct ParamView {
    double* value = nullptr;
    const double* grad = nullptr;
    std::size_t size = 0;
    const std::vector<std::uint32_t>* active = nullptr;
};

// Adds 2*lambda*w to the gradient buffer and returns lambda * sum w^2.
// Callers pass weight matrices only; biases and batchnorm stay unpenalized.
double l2_penalty(double* weights, double* grads, std::size_t n, double lambda);

class Adam {
  public:
    Adam() = default;
    Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // Fixes the slot layout; views passed to step must match these sizes.
    void init(const std::vector<std::size_t>& sizes);
    void step(const std::vector<ParamView>& views, double lr);
    [[nodiscard]] std::size_t steps_taken() const { return t_; }

  private:
    struct Slot {
        std::vector<double> m;
        std::vector<double> v;
    };
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::size_t t_ = 0;
    std::vector<Slot> slots_;
};

// Central-difference gradient of loss() with respect to the n values at w,
// perturbing one coordinate at a time with the given step.
std::vector<double> finite_diff_grad(const std::function<double()>& loss,
                                     double* w, std::size_t n, double h = 1e-5);

// Flattened active-index list of a masked layer, row-major over mask-1
// positions of the weight matrix. Used to restrict Adam to live weights.
std::vector<std::uint32_t> masked_active_flat(const MaskedDenseParams& p);

}  // namespace motgnn::nn
