#include "motgnn/nn.hpp"

#include "motgnn/error.hpp"
#include "motgnn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace motgnn::nn {

namespace {

void check_bias(std::size_t cols, std::size_t bias, const char* what) {
    if (cols != bias) throw Error(std::string(what) + ": bias length disagrees with width");
}

void add_bias_rows(Tensor2& y, const std::vector<double>& b) {
    for (std::size_t i = 0; i < y.rows; ++i) {
        double* row = y.row(i);
        for (std::size_t k = 0; k < y.cols; ++k) row[k] += b[k];
    }
}

} // namespace

void MaskedDenseParams::set_mask(const Tensor2& m) {
    if (m.rows != m.cols || m.rows == 0) throw Error("set_mask: mask must be square and non-empty");
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            const double v = m(i, j);
            if (v != 0.0 && v != 1.0) throw Error("set_mask: mask entries must be 0 or 1");
            if (v != m(j, i)) throw Error("set_mask: mask must be symmetric");
        }
        if (m(i, i) != 1.0) throw Error("set_mask: mask diagonal must be 1");
    }
    mask = m;
    weight.resize(m.rows, m.cols);
    bias.assign(m.cols, 0.0);
    active.assign(m.cols, {});
    for (std::size_t u = 0; u < m.cols; ++u)
        for (std::size_t j = 0; j < m.rows; ++j)
            if (m(j, u) == 1.0) active[u].push_back(static_cast<std::uint32_t>(j));
}

void BatchNormParams::init(std::size_t units) {
    gamma.assign(units, 1.0);
    beta.assign(units, 0.0);
    running_mean.assign(units, 0.0);
    running_var.assign(units, 1.0);
}

void dense_init(DenseParams& p, std::size_t in, std::size_t out, Rng& rng) {
    if (in == 0 || out == 0) throw Error("dense_init: zero-sized layer");
    p.weight.resize(in, out);
    p.bias.assign(out, 0.0);
    const double lim = std::sqrt(6.0 / static_cast<double>(in));
    for (double& w : p.weight.data) w = (2.0 * rng.uniform() - 1.0) * lim;
}

void masked_dense_init(MaskedDenseParams& p, const Tensor2& mask, Rng& rng) {
    p.set_mask(mask);
    // fan-in of a unit is its unmasked input count, so sparse units start wider
    for (std::size_t u = 0; u < p.mask.cols; ++u) {
        const double lim = std::sqrt(6.0 / static_cast<double>(p.active[u].size()));
        for (const std::uint32_t j : p.active[u])
            p.weight(j, u) = (2.0 * rng.uniform() - 1.0) * lim;
    }
}

void dense_forward(const Tensor2& x, const DenseParams& p, Tensor2& y) {
    check_bias(p.weight.cols, p.bias.size(), "dense_forward");
    kernels::matmul(x, p.weight, y);
    add_bias_rows(y, p.bias);
}

void dense_backward(const Tensor2& x, const DenseParams& p, const Tensor2& gy,
                    Tensor2& gw, std::vector<double>& gb, Tensor2& gx) {
    require_shape(gy, x.rows, p.weight.cols, "dense_backward: upstream gradient");
    kernels::matmul_tn(x, gy, gw);
    kernels::col_sums(gy, gb);
    kernels::matmul_nt(gy, p.weight, gx);
}

void masked_dense_forward(const Tensor2& x, const MaskedDenseParams& p, Tensor2& y) {
    const std::size_t n = x.rows, w = p.mask.cols;
    if (x.cols != p.mask.rows) throw Error("masked_dense_forward: input width disagrees with mask");
    check_bias(w, p.bias.size(), "masked_dense_forward");
    y.resize(n, w);
    const std::int64_t rows = static_cast<std::int64_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t ii = 0; ii < rows; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* xrow = x.row(i);
        double* yrow = y.row(i);
        for (std::size_t u = 0; u < w; ++u) {
            double s = 0.0;
            for (const std::uint32_t j : p.active[u]) s += xrow[j] * p.weight(j, u);
            yrow[u] = s + p.bias[u];
        }
    }
}

void masked_dense_backward(const Tensor2& x, const MaskedDenseParams& p, const Tensor2& gy,
                           Tensor2& gw, std::vector<double>& gb, Tensor2& gx) {
    const std::size_t n = x.rows, w = p.mask.cols;
    require_shape(gy, n, w, "masked_dense_backward: upstream gradient");
    if (x.cols != p.mask.rows) throw Error("masked_dense_backward: input width disagrees with mask");
    gw.resize(p.mask.rows, w);
    std::fill(gw.data.begin(), gw.data.end(), 0.0);
    const std::int64_t units = static_cast<std::int64_t>(w);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t uu = 0; uu < units; ++uu) {
        const std::size_t u = static_cast<std::size_t>(uu);
        for (const std::uint32_t j : p.active[u]) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x(i, j) * gy(i, u);
            gw(j, u) = s;
        }
    }
    kernels::col_sums(gy, gb);
    gx.resize(n, p.mask.rows);
    const std::int64_t rows = static_cast<std::int64_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t ii = 0; ii < rows; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* grow = gy.row(i);
        double* xrow = gx.row(i);
        for (std::size_t j = 0; j < p.mask.rows; ++j) {
            double s = 0.0;
            for (const std::uint32_t u : p.active[j]) s += grow[u] * p.weight(j, u);
            xrow[j] = s;
        }
    }
}

void relu_forward(const Tensor2& x, Tensor2& y) {
    y.resize(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
}

void relu_backward(const Tensor2& x, const Tensor2& gy, Tensor2& gx) {
    require_shape(gy, x.rows, x.cols, "relu_backward: upstream gradient");
    gx.resize(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) gx.data[i] = x.data[i] > 0.0 ? gy.data[i] : 0.0;
}

void dropout_forward(const Tensor2& x, double rate, bool training, Rng& rng,
                     Tensor2& y, Tensor2& mask) {
    if (!(rate >= 0.0 && rate < 1.0)) throw Error("dropout_forward: rate must be in [0, 1)");
    y.resize(x.rows, x.cols);
    mask.resize(x.rows, x.cols);
    if (!training || rate == 0.0) {
        mask.fill(1.0);
        y.data = x.data;
        return;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double m = rng.uniform() < rate ? 0.0 : keep_scale;
        mask.data[i] = m;
        y.data[i] = x.data[i] * m;
    }
}

void dropout_backward(const Tensor2& gy, const Tensor2& mask, Tensor2& gx) {
    require_shape(gy, mask.rows, mask.cols, "dropout_backward: upstream gradient");
    gx.resize(gy.rows, gy.cols);
    for (std::size_t i = 0; i < gy.data.size(); ++i) gx.data[i] = gy.data[i] * mask.data[i];
}

void batchnorm_forward(const Tensor2& x, BatchNormParams& p, bool training,
                       Tensor2& y, BatchNormCache* cache) {
    const std::size_t n = x.rows, w = x.cols;
    if (p.gamma.size() != w) throw Error("batchnorm_forward: parameter width disagrees with input");
    y.resize(n, w);
    if (!training) {
        for (std::size_t j = 0; j < w; ++j) {
            const double inv = 1.0 / std::sqrt(p.running_var[j] + p.eps);
            for (std::size_t i = 0; i < n; ++i)
                y(i, j) = p.gamma[j] * (x(i, j) - p.running_mean[j]) * inv + p.beta[j];
        }
        return;
    }
    if (n < 2) throw Error("batchnorm_forward: training batch needs at least 2 rows");
    if (cache == nullptr) throw Error("batchnorm_forward: training mode needs a cache");
    cache->mean.assign(w, 0.0);
    cache->inv_std.assign(w, 0.0);
    cache->xhat.resize(n, w);
    const double nd = static_cast<double>(n);
    for (std::size_t j = 0; j < w; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += x(i, j);
        const double mean = sum / nd;
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x(i, j) - mean;
            sq += d * d;
        }
        const double var = sq / nd;
        const double inv = 1.0 / std::sqrt(var + p.eps);
        cache->mean[j] = mean;
        cache->inv_std[j] = inv;
        for (std::size_t i = 0; i < n; ++i) {
            const double xh = (x(i, j) - mean) * inv;
            cache->xhat(i, j) = xh;
            y(i, j) = p.gamma[j] * xh + p.beta[j];
        }
        p.running_mean[j] = p.momentum * p.running_mean[j] + (1.0 - p.momentum) * mean;
        p.running_var[j] = p.momentum * p.running_var[j] + (1.0 - p.momentum) * var;
    }
}

void batchnorm_backward(const Tensor2& x, const BatchNormParams& p,
                        const BatchNormCache& cache, const Tensor2& gy,
                        Tensor2& gx, std::vector<double>& ggamma, std::vector<double>& gbeta) {
    const std::size_t n = x.rows, w = x.cols;
    require_shape(gy, n, w, "batchnorm_backward: upstream gradient");
    gx.resize(n, w);
    ggamma.assign(w, 0.0);
    gbeta.assign(w, 0.0);
    const double nd = static_cast<double>(n);
    for (std::size_t j = 0; j < w; ++j) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double gxh = gy(i, j) * p.gamma[j];
            s1 += gxh;
            s2 += gxh * cache.xhat(i, j);
            ggamma[j] += gy(i, j) * cache.xhat(i, j);
            gbeta[j] += gy(i, j);
        }
        const double scale = cache.inv_std[j] / nd;
        for (std::size_t i = 0; i < n; ++i) {
            const double gxh = gy(i, j) * p.gamma[j];
            gx(i, j) = scale * (nd * gxh - s1 - cache.xhat(i, j) * s2);
        }
    }
}

void softmax2_probs(const Tensor2& logits, Tensor2& probs) {
    if (logits.cols != 2) throw Error("softmax2: logits must have 2 columns");
    probs.resize(logits.rows, 2);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double z0 = logits(i, 0), z1 = logits(i, 1);
        const double m = std::max(z0, z1);
        const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
        const double s = e0 + e1;
        probs(i, 0) = e0 / s;
        probs(i, 1) = e1 / s;
    }
}

double softmax2_bce(const Tensor2& logits, const std::vector<int>& labels,
                    Tensor2& probs, Tensor2& glogits) {
    if (labels.size() != logits.rows) throw Error("softmax2_bce: label count disagrees with rows");
    softmax2_probs(logits, probs);
    glogits.resize(logits.rows, 2);
    constexpr double kLo = 1e-12, kHi = 1.0 - 1e-12;
    const double nd = static_cast<double>(logits.rows);
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1) throw Error("softmax2_bce: labels must be 0 or 1");
        const double p1 = probs(i, 1);
        const double pc = std::clamp(p1, kLo, kHi);
        loss += y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
        // a clamped row is flat in the loss, so its gradient is zero
        const double g = (p1 > kLo && p1 < kHi) ? (p1 - static_cast<double>(y)) / nd : 0.0;
        glogits(i, 0) = -g;
        glogits(i, 1) = g;
    }
    return loss / nd;
}

double l2_penalty(double* weights, double* grads, std::size_t n, double lambda) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += weights[i] * weights[i];
        grads[i] += 2.0 * lambda * weights[i];
    }
    return lambda * sum;
}

void Adam::init(const std::vector<std::size_t>& sizes) {
    t_ = 0;
    slots_.assign(sizes.size(), {});
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        slots_[k].m.assign(sizes[k], 0.0);
        slots_[k].v.assign(sizes[k], 0.0);
    }
}

void Adam::step(const std::vector<ParamView>& views, double lr) {
    if (views.size() != slots_.size()) throw Error("adam: view count disagrees with slots");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < views.size(); ++k) {
        const ParamView& view = views[k];
        Slot& slot = slots_[k];
        if (view.size != slot.m.size()) throw Error("adam: view size disagrees with slot");
        auto update = [&](std::size_t i) {
            const double g = view.grad[i];
            slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * g;
            slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * g * g;
            const double mhat = slot.m[i] / c1;
            const double vhat = slot.v[i] / c2;
            view.value[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
        };
        if (view.active != nullptr) {
            for (const std::uint32_t i : *view.active) update(i);
        } else {
            for (std::size_t i = 0; i < view.size; ++i) update(i);
        }
    }
}

std::vector<double> finite_diff_grad(const std::function<double()>& loss,
                                     double* w, std::size_t n, double h) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double old = w[i];
        w[i] = old + h;
        const double fp = loss();
        w[i] = old - h;
        const double fm = loss();
        w[i] = old;
        out[i] = (fp - fm) / (2.0 * h);
    }
    return out;
}

std::vector<std::uint32_t> masked_active_flat(const MaskedDenseParams& p) {
    std::vector<std::uint32_t> out;
    for (std::size_t j = 0; j < p.mask.rows; ++j)
        for (std::size_t u = 0; u < p.mask.cols; ++u)
            if (p.mask(j, u) == 1.0) out.push_back(static_cast<std::uint32_t>(j * p.mask.cols + u));
    return out;
}

}  // namespace motgnn::nn
