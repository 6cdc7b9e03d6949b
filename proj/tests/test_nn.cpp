#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "motgnn/error.hpp"
#include "motgnn/nn.hpp"
#include "motgnn/rng.hpp"
#include "motgnn/tensor.hpp"

using motgnn::Rng;
using motgnn::Tensor2;
namespace nn = motgnn::nn;

namespace {

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

void check_close(const std::vector<double>& analytic, const double* numeric, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(analytic[i], numeric[i]) < 1e-4);
}

Tensor2 random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Tensor2 t;
    t.resize(r, c);
    for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * scale;
    return t;
}

// random symmetric 0/1 mask with unit diagonal
Tensor2 random_mask(std::size_t p, Rng& rng, double density) {
    Tensor2 m;
    m.resize(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        m(i, i) = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            const double bit = rng.uniform() < density ? 1.0 : 0.0;
            m(i, j) = bit;
            m(j, i) = bit;
        }
    }
    return m;
}

double weighted_sum(const Tensor2& y, const Tensor2& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * r.data[i];
    return s;
}

std::vector<double> fd(const std::function<double()>& loss, double* w, std::size_t n) {
    return nn::finite_diff_grad(loss, w, n, 1e-5);
}

} // namespace

TEST_CASE("dense layer gradients match finite differences") {
    Rng rng(11);
    Tensor2 x = random_matrix(7, 5, rng);
    nn::DenseParams p;
    nn::dense_init(p, 5, 4, rng);
    Tensor2 r = random_matrix(7, 4, rng);

    Tensor2 y, gw, gx;
    std::vector<double> gb;
    auto loss = [&]() {
        nn::dense_forward(x, p, y);
        return weighted_sum(y, r);
    };
    loss();
    nn::dense_backward(x, p, r, gw, gb, gx);

    auto fw = fd(loss, p.weight.data.data(), p.weight.data.size());
    check_close(gw.data, fw.data(), fw.size());
    auto fb = fd(loss, p.bias.data(), p.bias.size());
    check_close(gb, fb.data(), fb.size());
    auto fx = fd(loss, x.data.data(), x.data.size());
    check_close(gx.data, fx.data(), fx.size());
}

TEST_CASE("masked dense gradients match finite differences and vanish off-mask") {
    Rng rng(12);
    const std::size_t p = 8;
    Tensor2 mask = random_mask(p, rng, 0.35);
    nn::MaskedDenseParams layer;
    nn::masked_dense_init(layer, mask, rng);
    Tensor2 x = random_matrix(6, p, rng);
    Tensor2 r = random_matrix(6, p, rng);

    Tensor2 y, gw, gx;
    std::vector<double> gb;
    auto loss = [&]() {
        nn::masked_dense_forward(x, layer, y);
        return weighted_sum(y, r);
    };
    loss();
    nn::masked_dense_backward(x, layer, r, gw, gb, gx);

    auto fw = fd(loss, layer.weight.data.data(), layer.weight.data.size());
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t u = 0; u < p; ++u) {
            if (mask(j, u) == 1.0) {
                CHECK(rel_err(gw(j, u), fw[j * p + u]) < 1e-4);
            } else {
                CHECK(gw(j, u) == 0.0);
                // off-mask weights do not participate in the forward pass
                CHECK(fw[j * p + u] == 0.0);
            }
        }
    }
    auto fb = fd(loss, layer.bias.data(), layer.bias.size());
    check_close(gb, fb.data(), fb.size());
    auto fx = fd(loss, x.data.data(), x.data.size());
    check_close(gx.data, fx.data(), fx.size());
}

TEST_CASE("masked dense with an all-ones mask is bitwise a dense layer") {
    Rng rng(13);
    const std::size_t p = 9;
    Tensor2 mask;
    mask.resize(p, p);
    mask.fill(1.0);
    nn::MaskedDenseParams ml;
    nn::masked_dense_init(ml, mask, rng);
    for (double& b : ml.bias) b = 0.25;
    nn::DenseParams dl;
    dl.weight = ml.weight;
    dl.bias = ml.bias;

    Rng drng(14);
    Tensor2 x = random_matrix(10, p, drng);
    Tensor2 gy = random_matrix(10, p, drng);

    Tensor2 ym, yd;
    nn::masked_dense_forward(x, ml, ym);
    nn::dense_forward(x, dl, yd);
    REQUIRE(ym.data.size() == yd.data.size());
    for (std::size_t i = 0; i < ym.data.size(); ++i) CHECK(ym.data[i] == yd.data[i]);

    Tensor2 gwm, gxm, gwd, gxd;
    std::vector<double> gbm, gbd;
    nn::masked_dense_backward(x, ml, gy, gwm, gbm, gxm);
    nn::dense_backward(x, dl, gy, gwd, gbd, gxd);
    for (std::size_t i = 0; i < gwm.data.size(); ++i) CHECK(gwm.data[i] == gwd.data[i]);
    for (std::size_t i = 0; i < gbm.size(); ++i) CHECK(gbm[i] == gbd[i]);
    for (std::size_t i = 0; i < gxm.data.size(); ++i) CHECK(gxm.data[i] == gxd.data[i]);
}

TEST_CASE("mask validation rejects malformed masks") {
    nn::MaskedDenseParams layer;
    Tensor2 bad;
    bad.resize(3, 3);
    bad.fill(1.0);
    bad(0, 0) = 0.0;
    CHECK_THROWS_AS(layer.set_mask(bad), motgnn::Error);
    bad(0, 0) = 1.0;
    bad(0, 1) = 0.0;
    CHECK_THROWS_AS(layer.set_mask(bad), motgnn::Error);
    bad(1, 0) = 0.0;
    CHECK_NOTHROW(layer.set_mask(bad));
    bad(2, 1) = 0.5;
    bad(1, 2) = 0.5;
    CHECK_THROWS_AS(layer.set_mask(bad), motgnn::Error);
    Tensor2 rect;
    rect.resize(2, 3);
    CHECK_THROWS_AS(layer.set_mask(rect), motgnn::Error);
}

TEST_CASE("relu forward clips and backward uses subgradient zero at zero") {
    Tensor2 x;
    x.resize(1, 4);
    x(0, 0) = -2.0;
    x(0, 1) = 0.0;
    x(0, 2) = 3.0;
    x(0, 3) = 1e-300;
    Tensor2 y;
    nn::relu_forward(x, y);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 0.0);
    CHECK(y(0, 2) == 3.0);
    CHECK(y(0, 3) == 1e-300);

    Tensor2 gy;
    gy.resize(1, 4);
    gy.fill(5.0);
    Tensor2 gx;
    nn::relu_backward(x, gy, gx);
    CHECK(gx(0, 0) == 0.0);
    CHECK(gx(0, 1) == 0.0);
    CHECK(gx(0, 2) == 5.0);
    CHECK(gx(0, 3) == 5.0);
}

TEST_CASE("relu gradient matches finite differences away from the kink") {
    Rng rng(15);
    Tensor2 x = random_matrix(6, 6, rng);
    for (double& v : x.data)
        if (std::fabs(v) < 1e-3) v = 0.1;
    Tensor2 r = random_matrix(6, 6, rng);
    Tensor2 y, gx;
    auto loss = [&]() {
        nn::relu_forward(x, y);
        return weighted_sum(y, r);
    };
    loss();
    nn::relu_backward(x, r, gx);
    auto fx = fd(loss, x.data.data(), x.data.size());
    check_close(gx.data, fx.data(), fx.size());
}

TEST_CASE("dropout keeps expectation, is deterministic per seed, and passes through in inference") {
    Tensor2 x;
    x.resize(200, 50);
    x.fill(1.0);
    Tensor2 y, mask;
    {
        Rng rng(21);
        nn::dropout_forward(x, 0.5, true, rng, y, mask);
    }
    double mean = 0.0;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        CHECK((mask.data[i] == 0.0 || mask.data[i] == 2.0));
        mean += y.data[i];
        if (mask.data[i] == 0.0) ++dropped;
    }
    mean /= static_cast<double>(y.data.size());
    CHECK(std::fabs(mean - 1.0) < 0.05);
    CHECK(dropped > 3000);
    CHECK(dropped < 7000);

    Tensor2 y2, mask2;
    {
        Rng rng(21);
        nn::dropout_forward(x, 0.5, true, rng, y2, mask2);
    }
    for (std::size_t i = 0; i < y.data.size(); ++i) CHECK(y.data[i] == y2.data[i]);

    Rng rng(22);
    Tensor2 yi, mi;
    nn::dropout_forward(x, 0.5, false, rng, yi, mi);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        CHECK(yi.data[i] == x.data[i]);
        CHECK(mi.data[i] == 1.0);
    }
    nn::dropout_forward(x, 0.0, true, rng, yi, mi);
    for (std::size_t i = 0; i < x.data.size(); ++i) CHECK(yi.data[i] == x.data[i]);

    CHECK_THROWS_AS(nn::dropout_forward(x, 1.0, true, rng, yi, mi), motgnn::Error);
    CHECK_THROWS_AS(nn::dropout_forward(x, -0.1, true, rng, yi, mi), motgnn::Error);
}

TEST_CASE("dropout backward scales by the stored mask") {
    Rng rng(23);
    Tensor2 x = random_matrix(5, 5, rng);
    Tensor2 y, mask;
    nn::dropout_forward(x, 0.4, true, rng, y, mask);
    Tensor2 r = random_matrix(5, 5, rng);
    // with a frozen mask the layer is elementwise linear
    auto loss = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) s += x.data[i] * mask.data[i] * r.data[i];
        return s;
    };
    Tensor2 gx;
    nn::dropout_backward(r, mask, gx);
    auto fx = fd(loss, x.data.data(), x.data.size());
    check_close(gx.data, fx.data(), fx.size());
}

TEST_CASE("batchnorm training output is standardized and running stats blend") {
    Rng rng(31);
    Tensor2 x = random_matrix(12, 5, rng, 3.0);
    nn::BatchNormParams p;
    p.init(5);
    Tensor2 y;
    nn::BatchNormCache cache;
    nn::batchnorm_forward(x, p, true, y, &cache);

    const double n = 12.0;
    for (std::size_t j = 0; j < 5; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 12; ++i) mean += y(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < 12; ++i) var += (y(i, j) - mean) * (y(i, j) - mean);
        var /= n;
        CHECK(std::fabs(mean) < 1e-12);
        CHECK(std::fabs(var - 1.0) < 1e-4);

        double xmean = 0.0;
        for (std::size_t i = 0; i < 12; ++i) xmean += x(i, j);
        xmean /= n;
        double xvar = 0.0;
        for (std::size_t i = 0; i < 12; ++i) xvar += (x(i, j) - xmean) * (x(i, j) - xmean);
        xvar /= n;
        CHECK(p.running_mean[j] == doctest::Approx(0.1 * xmean).epsilon(1e-12));
        CHECK(p.running_var[j] == doctest::Approx(0.9 + 0.1 * xvar).epsilon(1e-12));
    }
}

TEST_CASE("batchnorm inference applies running statistics exactly") {
    nn::BatchNormParams p;
    p.init(2);
    p.gamma = {2.0, 0.5};
    p.beta = {1.0, -1.0};
    p.running_mean = {3.0, -2.0};
    p.running_var = {4.0, 0.25};
    Tensor2 x;
    x.resize(3, 2);
    Rng rng(32);
    for (double& v : x.data) v = 2.0 * rng.uniform() - 1.0;
    Tensor2 y;
    nn::batchnorm_forward(x, p, false, y, nullptr);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double expect = p.gamma[j] * (x(i, j) - p.running_mean[j]) /
                                      std::sqrt(p.running_var[j] + p.eps) +
                                  p.beta[j];
            CHECK(y(i, j) == expect);
        }
}

TEST_CASE("batchnorm rejects training batches below two rows") {
    nn::BatchNormParams p;
    p.init(3);
    Tensor2 x;
    x.resize(1, 3);
    Tensor2 y;
    nn::BatchNormCache cache;
    CHECK_THROWS_AS(nn::batchnorm_forward(x, p, true, y, &cache), motgnn::Error);
    x.resize(4, 3);
    CHECK_THROWS_AS(nn::batchnorm_forward(x, p, true, y, nullptr), motgnn::Error);
}

TEST_CASE("batchnorm gradients match finite differences") {
    Rng rng(33);
    Tensor2 x = random_matrix(9, 4, rng, 2.0);
    nn::BatchNormParams p;
    p.init(4);
    for (double& g : p.gamma) g = 0.5 + rng.uniform();
    for (double& b : p.beta) b = 2.0 * rng.uniform() - 1.0;
    Tensor2 r = random_matrix(9, 4, rng);

    Tensor2 y;
    nn::BatchNormCache cache;
    auto loss = [&]() {
        nn::batchnorm_forward(x, p, true, y, &cache);
        return weighted_sum(y, r);
    };
    loss();
    Tensor2 gx;
    std::vector<double> ggamma, gbeta;
    nn::batchnorm_backward(x, p, cache, r, gx, ggamma, gbeta);

    auto fx = fd(loss, x.data.data(), x.data.size());
    check_close(gx.data, fx.data(), fx.size());
    auto fg = fd(loss, p.gamma.data(), p.gamma.size());
    check_close(ggamma, fg.data(), fg.size());
    auto fb = fd(loss, p.beta.data(), p.beta.size());
    check_close(gbeta, fb.data(), fb.size());
}

TEST_CASE("two-logit softmax probabilities are consistent") {
    Rng rng(41);
    Tensor2 logits = random_matrix(20, 2, rng, 4.0);
    Tensor2 probs;
    nn::softmax2_probs(logits, probs);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(probs(i, 0) >= 0.0);
        CHECK(probs(i, 1) >= 0.0);
        CHECK(std::fabs(probs(i, 0) + probs(i, 1) - 1.0) < 1e-15);
        const double sig = 1.0 / (1.0 + std::exp(-(logits(i, 1) - logits(i, 0))));
        CHECK(std::fabs(probs(i, 1) - sig) < 1e-12);
    }
    // shifting both logits of a row barely moves the softmax
    Tensor2 shifted = logits;
    for (std::size_t i = 0; i < 20; ++i) {
        shifted(i, 0) += 7.5;
        shifted(i, 1) += 7.5;
    }
    Tensor2 probs2;
    nn::softmax2_probs(shifted, probs2);
    for (std::size_t i = 0; i < probs.data.size(); ++i)
        CHECK(std::fabs(probs.data[i] - probs2.data[i]) < 1e-14);
}

TEST_CASE("softmax cross-entropy value and gradient") {
    Tensor2 logits;
    logits.resize(2, 2);
    logits(0, 0) = 0.0;
    logits(0, 1) = 0.0;
    logits(1, 0) = 1.0;
    logits(1, 1) = -1.0;
    std::vector<int> labels = {1, 0};
    Tensor2 probs, g;
    const double loss = nn::softmax2_bce(logits, labels, probs, g);
    const double p1b = 1.0 / (1.0 + std::exp(2.0));
    const double expect = 0.5 * (std::log(2.0) - std::log(1.0 - p1b));
    CHECK(loss == doctest::Approx(expect).epsilon(1e-12));

    Rng rng(42);
    Tensor2 z = random_matrix(10, 2, rng, 3.0);
    std::vector<int> y(10);
    for (auto& v : y) v = rng.uniform() < 0.5 ? 0 : 1;
    Tensor2 pr, gz;
    auto lfun = [&]() { return nn::softmax2_bce(z, y, pr, gz); };
    lfun();
    Tensor2 analytic = gz;
    auto fz = fd(lfun, z.data.data(), z.data.size());
    check_close(analytic.data, fz.data(), fz.size());

    std::vector<int> bad = {0, 2};
    Tensor2 two;
    two.resize(2, 2);
    CHECK_THROWS_AS(nn::softmax2_bce(two, bad, pr, gz), motgnn::Error);
    std::vector<int> short_labels = {0};
    CHECK_THROWS_AS(nn::softmax2_bce(two, short_labels, pr, gz), motgnn::Error);
}

TEST_CASE("extreme logits clamp the loss and zero the gradient") {
    Tensor2 logits;
    logits.resize(1, 2);
    logits(0, 0) = 50.0;
    logits(0, 1) = -50.0;
    std::vector<int> labels = {1};
    Tensor2 probs, g;
    const double loss = nn::softmax2_bce(logits, labels, probs, g);
    CHECK(loss == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
    CHECK(g(0, 0) == 0.0);
    CHECK(g(0, 1) == 0.0);
    CHECK(std::isfinite(loss));
}

TEST_CASE("full branch-style chain gradients match finite differences") {
    Rng rng(51);
    const std::size_t p = 6, hidden = 4, n = 5;
    Tensor2 mask = random_mask(p, rng, 0.4);
    nn::MaskedDenseParams l0;
    nn::masked_dense_init(l0, mask, rng);
    nn::DenseParams l1;
    nn::dense_init(l1, p, hidden, rng);
    nn::BatchNormParams bn;
    bn.init(hidden);
    for (double& g : bn.gamma) g = 0.5 + rng.uniform();
    nn::DenseParams head;
    nn::dense_init(head, hidden, 2, rng);
    Tensor2 x = random_matrix(n, p, rng);
    std::vector<int> labels(n);
    for (auto& v : labels) v = rng.uniform() < 0.5 ? 0 : 1;

    Tensor2 a0, r0, a1, b1, r1, z, probs, gz;
    nn::BatchNormCache cache;
    auto loss = [&]() {
        nn::masked_dense_forward(x, l0, a0);
        nn::relu_forward(a0, r0);
        nn::dense_forward(r0, l1, a1);
        nn::batchnorm_forward(a1, bn, true, b1, &cache);
        nn::relu_forward(b1, r1);
        nn::dense_forward(r1, head, z);
        return nn::softmax2_bce(z, labels, probs, gz);
    };
    loss();

    Tensor2 ghw, gr1, gb1, gga, ga1, g1w, gr0, ga0, g0w, gx;
    std::vector<double> ghb, ggamma, gbeta, g1b, g0b;
    nn::dense_backward(r1, head, gz, ghw, ghb, gr1);
    nn::relu_backward(b1, gr1, gb1);
    nn::batchnorm_backward(a1, bn, cache, gb1, ga1, ggamma, gbeta);
    nn::dense_backward(r0, l1, ga1, g1w, g1b, gr0);
    nn::relu_backward(a0, gr0, ga0);
    nn::masked_dense_backward(x, l0, ga0, g0w, g0b, gx);

    auto f = fd(loss, head.weight.data.data(), head.weight.data.size());
    check_close(ghw.data, f.data(), f.size());
    f = fd(loss, head.bias.data(), head.bias.size());
    check_close(ghb, f.data(), f.size());
    f = fd(loss, bn.gamma.data(), bn.gamma.size());
    check_close(ggamma, f.data(), f.size());
    f = fd(loss, bn.beta.data(), bn.beta.size());
    check_close(gbeta, f.data(), f.size());
    f = fd(loss, l1.weight.data.data(), l1.weight.data.size());
    check_close(g1w.data, f.data(), f.size());
    f = fd(loss, l1.bias.data(), l1.bias.size());
    check_close(g1b, f.data(), f.size());
    f = fd(loss, l0.weight.data.data(), l0.weight.data.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (l0.mask.data[i] == 1.0) {
            CHECK(rel_err(g0w.data[i], f[i]) < 1e-4);
        } else {
            CHECK(g0w.data[i] == 0.0);
        }
    }
    f = fd(loss, l0.bias.data(), l0.bias.size());
    check_close(g0b, f.data(), f.size());
    f = fd(loss, x.data.data(), x.data.size());
    check_close(gx.data, f.data(), f.size());
}

TEST_CASE("l2 penalty adds quadratic loss and linear gradient") {
    std::vector<double> w = {1.0, -2.0, 0.5};
    std::vector<double> g = {0.1, 0.2, 0.3};
    const double pen = nn::l2_penalty(w.data(), g.data(), 3, 0.01);
    CHECK(pen == doctest::Approx(0.01 * 5.25).epsilon(1e-15));
    CHECK(g[0] == doctest::Approx(0.1 + 0.02).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(0.2 - 0.04).epsilon(1e-15));
    CHECK(g[2] == doctest::Approx(0.3 + 0.01).epsilon(1e-15));
}

TEST_CASE("adam leaves fresh parameters fixed under zero gradients") {
    std::vector<double> w = {1.5, -0.25, 3.0};
    std::vector<double> g = {0.0, 0.0, 0.0};
    nn::Adam opt;
    opt.init({3});
    const std::vector<double> before = w;
    for (int s = 0; s < 10; ++s)
        opt.step({{w.data(), g.data(), 3, nullptr}}, 0.1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(w[i] == before[i]);
    CHECK(opt.steps_taken() == 10);
}

TEST_CASE("adam minimizes a quadratic bowl") {
    std::vector<double> target = {2.0, -1.0, 0.5, 4.0};
    std::vector<double> w = {0.0, 0.0, 0.0, 0.0};
    std::vector<double> g(4, 0.0);
    nn::Adam opt;
    opt.init({4});
    for (int s = 0; s < 3000; ++s) {
        for (std::size_t i = 0; i < 4; ++i) g[i] = 2.0 * (w[i] - target[i]);
        opt.step({{w.data(), g.data(), 4, nullptr}}, 0.05);
    }
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(w[i] - target[i]) < 1e-3);
}

TEST_CASE("adam honors the active index list") {
    std::vector<double> w = {1.0, 2.0, 3.0};
    std::vector<double> g = {10.0, 10.0, 10.0};
    std::vector<std::uint32_t> active = {1};
    nn::Adam opt;
    opt.init({3});
    opt.step({{w.data(), g.data(), 3, &active}}, 0.1);
    CHECK(w[0] == 1.0);
    CHECK(w[2] == 3.0);
    CHECK(w[1] < 2.0);

    nn::Adam bad;
    bad.init({2});
    CHECK_THROWS_AS(bad.step({{w.data(), g.data(), 3, nullptr}}, 0.1), motgnn::Error);
    CHECK_THROWS_AS(bad.step({}, 0.1), motgnn::Error);
}

TEST_CASE("training a masked layer never disturbs off-mask weights") {
    Rng rng(61);
    const std::size_t p = 10, n = 8;
    Tensor2 mask = random_mask(p, rng, 0.3);
    nn::MaskedDenseParams layer;
    nn::masked_dense_init(layer, mask, rng);
    const std::vector<std::uint32_t> active = nn::masked_active_flat(layer);
    Tensor2 x = random_matrix(n, p, rng);
    Tensor2 r = random_matrix(n, p, rng);

    nn::Adam opt;
    opt.init({layer.weight.data.size(), layer.bias.size()});
    Tensor2 y, gw, gx;
    std::vector<double> gb;
    for (int s = 0; s < 25; ++s) {
        nn::masked_dense_forward(x, layer, y);
        nn::masked_dense_backward(x, layer, r, gw, gb, gx);
        nn::l2_penalty(layer.weight.data.data(), gw.data.data(), layer.weight.data.size(), 0.01);
        opt.step({{layer.weight.data.data(), gw.data.data(), layer.weight.data.size(), &active},
                  {layer.bias.data(), gb.data(), layer.bias.size(), nullptr}},
                 1e-2);
    }
    for (std::size_t i = 0; i < layer.weight.data.size(); ++i)
        if (layer.mask.data[i] == 0.0) CHECK(layer.weight.data[i] == 0.0);
}

TEST_CASE("initialization respects fan-in bounds and mask sparsity") {
    Rng rng(71);
    nn::DenseParams d;
    nn::dense_init(d, 24, 10, rng);
    const double lim = std::sqrt(6.0 / 24.0);
    double spread = 0.0;
    for (const double w : d.weight.data) {
        CHECK(std::fabs(w) <= lim);
        spread = std::max(spread, std::fabs(w));
    }
    CHECK(spread > lim * 0.5);
    for (const double b : d.bias) CHECK(b == 0.0);

    Tensor2 mask = random_mask(16, rng, 0.2);
    nn::MaskedDenseParams m;
    nn::masked_dense_init(m, mask, rng);
    for (std::size_t u = 0; u < 16; ++u) {
        const double ulim = std::sqrt(6.0 / static_cast<double>(m.active[u].size()));
        for (std::size_t j = 0; j < 16; ++j) {
            if (mask(j, u) == 1.0) {
                CHECK(std::fabs(m.weight(j, u)) <= ulim);
            } else {
                CHECK(m.weight(j, u) == 0.0);
            }
        }
    }

    const std::vector<std::uint32_t> flat = nn::masked_active_flat(m);
    std::size_t ones = 0;
    for (const double v : mask.data) ones += v == 1.0 ? 1 : 0;
    CHECK(flat.size() == ones);
    CHECK(std::is_sorted(flat.begin(), flat.end()));
}
