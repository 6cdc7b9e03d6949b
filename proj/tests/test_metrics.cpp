#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "motgnn/metrics.hpp"
#include "motgnn/error.hpp"
#include "motgnn/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

using namespace motgnn;

namespace {

// Exhaustive positive-negative pair count; ties worth half a win. Kept in
// integer arithmetic so the quotient is computed from the exact same two
// doubles as the production rank-sum path.
double pair_count_auc(const std::vector<int>& y, const std::vector<double>& s) {
    std::int64_t num = 0;
    std::uint64_t np = 0, nn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1) continue;
        ++np;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != 0) continue;
            if (s[i] > s[j]) num += 2;
            else if (s[i] == s[j]) num += 1;
        }
    }
    for (int v : y)
        if (v == 0) ++nn;
    return static_cast<double>(num) / static_cast<double>(2 * np * nn);
}

// 20 values with exact target mean and sample SD: half at mean+d, half at
// mean-d with d = sd*sqrt(19/20).
std::vector<double> values_with(double mean, double sd) {
    const double d = sd * std::sqrt(19.0 / 20.0);
    std::vector<double> v;
    for (int i = 0; i < 10; ++i) {
        v.push_back(mean + d);
        v.push_back(mean - d);
    }
    return v;
}

} // namespace

TEST_CASE("accuracy counts agreements") {
    CHECK(accuracy({1, 0, 1, 0}, {1, 0, 1, 0}) == 1.0);
    CHECK(accuracy({1, 0, 1, 0}, {0, 1, 0, 1}) == 0.0);
    CHECK(accuracy({1, 0, 1, 0}, {1, 0, 1, 1}) == 0.75);
    CHECK_THROWS_AS(accuracy({}, {}), Error);
}

TEST_CASE("f1 closed forms") {
    CHECK(f1_score({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0);
    // tp=1 fp=1 fn=1: precision and recall both 0.5
    CHECK(f1_score({1, 1, 0}, {1, 0, 1}) == doctest::Approx(0.5));
    // positives exist but nothing predicted positive
    CHECK(f1_score({1, 1, 0}, {0, 0, 0}) == 0.0);
    // no positives anywhere
    CHECK(f1_score({0, 0, 0}, {0, 0, 0}) == 0.0);
}

TEST_CASE("auc hand example") {
    CHECK(auc({1, 0, 1, 0}, {0.9, 0.8, 0.4, 0.1}) == doctest::Approx(0.75));
    CHECK(auc({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9}) == 1.0);
    CHECK(auc({0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}) == 0.5);
    CHECK_THROWS_AS(auc({1, 1}, {0.1, 0.2}), Error);
}

TEST_CASE("auc equals exhaustive pair counting bit for bit") {
    Rng rng(1234);
    for (int iter = 0; iter < 100; ++iter) {
        const std::size_t n = 2 + rng.below(199);
        std::vector<int> y(n);
        std::vector<double> s(n);
        // coarse grid scores so ties occur often
        const bool coarse = rng.bernoulli(0.5);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.bernoulli(0.4) ? 1 : 0;
            s[i] = coarse ? static_cast<double>(rng.below(8)) / 7.0 : rng.uniform();
        }
        y[0] = 0;
        y[n - 1] = 1;
        CHECK(auc(y, s) == pair_count_auc(y, s));
    }
}

TEST_CASE("auc complement identity for tie-free scores") {
    Rng rng(9);
    const std::size_t n = 50;
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.bernoulli(0.5) ? 1 : 0;
        s[i] = rng.uniform();
    }
    y[0] = 0;
    y[1] = 1;
    std::vector<double> neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -s[i];
    CHECK(auc(y, s) + auc(y, neg) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("t quantiles") {
    CHECK(t_quantile_975(19) == doctest::Approx(2.09302405440826).epsilon(1e-12));
    CHECK(t_quantile_975(1) == doctest::Approx(12.7062047364321).epsilon(1e-12));
    CHECK(t_quantile_975(500) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK_THROWS_AS(t_quantile_975(0), Error);
}

TEST_CASE("summarize degenerate and symmetry properties") {
    const Summary s = summarize({0.5, 0.5, 0.5, 0.5});
    CHECK(s.mean == 0.5);
    CHECK(s.sd == 0.0);
    CHECK(s.ci_low == 0.5);
    CHECK(s.ci_high == 0.5);

    Rng rng(3);
    std::vector<double> v(20);
    for (auto& x : v) x = rng.uniform();
    const Summary r = summarize(v);
    CHECK(std::abs((r.ci_high - r.mean) - (r.mean - r.ci_low)) < 1e-12);
    CHECK(r.ci_low < r.mean);
    CHECK(r.mean < r.ci_high);
}

TEST_CASE("summarize mean and sd against direct formulas") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    const Summary s = summarize(v);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.sd == doctest::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0)));
    const double half = t_quantile_975(3) * s.sd / 2.0;
    CHECK(s.ci_low == doctest::Approx(2.5 - half).epsilon(1e-12));
    CHECK(s.ci_high == doctest::Approx(2.5 + half).epsilon(1e-12));
}

TEST_CASE("published-style interval reproduction at n=20") {
    {
        const Summary s = summarize(values_with(0.939, 0.031));
        CHECK(s.sd == doctest::Approx(0.031).epsilon(1e-12));
        CHECK(std::abs(s.ci_low - 0.925) <= 1e-3 + 1e-12);
        CHECK(std::abs(s.ci_high - 0.953) <= 1e-3 + 1e-12);
    }
    {
        const Summary s = summarize(values_with(0.872, 0.064));
        CHECK(std::abs(s.ci_low - 0.842) <= 1e-3 + 1e-12);
        CHECK(std::abs(s.ci_high - 0.902) <= 1e-3 + 1e-12);
    }
}
