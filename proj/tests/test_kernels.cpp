#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "motgnn/kernels.hpp"
#include "motgnn/rng.hpp"

#include <vector>

using namespace motgnn;

namespace {

Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng) {
    Tensor2 t(r, c);
    for (auto& v : t.data) v = rng.uniform(-2.0, 2.0);
    return t;
}

Tensor2 transpose(const Tensor2& a) {
    Tensor2 t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

bool bitwise_equal(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows || a.cols != b.cols) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

} // namespace

TEST_CASE("matmul matches a hand-computed product") {
    Tensor2 a(2, 3);
    a.data = {1, 2, 3, 4, 5, 6};
    Tensor2 b(3, 2);
    b.data = {7, 8, 9, 10, 11, 12};
    Tensor2 c;
    kernels::matmul(a, b, c);
    CHECK(c.rows == 2);
    CHECK(c.cols == 2);
    CHECK(c(0, 0) == doctest::Approx(58));
    CHECK(c(0, 1) == doctest::Approx(64));
    CHECK(c(1, 0) == doctest::Approx(139));
    CHECK(c(1, 1) == doctest::Approx(154));
}

TEST_CASE("parallel kernels are bitwise identical to the serial reference") {
    Rng rng(42);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t n = 1 + rng.below(40);
        const std::size_t p = 1 + rng.below(40);
        const std::size_t q = 1 + rng.below(40);
        const Tensor2 a = random_tensor(n, p, rng);
        const Tensor2 b = random_tensor(p, q, rng);
        const Tensor2 c = random_tensor(n, q, rng);
        const Tensor2 d = random_tensor(n, q, rng);

        Tensor2 ref, par;
        kernels::serial::matmul(a, b, ref);
        kernels::matmul(a, b, par);
        CHECK(bitwise_equal(ref, par));

        kernels::serial::matmul_tn(a, c, ref);
        kernels::matmul_tn(a, c, par);
        CHECK(bitwise_equal(ref, par));

        kernels::serial::matmul_nt(c, d, ref);
        kernels::matmul_nt(c, d, par);
        CHECK(bitwise_equal(ref, par));

        std::vector<double> s1, s2;
        kernels::serial::col_sums(a, s1);
        kernels::col_sums(a, s2);
        CHECK(s1 == s2);
    }
}

TEST_CASE("transpose products agree with explicit transposition") {
    Rng rng(7);
    const Tensor2 a = random_tensor(5, 3, rng);
    const Tensor2 b = random_tensor(5, 4, rng);
    const Tensor2 e = random_tensor(4, 3, rng);

    Tensor2 want, got;
    kernels::matmul(transpose(a), b, want);
    kernels::matmul_tn(a, b, got);
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    for (std::size_t i = 0; i < want.data.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));

    kernels::matmul(a, transpose(e), want);
    kernels::matmul_nt(a, e, got);
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    for (std::size_t i = 0; i < want.data.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
    Tensor2 a(2, 3), b(4, 2), out;
    CHECK_THROWS_AS(kernels::matmul(a, b, out), Error);
    CHECK_THROWS_AS(kernels::matmul_tn(a, b, out), Error);
    Tensor2 c(2, 4);
    CHECK_THROWS_AS(kernels::matmul_nt(a, c, out), Error);
}

TEST_CASE("col_sums adds rows in index order") {
    Tensor2 a(3, 2);
    a.data = {1, 10, 2, 20, 3, 30};
    std::vector<double> s;
    kernels::col_sums(a, s);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == 6.0);
    CHECK(s[1] == 60.0);
}
