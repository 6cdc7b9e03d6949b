#include "motgnn/kernels.hpp"

#include "motgnn/error.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace motgnn::kernels {

namespace {

void check_mul(const Tensor2& a, const Tensor2& b, std::size_t ar, std::size_t ac,
               std::size_t br, const char* what) {
    if (ac != br)
        throw Error(std::string(what) + ": inner dimensions disagree");
    (void)a;
    (void)b;
    (void)ar;
}

// out row i of a*b, accumulated j-ascending per element
inline void matmul_row(const Tensor2& a, const Tensor2& b, Tensor2& out, std::size_t i) {
    double* orow = out.row(i);
    for (std::size_t k = 0; k < out.cols; ++k) orow[k] = 0.0;
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) {
        const double aij = arow[j];
        const double* brow = b.row(j);
        for (std::size_t k = 0; k < b.cols; ++k) orow[k] += aij * brow[k];
    }
}

// out row j of a^T*b, accumulated i-ascending per element
inline void matmul_tn_row(const Tensor2& a, const Tensor2& b, Tensor2& out, std::size_t j) {
    double* orow = out.row(j);
    for (std::size_t k = 0; k < out.cols; ++k) orow[k] = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double aij = a(i, j);
        const double* brow = b.row(i);
        for (std::size_t k = 0; k < b.cols; ++k) orow[k] += aij * brow[k];
    }
}

// out row i of a*b^T, accumulated k-ascending per element
inline void matmul_nt_row(const Tensor2& a, const Tensor2& b, Tensor2& out, std::size_t i) {
    double* orow = out.row(i);
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
        const double* brow = b.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
        orow[j] = s;
    }
}

inline double col_sum_one(const Tensor2& a, std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) s += a(i, j);
    return s;
}

} // namespace

namespace serial {

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    check_mul(a, b, a.rows, a.cols, b.rows, "matmul");
    out.resize(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) matmul_row(a, b, out, i);
}

void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    if (a.rows != b.rows) throw Error("matmul_tn: row counts disagree");
    out.resize(a.cols, b.cols);
    for (std::size_t j = 0; j < a.cols; ++j) matmul_tn_row(a, b, out, j);
}

void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    if (a.cols != b.cols) throw Error("matmul_nt: column counts disagree");
    out.resize(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) matmul_nt_row(a, b, out, i);
}

void col_sums(const Tensor2& a, std::vector<double>& out) {
    out.assign(a.cols, 0.0);
    for (std::size_t j = 0; j < a.cols; ++j) out[j] = col_sum_one(a, j);
}

} // namespace serial

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    check_mul(a, b, a.rows, a.cols, b.rows, "matmul");
    out.resize(a.rows, b.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) matmul_row(a, b, out, static_cast<std::size_t>(i));
}

void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    if (a.rows != b.rows) throw Error("matmul_tn: row counts disagree");
    out.resize(a.cols, b.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < n; ++j) matmul_tn_row(a, b, out, static_cast<std::size_t>(j));
}

void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    if (a.cols != b.cols) throw Error("matmul_nt: column counts disagree");
    out.resize(a.rows, b.rows);
    const std::int64_t n = static_cast<std::int64_t>(a.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) matmul_nt_row(a, b, out, static_cast<std::size_t>(i));
}

void col_sums(const Tensor2& a, std::vector<double>& out) {
    out.assign(a.cols, 0.0);
    const std::int64_t n = static_cast<std::int64_t>(a.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < n; ++j)
        out[static_cast<std::size_t>(j)] = col_sum_one(a, static_cast<std::size_t>(j));
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace motgnn::kernels
