#pragma once

#include "motgnn/error.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace motgnn {

// Dense row-major matrix. Small by design: the library only needs
// contiguous storage plus shape bookkeeping.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        data.assign(r * c, 0.0);
    }

    void fill(double v) { data.assign(data.size(), v); }

    std::size_t size() const { return data.size(); }

    static Tensor2 zeros(std::size_t r, std::size_t c) { return Tensor2(r, c); }

    static Tensor2 same_shape(const Tensor2& t) { return Tensor2(t.rows, t.cols); }
};

inline Tensor2 take_rows(const Tensor2& t, const std::vector<std::size_t>& idx) {
    Tensor2 out(idx.size(), t.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < t.cols; ++j) out(i, j) = t(idx[i], j);
    return out;
}

inline Tensor2 take_cols(const Tensor2& t, const std::vector<std::size_t>& idx) {
    Tensor2 out(t.rows, idx.size());
    for (std::size_t i = 0; i < t.rows; ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = t(i, idx[j]);
    return out;
}

inline void require_shape(const Tensor2& t, std::size_t r, std::size_t c, const std::string& what) {
    if (t.rows != r || t.cols != c)
        throw Error(what + ": expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " +
                    std::to_string(t.rows) + "x" + std::to_string(t.cols));
}

} // namespace motgnn
