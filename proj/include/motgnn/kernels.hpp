#pragma once

#include "motgnn/tensor.hpp"

namespace motgnn::kernels {

// Single-threaded reference paths. The parallel dispatchers below must
// produce bitwise-identical output: each output element is owned by one
// thread and accumulated in the same order as here.
namespace serial {

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out);      // out = a * b
void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& out);   // out = a^T * b
void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& out);   // out = a * b^T
void col_sums(const Tensor2& a, std::vector<double>& out);

} // namespace serial

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out);
void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& out);
void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& out);
void col_sums(const Tensor2& a, std::vector<double>& out);

int thread_count();

} // namespace motgnn::kernels
