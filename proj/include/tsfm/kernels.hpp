#pragma once

#include <cstddef>

// Dense row-major matrix kernels. The OpenMP versions parallelize over output
// rows, so each output element is accumulated by exactly one thread in the
// same index order as the serial reference; results are bit-identical to the
// serial kernels for any thread count.
namespace tsfm::kernels {

// C[m x n] = A[m x k] * B[k x n]. C is overwritten.
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);

// dA[m x k] += dC[m x n] * B^T
void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);

// dB[k x n] += A^T * dC[m x n]
void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n);

// Serial reference implementations, kept for correctness tests and as the
// baseline in the kernel benchmark.
namespace serial {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n);

}  // namespace serial

}  // namespace tsfm::kernels
