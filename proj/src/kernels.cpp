#include "tsfm/kernels.hpp"

#include <cstring>

namespace tsfm::kernels {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
  const long mm = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < mm; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    std::memset(crow, 0, n * sizeof(double));
    const double* arow = a + static_cast<std::size_t>(i) * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
  const long mm = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < mm; ++i) {
    const double* dcrow = dc + static_cast<std::size_t>(i) * n;
    double* darow = da + static_cast<std::size_t>(i) * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
      darow[p] += acc;
    }
  }
}

void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
  const long kk = static_cast<long>(k);
#pragma omp parallel for schedule(static)
  for (long p = 0; p < kk; ++p) {
    double* dbrow = db + static_cast<std::size_t>(p) * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[i * k + static_cast<std::size_t>(p)];
      const double* dcrow = dc + i * n;
      for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
    }
  }
}

namespace serial {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += dc[i * n + j] * b[p * n + j];
      da[i * k + p] += acc;
    }
  }
}

void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[i * k + p];
      for (std::size_t j = 0; j < n; ++j) db[p * n + j] += av * dc[i * n + j];
    }
  }
}

}  // namespace serial

}  // namespace tsfm::kernels
