// Compares the OpenMP matmul kernels against the serial reference on shapes
// representative of the model's inner loops.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <tuple>
#include <vector>

#include <omp.h>

#include "tsfm/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-1, 1);

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %10s %10s %8s\n", "shape (m,k,n)", "serial ms", "omp ms",
              "speedup");

  const std::tuple<int, int, int> shapes[] = {
      {128, 128, 128}, {256, 256, 256}, {512, 64, 512},
      {512, 512, 64},  {384, 384, 384},
  };
  for (auto [m, k, n] : shapes) {
    std::vector<double> a(static_cast<std::size_t>(m) * k);
    std::vector<double> b(static_cast<std::size_t>(k) * n);
    std::vector<double> c(static_cast<std::size_t>(m) * n);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    const int reps = m <= 128 ? 40 : 10;
    const double ts = time_ms(
        [&] { tsfm::kernels::serial::matmul(a.data(), b.data(), c.data(), m, k, n); },
        reps);
    const double tp = time_ms(
        [&] { tsfm::kernels::matmul(a.data(), b.data(), c.data(), m, k, n); },
        reps);
    std::printf("%4d x %4d x %4d     %10.3f %10.3f %7.2fx\n", m, k, n, ts, tp,
                ts / tp);
  }
  return 0;
}
