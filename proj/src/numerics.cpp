#include "tsfm/numerics.hpp"

#include <cmath>

namespace tsfm::num {

namespace {

constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double digamma_core(double x) {
  // x >= 0.5. lgamma(x) = log(sqrt(2*pi)) + log A(x) + (x-0.5) log t - t,
  // t = x + g - 0.5; differentiate in x.
  double a = kLanczos[0];
  double da = 0.0;
  for (int i = 1; i < 9; ++i) {
    const double d = x - 1.0 + static_cast<double>(i);
    a += kLanczos[i] / d;
    da -= kLanczos[i] / (d * d);
  }
  const double t = x + kLanczosG - 0.5;
  return std::log(t) + (x - 0.5) / t - 1.0 + da / a;
}

}  // namespace

double digamma(double x) {
  double shift = 0.0;
  while (x < 0.5) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  return shift + digamma_core(x);
}

namespace {

double simpson_rule(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double eps,
             int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(fa, flm, fm, a, m);
  const double right = simpson_rule(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson_rule(fa, fm, fb, a, b);
  const double scale = std::fmax(std::fabs(whole), 1e-300);
  return adapt(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth);
}

double adaptive_simpson_abs(const std::function<double(double)>& f, double a,
                            double b, double abs_tol, int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson_rule(fa, fm, fb, a, b);
  return adapt(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

}  // namespace tsfm::num
