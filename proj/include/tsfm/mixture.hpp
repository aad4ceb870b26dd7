#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <vector>

#include "tsfm/tensor.hpp"

namespace tsfm {

// Predictive distribution of one forecast element: weighted student-t,
// log-normal, continuous negative binomial, and fixed low-variance normal.
struct MixtureParams {
  std::array<double, 4> w{};      // simplex weights: t, log-normal, neg-bin, low-var
  double t_df = 3.0;              // >= 2
  double t_loc = 0.0;
  double t_scale = 1.0;           // > 0
  double ln_loc = 0.0;
  double ln_scale = 1.0;          // > 0
  double nb_count = 1.0;          // r > 0
  double nb_prob = 0.5;           // p in (0, 1)
  double lv_loc = 0.0;

  void validate() const;
};

constexpr double kLowVarSigma = 1e-3;
// log-density assigned to a component outside its support; keeps the
// log-sum-exp finite and its gradient well defined
constexpr double kLogDensityFloor = -1e10;

// Raw layout: [0..3] weight logits, [4] t-df, [5] t-loc, [6] t-scale,
// [7] ln-loc, [8] ln-scale, [9] nb-count, [10] nb-prob logit, [11] lv-loc.
MixtureParams constrain(const std::array<double, 12>& raw);

double log_prob(const MixtureParams& params, double y);

// Component log densities (scalar path; shared by tests and sampling).
double student_t_logpdf(double y, double df, double loc, double scale);
double lognormal_logpdf(double y, double loc, double scale);
double negbin_logpdf(double y, double r, double p);
double lowvar_normal_logpdf(double y, double loc);

// log of the continuous negative binomial normalizer
//   G(r, p) = integral_0^inf Gamma(y+r) / (Gamma(y+1) Gamma(r)) p^y dy,
// interpolated from a precomputed table (see mixture.cpp).
double negbin_log_norm(double r, double p);
// reference value by direct quadrature (slow; used for table construction
// and accuracy tests)
double negbin_log_norm_quadrature(double r, double p);

// --- differentiable path ---------------------------------------------------

// raw: [N x 12]; y: one target per row. Returns [N x 1] mixture log-probs.
ad::Tensor mixture_log_prob_rows(const ad::Tensor& raw,
                                 const std::vector<double>& y);

// Ablated head: raw [N x 3] = (df, loc, scale) of a single student-t.
ad::Tensor student_t_log_prob_rows(const ad::Tensor& raw,
                                   const std::vector<double>& y);

// Mean negative log likelihood over rows; empty input is a contract error.
ad::Tensor nll_from_log_probs(const ad::Tensor& log_probs);

// --- sampling & quantiles ---------------------------------------------------

double sample_one(const MixtureParams& params, std::mt19937_64& rng);
std::vector<double> sample(const MixtureParams& params, std::size_t n,
                           std::mt19937_64& rng);

// Empirical quantiles with linear interpolation between order statistics.
std::vector<double> quantiles(std::vector<double> samples,
                              const std::vector<double>& levels);

}  // namespace tsfm
