#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsfm/mixture.hpp"

// Numeric-integration oracles for the mixture density: a component-aware
// evaluation grid plus trapezoid mass/CDF. Independent of the sampling and
// loss paths it is used to check.
namespace testsupport {

inline void linspace_into(std::vector<double>& g, double lo, double hi, int n) {
  for (int i = 0; i <= n; ++i)
    g.push_back(lo + (hi - lo) * static_cast<double>(i) / n);
}

inline void logspace_into(std::vector<double>& g, double lo, double hi, int n) {
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i <= n; ++i)
    g.push_back(std::exp(llo + (lhi - llo) * static_cast<double>(i) / n));
}

inline std::vector<double> mixture_grid(const tsfm::MixtureParams& p) {
  std::vector<double> g;
  // student-t: dense core plus stretched tails for low df
  linspace_into(g, p.t_loc - 30 * p.t_scale, p.t_loc + 30 * p.t_scale, 6000);
  for (double side : {-1.0, 1.0}) {
    std::vector<double> tail;
    logspace_into(tail, 30 * p.t_scale, 1e6 * p.t_scale, 1200);
    for (double t : tail) g.push_back(p.t_loc + side * t);
  }
  // log-normal support
  const double ln_lo = std::exp(p.ln_loc - 12 * p.ln_scale);
  const double ln_hi = std::exp(p.ln_loc + 12 * p.ln_scale);
  logspace_into(g, ln_lo, ln_hi, 4000);
  // negative binomial: in ln(1+y) space out to a generous cutoff
  {
    const double mean_guess = p.nb_count * p.nb_prob / (1 - p.nb_prob);
    const double hi = 50.0 * (mean_guess + p.nb_count + 1.0);
    for (int i = 0; i <= 4000; ++i)
      g.push_back(std::expm1(std::log1p(hi) * i / 4000.0));
  }
  // low-variance normal spike
  linspace_into(g, p.lv_loc - 10 * tsfm::kLowVarSigma,
                p.lv_loc + 10 * tsfm::kLowVarSigma, 3000);

  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline double mixture_mass(const tsfm::MixtureParams& p) {
  const auto g = mixture_grid(p);
  double mass = 0.0;
  double prev = std::exp(tsfm::log_prob(p, g.front()));
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double cur = std::exp(tsfm::log_prob(p, g[i]));
    mass += 0.5 * (prev + cur) * (g[i] - g[i - 1]);
    prev = cur;
  }
  return mass;
}

// grid points and normalized numeric CDF at those points
inline std::pair<std::vector<double>, std::vector<double>> mixture_cdf(
    const tsfm::MixtureParams& p) {
  const auto g = mixture_grid(p);
  std::vector<double> cdf(g.size(), 0.0);
  double prev = std::exp(tsfm::log_prob(p, g.front()));
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double cur = std::exp(tsfm::log_prob(p, g[i]));
    cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * (g[i] - g[i - 1]);
    prev = cur;
  }
  for (double& c : cdf) c /= cdf.back();
  return {g, cdf};
}

// Kolmogorov distance between sorted samples and the numeric CDF
inline double ks_distance(std::vector<double> samples,
                          const tsfm::MixtureParams& p) {
  std::sort(samples.begin(), samples.end());
  auto [grid, cdf] = mixture_cdf(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); i += 7) {
    const auto it = std::upper_bound(samples.begin(), samples.end(), grid[i]);
    const double emp =
        static_cast<double>(it - samples.begin()) / samples.size();
    worst = std::max(worst, std::fabs(emp - cdf[i]));
  }
  return worst;
}

}  // namespace testsupport
