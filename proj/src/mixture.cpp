#include "tsfm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tsfm/errors.hpp"
#include "tsfm/numerics.hpp"

namespace tsfm {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;
constexpr double kPosEps = 1e-12;   // keeps softplus outputs strictly positive
constexpr double kProbEps = 1e-12;  // keeps sigmoid outputs inside (0, 1)

// --- tabulated log G(r, p) --------------------------------------------------
//
// G(r, lambda) = integral_0^inf exp(lgamma(y+r) - lgamma(y+1) - lgamma(r)
//                                   - lambda*y) dy,  lambda = -ln p.
// Tabulated over (u, v) = (ln r, ln lambda) on a uniform grid and evaluated
// with Catmull-Rom bicubic interpolation, which is C^1; gradients of the
// interpolant itself are used for backward so autodiff and finite
// differences of the loss stay consistent.

struct LogGTable {
  static constexpr double kUMin = -28.0, kUMax = 22.0;
  static constexpr double kVMin = -28.0, kVMax = 4.0;
  static constexpr double kStep = 0.25;
  int nu = 0, nv = 0;
  std::vector<double> data;  // [nu x nv]

  static const LogGTable& instance();

  double at(int i, int j) const {
    i = std::clamp(i, 0, nu - 1);
    j = std::clamp(j, 0, nv - 1);
    return data[static_cast<std::size_t>(i) * nv + j];
  }

  struct Eval {
    double value, du, dv;  // derivatives w.r.t. u and v
  };
  Eval eval(double u, double v) const;
};

double log_integrand(double y, double r, double lambda, double lgamma_r) {
  return std::lgamma(y + r) - std::lgamma(y + 1.0) - lgamma_r - lambda * y;
}

// Quadrature in s = ln(1+y), which compresses supports from r ~ 1e-12 up to
// r/lambda ~ 1e50 into a modest interval. The transformed log-integrand
//   Lt(s) = lgamma(y+r) - lgamma(y+1) - lgamma(r) - lambda*y + s,  y = e^s - 1
// is unimodal; its derivative d/ds = (psi(y+r) - psi(y+1) - lambda)(y+1) + 1
// is decreasing, so the mode is found by bisection and the integrand is
// normalized by the exact peak before integrating.
double log_g_quadrature(double r, double lambda) {
  const double lgr = std::lgamma(r);
  const auto lt = [&](double s) {
    return log_integrand(std::expm1(s), r, lambda, lgr) + s;
  };
  const auto dlt = [&](double s) {
    const double y = std::expm1(s);
    return (num::digamma(y + r) - num::digamma(y + 1.0) - lambda) * (y + 1.0) +
           1.0;
  };

  double s_mode = 0.0;
  if (dlt(0.0) > 0.0) {
    double hi = 1.0;
    while (dlt(hi) > 0.0 && hi < 120.0) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      s_mode = 0.5 * (lo + hi);
      (dlt(s_mode) > 0.0 ? lo : hi) = s_mode;
    }
  }
  const double lmax = std::max(lt(s_mode), 0.0);

  // upper cutoff: 40 nats below the peak (NaN from lgamma overflow reads as
  // past the cutoff)
  double s_hi = s_mode;
  for (int it = 0; it < 300; ++it) {
    s_hi += std::max(0.25, 0.25 * s_hi);
    const double l = lt(s_hi);
    if (std::isnan(l) || l < lmax - 40.0 || s_hi > 690.0) break;
  }

  const auto f = [&](double s) {
    const double l = lt(s) - lmax;
    return std::isnan(l) ? 0.0 : std::exp(l);
  };
  const double tol = 1e-12 * (s_hi + 1.0);
  double integral = num::adaptive_simpson_abs(f, 0.0, s_mode, tol);
  integral += num::adaptive_simpson_abs(f, s_mode, s_hi, tol);
  return lmax + std::log(integral);
}

const LogGTable& LogGTable::instance() {
  static LogGTable table = [] {
    LogGTable t;
    t.nu = static_cast<int>(std::lround((kUMax - kUMin) / kStep)) + 1;
    t.nv = static_cast<int>(std::lround((kVMax - kVMin) / kStep)) + 1;
    t.data.resize(static_cast<std::size_t>(t.nu) * t.nv);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < t.nu; ++i) {
      const double r = std::exp(kUMin + i * kStep);
      for (int j = 0; j < t.nv; ++j) {
        const double lambda = std::exp(kVMin + j * kStep);
        t.data[static_cast<std::size_t>(i) * t.nv + j] =
            log_g_quadrature(r, lambda);
      }
    }
    return t;
  }();
  return table;
}

// Catmull-Rom weights and derivative weights at fraction t in [0, 1]
void cr_weights(double t, double w[4], double dw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
  dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
  dw[1] = 0.5 * (9 * t2 - 10 * t);
  dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
  dw[3] = 0.5 * (3 * t2 - 2 * t);
}

LogGTable::Eval LogGTable::eval(double u, double v) const {
  u = std::clamp(u, kUMin, kUMax);
  v = std::clamp(v, kVMin, kVMax);
  const double fu = (u - kUMin) / kStep;
  const double fv = (v - kVMin) / kStep;
  int iu = std::min(static_cast<int>(fu), nu - 2);
  int iv = std::min(static_cast<int>(fv), nv - 2);
  const double tu = fu - iu;
  const double tv = fv - iv;
  double wu[4], dwu[4], wv[4], dwv[4];
  cr_weights(tu, wu, dwu);
  cr_weights(tv, wv, dwv);
  double value = 0.0, du = 0.0, dv = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0, drow = 0.0;
    for (int b = 0; b < 4; ++b) {
      const double g = at(iu + a - 1, iv + b - 1);
      row += wv[b] * g;
      drow += dwv[b] * g;
    }
    value += wu[a] * row;
    du += dwu[a] * row;
    dv += wu[a] * drow;
  }
  return {value, du / kStep, dv / kStep};
}

struct LogNorm {
  double value, d_r, d_p;
};

LogNorm log_g(double r, double p) {
  const double lambda = -std::log(p);
  const auto e = LogGTable::instance().eval(std::log(r), std::log(lambda));
  // u = ln r, v = ln lambda, lambda = -ln p
  const double d_r = e.du / r;
  const double d_p = e.dv * (-1.0 / (lambda * p));
  return {e.value, d_r, d_p};
}

}  // namespace

double negbin_log_norm(double r, double p) { return log_g(r, p).value; }

double negbin_log_norm_quadrature(double r, double p) {
  return log_g_quadrature(r, -std::log(p));
}

void MixtureParams::validate() const {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw ContractError("mixture: negative weight");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw ContractError("mixture: weights sum to " + std::to_string(sum));
  if (!(t_df >= 2.0)) throw ContractError("mixture: student-t df below 2");
  if (!(t_scale > 0.0 && ln_scale > 0.0 && nb_count > 0.0))
    throw ContractError("mixture: non-positive scale parameter");
  if (!(nb_prob > 0.0 && nb_prob < 1.0))
    throw ContractError("mixture: negbin probability outside (0, 1)");
}

MixtureParams constrain(const std::array<double, 12>& raw) {
  for (double v : raw)
    if (!std::isfinite(v))
      throw NumericError("constrain: non-finite raw parameter");
  MixtureParams p;
  double mx = std::max(std::max(raw[0], raw[1]), std::max(raw[2], raw[3]));
  double z = 0.0;
  for (int i = 0; i < 4; ++i) {
    p.w[i] = std::exp(raw[i] - mx);
    z += p.w[i];
  }
  for (int i = 0; i < 4; ++i) p.w[i] /= z;
  p.t_df = 2.0 + num::softplus(raw[4]);
  p.t_loc = raw[5];
  p.t_scale = num::softplus(raw[6]) + kPosEps;
  p.ln_loc = raw[7];
  p.ln_scale = num::softplus(raw[8]) + kPosEps;
  p.nb_count = num::softplus(raw[9]) + kPosEps;
  p.nb_prob = kProbEps + (1.0 - 2.0 * kProbEps) * num::sigmoid(raw[10]);
  p.lv_loc = raw[11];
  return p;
}

double student_t_logpdf(double y, double df, double loc, double scale) {
  const double z = (y - loc) / scale;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(M_PI * df) - std::log(scale) -
         0.5 * (df + 1.0) * std::log1p(z * z / df);
}

double lognormal_logpdf(double y, double loc, double scale) {
  if (!(y > 0.0)) return kLogDensityFloor;
  const double ly = std::log(y);
  const double z = (ly - loc) / scale;
  return -ly - std::log(scale) - kHalfLog2Pi - 0.5 * z * z;
}

double negbin_logpdf(double y, double r, double p) {
  if (y < 0.0) return kLogDensityFloor;
  return std::lgamma(y + r) - std::lgamma(y + 1.0) - std::lgamma(r) +
         y * std::log(p) - negbin_log_norm(r, p);
}

double lowvar_normal_logpdf(double y, double loc) {
  const double z = (y - loc) / kLowVarSigma;
  return -std::log(kLowVarSigma) - kHalfLog2Pi - 0.5 * z * z;
}

double log_prob(const MixtureParams& params, double y) {
  if (!std::isfinite(y)) throw NumericError("log_prob: non-finite target");
  params.validate();
  const double comps[4] = {
      std::log(params.w[0]) + student_t_logpdf(y, params.t_df, params.t_loc,
                                               params.t_scale),
      std::log(params.w[1]) + lognormal_logpdf(y, params.ln_loc, params.ln_scale),
      std::log(params.w[2]) + negbin_logpdf(y, params.nb_count, params.nb_prob),
      std::log(params.w[3]) + lowvar_normal_logpdf(y, params.lv_loc)};
  const double mx = *std::max_element(comps, comps + 4);
  double acc = 0.0;
  for (double c : comps) acc += std::exp(c - mx);
  return mx + std::log(acc);
}

// --- differentiable path ----------------------------------------------------

namespace {

using ad::Tensor;

// custom op: elementwise log G(r, p) with gradients from the interpolant
Tensor negbin_log_norm_rows(const Tensor& r, const Tensor& p) {
  const std::size_t n = r.numel();
  std::vector<double> value(n), dr(n), dp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LogNorm g = log_g(r.values()[i], p.values()[i]);
    value[i] = g.value;
    dr[i] = g.d_r;
    dp[i] = g.d_p;
  }
  auto rn = r.node, pn = p.node;
  return ad::make_traced(
      r.shape(), std::move(value), {r, p}, [rn, pn, dr, dp](Tensor out) {
        auto on = out.node;
        return [rn, pn, on, dr, dp] {
          for (std::size_t i = 0; i < dr.size(); ++i) {
            if (rn->requires_grad) {
              rn->ensure_grad();
              rn->grad[i] += on->grad[i] * dr[i];
            }
            if (pn->requires_grad) {
              pn->ensure_grad();
              pn->grad[i] += on->grad[i] * dp[i];
            }
          }
        };
      });
}

Tensor col(const Tensor& raw, std::size_t c) { return ad::slice(raw, 1, c, 1); }

Tensor scalar_bc(double v) { return Tensor::scalar(v); }

// log softmax over the 4 logit columns, stabilized with a detached row max
Tensor log_weights(const Tensor& logits) {
  const std::size_t n = logits.shape()[0];
  std::vector<double> mx(n, -1e300);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      mx[i] = std::max(mx[i], logits.values()[i * 4 + j]);
  Tensor m = Tensor::constant({n, 1}, std::move(mx));
  Tensor shifted = ad::sub(logits, m);
  Tensor lse = ad::add(ad::log(ad::sum(ad::exp(shifted), 1, true)), m);
  return ad::sub(logits, lse);
}

// row-wise log-sum-exp of [N x 4], stabilized with a detached max
Tensor log_sum_exp_rows(const Tensor& x) {
  const std::size_t n = x.shape()[0], c = x.shape()[1];
  std::vector<double> mx(n, -1e300);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j)
      mx[i] = std::max(mx[i], x.values()[i * c + j]);
  Tensor m = Tensor::constant({n, 1}, std::move(mx));
  return ad::add(ad::log(ad::sum(ad::exp(ad::sub(x, m)), 1, true)), m);
}

// support mask as {0,1} constants plus a floored fill
Tensor mask_support(const Tensor& logpdf, const std::vector<double>& mask) {
  const std::size_t n = mask.size();
  Tensor m = Tensor::constant({n, 1}, mask);
  std::vector<double> fill(n);
  for (std::size_t i = 0; i < n; ++i)
    fill[i] = mask[i] == 0.0 ? kLogDensityFloor : 0.0;
  return ad::add(ad::mul(logpdf, m), Tensor::constant({n, 1}, std::move(fill)));
}

Tensor student_t_logpdf_rows(const Tensor& df, const Tensor& loc,
                             const Tensor& scale, const Tensor& y) {
  Tensor half = scalar_bc(0.5);
  Tensor z = ad::divide(ad::sub(y, loc), scale);
  Tensor z2_over = ad::divide(ad::mul(z, z), df);
  Tensor dfp1_half = ad::mul(ad::add(df, scalar_bc(1.0)), half);
  return ad::sub(
      ad::sub(ad::sub(ad::lgamma(dfp1_half), ad::lgamma(ad::mul(df, half))),
              ad::add(ad::mul(half, ad::log(ad::mul(df, scalar_bc(M_PI)))),
                      ad::log(scale))),
      ad::mul(dfp1_half, ad::log(ad::add(z2_over, scalar_bc(1.0)))));
}

}  // namespace

Tensor mixture_log_prob_rows(const Tensor& raw, const std::vector<double>& y) {
  if (raw.shape().size() != 2 || raw.shape()[1] != 12)
    throw ContractError("mixture: expected [N x 12] raw block, got " +
                        ad::shape_str(raw.shape()));
  const std::size_t n = raw.shape()[0];
  if (y.size() != n) throw ContractError("mixture: target count mismatch");
  for (double v : raw.values())
    if (!std::isfinite(v)) throw NumericError("mixture: non-finite raw block");

  Tensor y_t = Tensor::constant({n, 1}, y);
  std::vector<double> pos_mask(n), nonneg_mask(n), y_pos(n), log_y_pos(n),
      y_nonneg(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos_mask[i] = y[i] > 0.0 ? 1.0 : 0.0;
    nonneg_mask[i] = y[i] >= 0.0 ? 1.0 : 0.0;
    y_pos[i] = y[i] > 0.0 ? y[i] : 1.0;  // placeholder off-support
    log_y_pos[i] = std::log(y_pos[i]);
    y_nonneg[i] = y[i] >= 0.0 ? y[i] : 0.0;
  }

  Tensor logw = log_weights(ad::slice(raw, 1, 0, 4));
  Tensor half = scalar_bc(0.5);

  // student-t
  Tensor df = ad::add(ad::softplus(col(raw, 4)), scalar_bc(2.0));
  Tensor t_scale = ad::add(ad::softplus(col(raw, 6)), scalar_bc(kPosEps));
  Tensor lp_t = student_t_logpdf_rows(df, col(raw, 5), t_scale, y_t);

  // log-normal on y > 0
  Tensor ln_scale = ad::add(ad::softplus(col(raw, 8)), scalar_bc(kPosEps));
  Tensor ln_loc = col(raw, 7);
  Tensor ly = Tensor::constant({n, 1}, log_y_pos);
  Tensor zln = ad::divide(ad::sub(ly, ln_loc), ln_scale);
  Tensor lp_ln_raw = ad::sub(
      ad::neg(ad::add(ly, ad::add(ad::log(ln_scale), scalar_bc(kHalfLog2Pi)))),
      ad::mul(half, ad::mul(zln, zln)));
  Tensor lp_ln = mask_support(lp_ln_raw, pos_mask);

  // continuous negative binomial on y >= 0
  Tensor r = ad::add(ad::softplus(col(raw, 9)), scalar_bc(kPosEps));
  Tensor p = ad::add(
      ad::mul(ad::sigmoid(col(raw, 10)), scalar_bc(1.0 - 2.0 * kProbEps)),
      scalar_bc(kProbEps));
  Tensor ynn = Tensor::constant({n, 1}, y_nonneg);
  std::vector<double> lgamma_y1(n);
  for (std::size_t i = 0; i < n; ++i) lgamma_y1[i] = std::lgamma(y_nonneg[i] + 1.0);
  Tensor lp_nb_raw = ad::sub(
      ad::add(ad::sub(ad::lgamma(ad::add(ynn, r)), ad::lgamma(r)),
              ad::mul(ynn, ad::log(p))),
      ad::add(Tensor::constant({n, 1}, std::move(lgamma_y1)),
              negbin_log_norm_rows(r, p)));
  Tensor lp_nb = mask_support(lp_nb_raw, nonneg_mask);

  // fixed low-variance normal
  Tensor zlv = ad::divide(ad::sub(y_t, col(raw, 11)), scalar_bc(kLowVarSigma));
  Tensor lp_lv = ad::sub(
      scalar_bc(-std::log(kLowVarSigma) - kHalfLog2Pi),
      ad::mul(half, ad::mul(zlv, zlv)));

  Tensor stacked = ad::concat(
      {ad::add(col(logw, 0), lp_t), ad::add(col(logw, 1), lp_ln),
       ad::add(col(logw, 2), lp_nb), ad::add(col(logw, 3), lp_lv)},
      1);
  return log_sum_exp_rows(stacked);
}

Tensor student_t_log_prob_rows(const Tensor& raw, const std::vector<double>& y) {
  if (raw.shape().size() != 2 || raw.shape()[1] != 3)
    throw ContractError("student-t head: expected [N x 3] raw block, got " +
                        ad::shape_str(raw.shape()));
  const std::size_t n = raw.shape()[0];
  if (y.size() != n) throw ContractError("student-t head: target count mismatch");
  Tensor y_t = Tensor::constant({n, 1}, y);
  Tensor df = ad::add(ad::softplus(col(raw, 0)), scalar_bc(2.0));
  Tensor scale = ad::add(ad::softplus(col(raw, 2)), scalar_bc(kPosEps));
  return student_t_logpdf_rows(df, col(raw, 1), scale, y_t);
}

Tensor nll_from_log_probs(const Tensor& log_probs) {
  if (log_probs.numel() == 0)
    throw ContractError("nll: empty loss mask, no elements to score");
  return ad::neg(ad::mean(log_probs));
}

// --- sampling ----------------------------------------------------------------

namespace {

// numeric inverse-CDF sampler for the continuous negative binomial,
// built once per parameter pair in s = ln(1+y) space
struct NegBinSampler {
  std::vector<double> ys, cdf;

  NegBinSampler(double r, double p) {
    const double lambda = -std::log(p);
    const double lgr = std::lgamma(r);
    const auto lt = [&](double s) {
      return log_integrand(std::expm1(s), r, lambda, lgr) + s;
    };
    const auto dlt = [&](double s) {
      const double y = std::expm1(s);
      return (num::digamma(y + r) - num::digamma(y + 1.0) - lambda) *
                 (y + 1.0) +
             1.0;
    };
    double s_mode = 0.0;
    if (dlt(0.0) > 0.0) {
      double hi = 1.0;
      while (dlt(hi) > 0.0 && hi < 120.0) hi *= 2.0;
      double lo = 0.0;
      for (int it = 0; it < 100; ++it) {
        s_mode = 0.5 * (lo + hi);
        (dlt(s_mode) > 0.0 ? lo : hi) = s_mode;
      }
    }
    const double lmax = std::max(lt(s_mode), 0.0);
    double s_hi = s_mode;
    for (int it = 0; it < 300; ++it) {
      s_hi += std::max(0.25, 0.25 * s_hi);
      const double l = lt(s_hi);
      if (std::isnan(l) || l < lmax - 40.0 || s_hi > 690.0) break;
    }
    // trapezoid CDF of the y-space density on the s-spaced grid
    const int n = 2048;
    ys.resize(n + 1);
    cdf.assign(n + 1, 0.0);
    std::vector<double> g_log(n + 1);
    double gmax = -1e300;
    for (int i = 0; i <= n; ++i) {
      const double s = s_hi * i / n;
      ys[i] = std::expm1(s);
      g_log[i] = log_integrand(ys[i], r, lambda, lgr);
      if (!std::isnan(g_log[i])) gmax = std::max(gmax, g_log[i]);
    }
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double l = g_log[i] - gmax;
      f[i] = std::isnan(l) ? 0.0 : std::exp(l);
    }
    for (int i = 1; i <= n; ++i)
      cdf[i] = cdf[i - 1] + 0.5 * (f[i - 1] + f[i]) * (ys[i] - ys[i - 1]);
    for (double& c : cdf) c /= cdf.back();
  }

  double draw(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double target = u(rng);
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const std::size_t j = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(1, it - cdf.begin()), cdf.size() - 1);
    const double c0 = cdf[j - 1], c1 = cdf[j];
    const double t = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
    return ys[j - 1] + t * (ys[j] - ys[j - 1]);
  }
};

}  // namespace

double sample_one(const MixtureParams& params, std::mt19937_64& rng) {
  params.validate();
  std::discrete_distribution<int> pick(params.w.begin(), params.w.end());
  switch (pick(rng)) {
    case 0: {
      std::student_t_distribution<double> t(params.t_df);
      return params.t_loc + params.t_scale * t(rng);
    }
    case 1: {
      std::lognormal_distribution<double> ln(params.ln_loc, params.ln_scale);
      return ln(rng);
    }
    case 2: {
      NegBinSampler nb(params.nb_count, params.nb_prob);
      return nb.draw(rng);
    }
    default: {
      std::normal_distribution<double> nd(params.lv_loc, kLowVarSigma);
      return nd(rng);
    }
  }
}

std::vector<double> sample(const MixtureParams& params, std::size_t n,
                           std::mt19937_64& rng) {
  if (n == 0) throw ContractError("sample: need at least one draw");
  params.validate();
  std::discrete_distribution<int> pick(params.w.begin(), params.w.end());
  std::unique_ptr<NegBinSampler> nb;  // built lazily, reused across draws
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (pick(rng)) {
      case 0: {
        std::student_t_distribution<double> t(params.t_df);
        out[i] = params.t_loc + params.t_scale * t(rng);
        break;
      }
      case 1: {
        std::lognormal_distribution<double> ln(params.ln_loc, params.ln_scale);
        out[i] = ln(rng);
        break;
      }
      case 2: {
        if (!nb) nb = std::make_unique<NegBinSampler>(params.nb_count,
                                                      params.nb_prob);
        out[i] = nb->draw(rng);
        break;
      }
      default: {
        std::normal_distribution<double> nd(params.lv_loc, kLowVarSigma);
        out[i] = nd(rng);
        break;
      }
    }
  }
  return out;
}

std::vector<double> quantiles(std::vector<double> samples,
                              const std::vector<double>& levels) {
  if (samples.empty()) throw ContractError("quantiles: no samples");
  std::sort(samples.begin(), samples.end());
  std::vector<double> out;
  out.reserve(levels.size());
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0))
      throw ContractError("quantiles: level outside (0, 1)");
    const double pos = a * static_cast<double>(samples.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    const double t = pos - static_cast<double>(lo);
    out.push_back(samples[lo] + t * (samples[hi] - samples[lo]));
  }
  return out;
}

}  // namespace tsfm
