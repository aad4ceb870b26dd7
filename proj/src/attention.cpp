#include "tsfm/attention.hpp"

#include <cmath>

#include "tsfm/errors.hpp"

namespace tsfm {

RotaryCache RotaryCache::build(int dim, long max_pos, double base) {
  if (dim % 2 != 0) throw ContractError("rotary cache: dim must be even");
  RotaryCache c;
  c.dim = dim;
  c.base = base;
  const int half = dim / 2;
  c.cos_t.resize(static_cast<std::size_t>(max_pos) * half);
  c.sin_t.resize(static_cast<std::size_t>(max_pos) * half);
  for (long p = 0; p < max_pos; ++p) {
    for (int k = 0; k < half; ++k) {
      const double theta = std::pow(base, -2.0 * k / static_cast<double>(dim));
      c.cos_t[p * half + k] = std::cos(p * theta);
      c.sin_t[p * half + k] = std::sin(p * theta);
    }
  }
  return c;
}

std::vector<double> RotaryCache::rotate(std::span<const double> v,
                                        long pos) const {
  const int half = dim / 2;
  std::vector<double> out(v.size());
  for (int k = 0; k < half; ++k) {
    const double cs = cos_t[pos * half + k];
    const double sn = sin_t[pos * half + k];
    out[2 * k] = cs * v[2 * k] - sn * v[2 * k + 1];
    out[2 * k + 1] = sn * v[2 * k] + cs * v[2 * k + 1];
  }
  return out;
}

ad::Tensor rms_norm(const ad::Tensor& x, const ad::Tensor& gain, double eps) {
  const std::size_t d = x.shape().back();
  if (gain.numel() != d)
    throw ContractError("rms_norm: gain width " + std::to_string(gain.numel()) +
                        " does not match " + ad::shape_str(x.shape()));
  ad::Tensor ms = ad::mean(ad::mul(x, x), x.shape().size() - 1, true);
  ad::Tensor inv = ad::pow(ad::add(ms, ad::Tensor::scalar(eps)), -0.5);
  return ad::mul(ad::mul(x, inv), ad::reshape(gain, {1, d}));
}

namespace {

// per-head RMS norm + gain + rotation
ad::Tensor norm_rotate(const ad::Tensor& qk, const ad::Tensor& gain, int head,
                       int d_kv, const std::vector<long>& pos) {
  ad::Tensor h = ad::slice(qk, 1, static_cast<std::size_t>(head) * d_kv,
                           static_cast<std::size_t>(d_kv));
  ad::Tensor g = ad::slice(gain, 0, static_cast<std::size_t>(head), 1);
  return ad::rotary(rms_norm(h, g), pos, kRotaryBase);
}

std::vector<long> clamped_positions(const std::vector<long>& time_id) {
  std::vector<long> pos(time_id.size());
  for (std::size_t i = 0; i < time_id.size(); ++i)
    pos[i] = time_id[i] < 0 ? 0 : time_id[i];
  return pos;
}

}  // namespace

double score(std::span<const double> x_query, std::span<const double> x_key,
             long time_q, long time_k, long var_q, long var_k, int head,
             const AttentionLayerParams& params) {
  const std::size_t d_model = x_query.size();
  ad::Tensor xq = ad::Tensor::constant(
      {1, d_model}, std::vector<double>(x_query.begin(), x_query.end()));
  ad::Tensor xk = ad::Tensor::constant(
      {1, d_model}, std::vector<double>(x_key.begin(), x_key.end()));
  ad::Tensor q = norm_rotate(ad::matmul(xq, params.wq), params.q_gain, head,
                             params.d_kv, {time_q});
  ad::Tensor k = norm_rotate(ad::matmul(xk, params.wk), params.k_gain, head,
                             params.d_kv, {time_k});
  double dot = 0.0;
  for (int i = 0; i < params.d_kv; ++i) dot += q.values()[i] * k.values()[i];
  const double bias = var_q == var_k ? params.u_same.values()[head]
                                     : params.u_diff.values()[head];
  return dot / std::sqrt(static_cast<double>(params.d_kv)) + bias;
}

ad::Tensor attend(const ad::Tensor& x, const std::vector<long>& time_id,
                  const std::vector<long>& variate_id,
                  const std::vector<std::uint8_t>& allow,
                  const AttentionLayerParams& params) {
  const std::size_t t = x.shape()[0];
  if (time_id.size() != t || variate_id.size() != t || allow.size() != t * t)
    throw ContractError("attend: metadata does not match token count");

  const std::vector<long> pos = clamped_positions(time_id);
  std::vector<double> same(t * t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < t; ++j)
      same[i * t + j] = variate_id[i] == variate_id[j] ? 1.0 : 0.0;
  ad::Tensor same_t = ad::Tensor::constant({t, t}, std::move(same));
  ad::Tensor diff_t = ad::sub(ad::Tensor::full({t, t}, 1.0), same_t);
  ad::Tensor inv_sqrt =
      ad::Tensor::scalar(1.0 / std::sqrt(static_cast<double>(params.d_kv)));

  ad::Tensor q_all = ad::matmul(x, params.wq);
  ad::Tensor k_all = ad::matmul(x, params.wk);
  ad::Tensor v_all = ad::matmul(x, params.wv);

  std::vector<ad::Tensor> heads;
  heads.reserve(params.heads);
  for (int h = 0; h < params.heads; ++h) {
    ad::Tensor q = norm_rotate(q_all, params.q_gain, h, params.d_kv, pos);
    ad::Tensor k = norm_rotate(k_all, params.k_gain, h, params.d_kv, pos);
    ad::Tensor scores = ad::mul(ad::matmul(q, ad::transpose(k)), inv_sqrt);
    ad::Tensor us = ad::slice(params.u_same, 0, h, 1);
    ad::Tensor ud = ad::slice(params.u_diff, 0, h, 1);
    ad::Tensor biased = ad::add(
        scores, ad::add(ad::mul(us, same_t), ad::mul(ud, diff_t)));
    ad::Tensor attn = ad::masked_softmax(biased, allow);
    ad::Tensor v = ad::slice(v_all, 1, static_cast<std::size_t>(h) * params.d_kv,
                             static_cast<std::size_t>(params.d_kv));
    heads.push_back(ad::matmul(attn, v));
  }
  ad::Tensor merged = params.heads == 1 ? heads[0] : ad::concat(heads, 1);
  return ad::matmul(merged, params.wo);
}

}  // namespace tsfm
