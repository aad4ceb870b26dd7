#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsfm/tensor.hpp"

namespace tsfm {

// Per-layer attention parameters. Queries and keys are RMS-normalized per
// head with a learnable gain, then rotated by the relative time encoding;
// u_same / u_diff are the additive same-variate / cross-variate score biases,
// one scalar per head.
struct AttentionLayerParams {
  int heads = 0;
  int d_kv = 0;
  ad::Tensor wq, wk, wv;  // [d_model x heads*d_kv], bias-free
  ad::Tensor wo;          // [heads*d_kv x d_model]
  ad::Tensor q_gain, k_gain;  // [heads x d_kv]
  ad::Tensor u_same, u_diff;  // [heads]
};

constexpr double kRotaryBase = 10000.0;
constexpr double kRmsEps = 1e-6;

// cos/sin tables for positions [0, max_pos); pairs (2k, 2k+1) rotate by
// pos * base^(-2k/dim).
struct RotaryCache {
  int dim = 0;
  double base = kRotaryBase;
  std::vector<double> cos_t, sin_t;  // [max_pos x dim/2]

  static RotaryCache build(int dim, long max_pos, double base = kRotaryBase);
  std::vector<double> rotate(std::span<const double> v, long pos) const;
};

ad::Tensor rms_norm(const ad::Tensor& x, const ad::Tensor& gain,
                    double eps = kRmsEps);

// Pre-softmax score of one query/key token pair, for tests and diagnostics.
// Mirrors the batched path: qk-norm, rotation, scaled dot product, variate
// bias for the given head.
double score(std::span<const double> x_query, std::span<const double> x_key,
             long time_q, long time_k, long var_q, long var_k, int head,
             const AttentionLayerParams& params);

// Full bidirectional multi-head attention over a flattened sequence.
// `allow` is the row-major [T x T] attention mask (block-diagonal over
// packed samples); every token, masked or not, attends within its block.
ad::Tensor attend(const ad::Tensor& x, const std::vector<long>& time_id,
                  const std::vector<long>& variate_id,
                  const std::vector<std::uint8_t>& allow,
                  const AttentionLayerParams& params);

}  // namespace tsfm
