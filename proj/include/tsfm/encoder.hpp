#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsfm/attention.hpp"
#include "tsfm/patching.hpp"
#include "tsfm/projections.hpp"
#include "tsfm/tensor.hpp"

namespace tsfm {

struct ModelConfig {
  int layers = 2;
  int d_model = 64;
  int d_ff = 256;
  int heads = 2;
  int d_kv = 32;
  int n_dist_params = kMixtureRawParams;

  // presets: tiny(2,64,256,2,32) small(6,384,1536,6,64)
  // base(12,768,3072,12,64) large(24,1024,4096,16,64)
  static ModelConfig preset(const std::string& name);

  // SwiGLU hidden width sized for parameter parity with a plain FFN of d_ff
  int ffn_hidden() const {
    return static_cast<int>(std::lround(2.0 * d_ff / 3.0));
  }
  void validate() const;
};

struct EncoderLayerWeights {
  AttentionLayerParams attn;
  ad::Tensor norm1_gain, norm2_gain;   // [d_model]
  ad::Tensor w_gate, w_up;             // [d_model x ffn_hidden]
  ad::Tensor w_down;                   // [ffn_hidden x d_model]
};

struct ModelWeights {
  ModelConfig config;
  ProjectionBank bank;
  std::vector<EncoderLayerWeights> layers;
  ad::Tensor final_norm_gain;

  static ModelWeights init(const ModelConfig& config, std::uint64_t seed);

  std::vector<std::pair<std::string, ad::Tensor>> named_params() const;
  std::size_t parameter_count() const;
  void zero_grad() const;
};

// Parameter count from the config alone (nothing allocated).
std::size_t analytic_parameter_count(const ModelConfig& config);

ad::Tensor swiglu_ffn(const ad::Tensor& x, const ad::Tensor& w_gate,
                      const ad::Tensor& w_up, const ad::Tensor& w_down);

// Pre-norm encoder stack over already-embedded tokens.
ad::Tensor encode(const ad::Tensor& embeddings, const std::vector<long>& time_id,
                  const std::vector<long>& variate_id,
                  const std::vector<std::uint8_t>& allow,
                  const ModelWeights& weights);

// Single-sample convenience: embed + full bidirectional attention.
ad::Tensor forward(const FlattenedTokens& tokens, const ModelWeights& weights);

}  // namespace tsfm
