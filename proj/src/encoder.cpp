#include "tsfm/encoder.hpp"

#include <cmath>
#include <random>

#include "tsfm/errors.hpp"

namespace tsfm {

ModelConfig ModelConfig::preset(const std::string& name) {
  ModelConfig c;
  if (name == "tiny") {
    c = {2, 64, 256, 2, 32};
  } else if (name == "small") {
    c = {6, 384, 1536, 6, 64};
  } else if (name == "base") {
    c = {12, 768, 3072, 12, 64};
  } else if (name == "large") {
    c = {24, 1024, 4096, 16, 64};
  } else {
    throw ConfigError("unknown model preset '" + name +
                      "' (tiny, small, base, large)");
  }
  return c;
}

void ModelConfig::validate() const {
  if (layers < 1 || d_model < 2 || heads < 1 || d_kv < 2 || d_ff < 1)
    throw ConfigError("model config: non-positive dimension");
  if (d_model != heads * d_kv)
    throw ConfigError("model config: d_model (" + std::to_string(d_model) +
                      ") must equal heads*d_kv (" +
                      std::to_string(heads * d_kv) + ")");
  if (d_kv % 2 != 0)
    throw ConfigError("model config: d_kv must be even for rotary encoding");
}

namespace {

std::vector<double> glorot_vec(std::mt19937_64& rng, std::size_t fan_in,
                               std::size_t fan_out) {
  std::normal_distribution<double> d(
      0.0, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
  std::vector<double> v(fan_in * fan_out);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

ModelWeights ModelWeights::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ModelWeights w;
  w.config = config;
  w.bank = ProjectionBank::init(config.d_model, config.n_dist_params, rng);

  const std::size_t d = static_cast<std::size_t>(config.d_model);
  const std::size_t hk = static_cast<std::size_t>(config.heads * config.d_kv);
  const std::size_t hid = static_cast<std::size_t>(config.ffn_hidden());
  for (int l = 0; l < config.layers; ++l) {
    EncoderLayerWeights lw;
    lw.attn.heads = config.heads;
    lw.attn.d_kv = config.d_kv;
    lw.attn.wq = ad::Tensor::param({d, hk}, glorot_vec(rng, d, hk));
    lw.attn.wk = ad::Tensor::param({d, hk}, glorot_vec(rng, d, hk));
    lw.attn.wv = ad::Tensor::param({d, hk}, glorot_vec(rng, d, hk));
    lw.attn.wo = ad::Tensor::param({hk, d}, glorot_vec(rng, hk, d));
    lw.attn.q_gain = ad::Tensor::param(
        {static_cast<std::size_t>(config.heads),
         static_cast<std::size_t>(config.d_kv)},
        std::vector<double>(hk, 1.0));
    lw.attn.k_gain = ad::Tensor::param(
        {static_cast<std::size_t>(config.heads),
         static_cast<std::size_t>(config.d_kv)},
        std::vector<double>(hk, 1.0));
    lw.attn.u_same = ad::Tensor::param(
        {static_cast<std::size_t>(config.heads)},
        std::vector<double>(config.heads, 0.0));
    lw.attn.u_diff = ad::Tensor::param(
        {static_cast<std::size_t>(config.heads)},
        std::vector<double>(config.heads, 0.0));
    lw.norm1_gain = ad::Tensor::param({d}, std::vector<double>(d, 1.0));
    lw.norm2_gain = ad::Tensor::param({d}, std::vector<double>(d, 1.0));
    lw.w_gate = ad::Tensor::param({d, hid}, glorot_vec(rng, d, hid));
    lw.w_up = ad::Tensor::param({d, hid}, glorot_vec(rng, d, hid));
    lw.w_down = ad::Tensor::param({hid, d}, glorot_vec(rng, hid, d));
    w.layers.push_back(std::move(lw));
  }
  w.final_norm_gain = ad::Tensor::param({d}, std::vector<double>(d, 1.0));
  return w;
}

std::vector<std::pair<std::string, ad::Tensor>> ModelWeights::named_params()
    const {
  std::vector<std::pair<std::string, ad::Tensor>> out;
  for (std::size_t s = 0; s < all_patch_sizes().size(); ++s) {
    const std::string p = std::to_string(all_patch_sizes()[s]);
    out.emplace_back("proj.in." + p, bank.in_weight[s]);
    out.emplace_back("proj.out." + p, bank.out_weight[s]);
  }
  out.emplace_back("mask_embedding", bank.mask_embedding);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string pre = "layer." + std::to_string(l) + ".";
    const EncoderLayerWeights& lw = layers[l];
    out.emplace_back(pre + "attn.wq", lw.attn.wq);
    out.emplace_back(pre + "attn.wk", lw.attn.wk);
    out.emplace_back(pre + "attn.wv", lw.attn.wv);
    out.emplace_back(pre + "attn.wo", lw.attn.wo);
    out.emplace_back(pre + "attn.q_gain", lw.attn.q_gain);
    out.emplace_back(pre + "attn.k_gain", lw.attn.k_gain);
    out.emplace_back(pre + "attn.u_same", lw.attn.u_same);
    out.emplace_back(pre + "attn.u_diff", lw.attn.u_diff);
    out.emplace_back(pre + "norm1.gain", lw.norm1_gain);
    out.emplace_back(pre + "norm2.gain", lw.norm2_gain);
    out.emplace_back(pre + "ffn.w_gate", lw.w_gate);
    out.emplace_back(pre + "ffn.w_up", lw.w_up);
    out.emplace_back(pre + "ffn.w_down", lw.w_down);
  }
  out.emplace_back("final_norm.gain", final_norm_gain);
  return out;
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_params()) n += t.numel();
  return n;
}

void ModelWeights::zero_grad() const {
  for (auto& [name, t] : named_params()) const_cast<ad::Tensor&>(t).zero_grad();
}

std::size_t analytic_parameter_count(const ModelConfig& config) {
  const std::size_t d = static_cast<std::size_t>(config.d_model);
  const std::size_t pmax = static_cast<std::size_t>(all_patch_sizes().back());
  const std::size_t slots = all_patch_sizes().size();
  const std::size_t n = static_cast<std::size_t>(config.n_dist_params);
  const std::size_t hk = static_cast<std::size_t>(config.heads * config.d_kv);
  const std::size_t hid = static_cast<std::size_t>(config.ffn_hidden());

  std::size_t proj = slots * pmax * d + slots * d * pmax * n + d;
  std::size_t per_layer = 3 * d * hk + hk * d   // attention maps
                          + 2 * hk              // qk gains
                          + 2 * static_cast<std::size_t>(config.heads)
                          + 2 * d               // pre-norm gains
                          + 3 * d * hid;        // swiglu
  return proj + static_cast<std::size_t>(config.layers) * per_layer + d;
}

ad::Tensor swiglu_ffn(const ad::Tensor& x, const ad::Tensor& w_gate,
                      const ad::Tensor& w_up, const ad::Tensor& w_down) {
  ad::Tensor g = ad::matmul(x, w_gate);
  ad::Tensor gated = ad::mul(ad::mul(g, ad::sigmoid(g)), ad::matmul(x, w_up));
  return ad::matmul(gated, w_down);
}

ad::Tensor encode(const ad::Tensor& embeddings, const std::vector<long>& time_id,
                  const std::vector<long>& variate_id,
                  const std::vector<std::uint8_t>& allow,
                  const ModelWeights& weights) {
  ad::Tensor x = embeddings;
  for (const EncoderLayerWeights& lw : weights.layers) {
    x = ad::add(x, attend(rms_norm(x, lw.norm1_gain), time_id, variate_id,
                          allow, lw.attn));
    x = ad::add(x, swiglu_ffn(rms_norm(x, lw.norm2_gain), lw.w_gate, lw.w_up,
                              lw.w_down));
  }
  return rms_norm(x, weights.final_norm_gain);
}

ad::Tensor forward(const FlattenedTokens& tokens, const ModelWeights& weights) {
  const std::size_t t = tokens.num_tokens();
  std::vector<std::uint8_t> allow(t * t, 1);
  ad::Tensor emb = embed(tokens, weights.bank);
  return encode(emb, tokens.time_id, tokens.variate_id, allow, weights);
}

}  // namespace tsfm
