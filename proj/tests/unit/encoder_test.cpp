#include "tsfm/encoder.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "tsfm/errors.hpp"

using namespace tsfm;

TEST_CASE("rms norm") {
  std::mt19937_64 rng(2);
  ad::Tensor gain = ad::Tensor::param({4}, {1, 1, 1, 1});

  SUBCASE("unit input stays unit") {
    ad::Tensor x = ad::Tensor::full({3, 4}, 1.0);
    auto y = rms_norm(x, gain);
    for (double v : y.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("positive scaling invariance") {
    ad::Tensor x = testsupport::rand_const(rng, {3, 4});
    ad::Tensor xs = ad::mul(x, ad::Tensor::scalar(37.5));
    auto y0 = rms_norm(x, gain);
    auto y1 = rms_norm(xs, gain);
    for (std::size_t i = 0; i < y0.numel(); ++i)
      CHECK(std::fabs(y0.values()[i] - y1.values()[i]) < 1e-6);
  }
  SUBCASE("gradient passes finite differences") {
    ad::Tensor x = testsupport::rand_param(rng, {3, 4});
    ad::Tensor g2 = testsupport::rand_param(rng, {4}, 0.5, 1.5);
    ad::Tensor probe = testsupport::rand_const(rng, {3, 4});
    auto rep = testsupport::finite_diff_check(
        {x, g2}, [&] { return ad::sum(ad::mul(rms_norm(x, g2), probe)); },
        1e-4);
    CHECK(rep.ok());
  }
}

TEST_CASE("swiglu ffn") {
  std::mt19937_64 rng(3);
  ad::Tensor wg = testsupport::rand_param(rng, {4, 6});
  ad::Tensor wu = testsupport::rand_param(rng, {4, 6});
  ad::Tensor wd = testsupport::rand_param(rng, {6, 4});

  SUBCASE("zero input maps to zero") {
    auto y = swiglu_ffn(ad::Tensor::zeros({2, 4}), wg, wu, wd);
    for (double v : y.values()) CHECK(v == 0.0);
  }
  SUBCASE("hidden width follows the two-thirds rule") {
    CHECK(ModelConfig::preset("small").ffn_hidden() == 1024);
    CHECK(ModelConfig::preset("base").ffn_hidden() == 2048);
    CHECK(ModelConfig::preset("large").ffn_hidden() == 2731);
    CHECK(ModelConfig::preset("tiny").ffn_hidden() == 171);
    // parameter parity with a plain FFN of width d_ff
    for (const char* name : {"tiny", "small", "base", "large"}) {
      auto c = ModelConfig::preset(name);
      const long swiglu = 3L * c.d_model * c.ffn_hidden();
      const long plain = 2L * c.d_model * c.d_ff;
      CHECK(std::labs(swiglu - plain) <= 2L * c.d_model);
    }
  }
  SUBCASE("gradient passes finite differences") {
    ad::Tensor x = testsupport::rand_param(rng, {2, 4});
    ad::Tensor probe = testsupport::rand_const(rng, {2, 4});
    auto rep = testsupport::finite_diff_check(
        {x, wg, wu, wd},
        [&] { return ad::sum(ad::mul(swiglu_ffn(x, wg, wu, wd), probe)); },
        1e-4);
    CHECK(rep.ok());
  }
}

TEST_CASE("parameter counts") {
  SUBCASE("registry count equals the analytic formula") {
    auto cfg = ModelConfig::preset("tiny");
    auto w = ModelWeights::init(cfg, 7);
    CHECK(w.parameter_count() == analytic_parameter_count(cfg));
  }
  SUBCASE("table presets land within 5% of the published sizes") {
    const double small =
        static_cast<double>(analytic_parameter_count(ModelConfig::preset("small")));
    const double base =
        static_cast<double>(analytic_parameter_count(ModelConfig::preset("base")));
    CHECK(std::fabs(small - 14e6) / 14e6 < 0.05);
    CHECK(std::fabs(base - 91e6) / 91e6 < 0.05);
  }
  SUBCASE("no parameter is a bias term") {
    auto w = ModelWeights::init(ModelConfig::preset("tiny"), 7);
    for (const auto& [name, t] : w.named_params()) {
      CHECK(name.find("bias") == std::string::npos);
      // weights are matrices; the rest are gains, biases-as-scores, or the
      // mask embedding
      const bool matrix = t.shape().size() == 2 && t.shape()[0] > 1;
      const bool gain_or_scalar =
          name.find("gain") != std::string::npos ||
          name.find("u_") != std::string::npos ||
          name == "mask_embedding";
      CHECK((matrix || gain_or_scalar));
    }
  }
}

TEST_CASE("encoder forward") {
  auto cfg = ModelConfig::preset("tiny");
  auto w = ModelWeights::init(cfg, 11);

  SUBCASE("single token smoke") {
    FlattenedTokens t;
    t.patch_size = 8;
    t.num_variates = 1;
    t.context_len = 6;
    t.horizon_len = 2;
    t.patches_per_variate = 1;
    t.patches.assign(8, 0.5);
    t.observed.assign(8, 1);
    t.time_id = {0};
    t.variate_id = {0};
    t.is_mask = {0};
    t.is_target = {1};
    t.norm_loc = {0};
    t.norm_scale = {1};
    auto enc = forward(t, w);
    CHECK(enc.shape() == ad::Shape{1, 64});
    for (double v : enc.values()) CHECK(std::isfinite(v));
  }

  SUBCASE("duplicated sample in two packed blocks duplicates outputs") {
    std::mt19937_64 rng(5);
    const std::size_t t = 4, d = 64;
    ad::Tensor one = testsupport::rand_const(rng, {t, d});
    std::vector<double> both(one.values());
    both.insert(both.end(), one.values().begin(), one.values().end());
    std::vector<long> tid{0, 1, 0, 1, 0, 1, 0, 1};
    std::vector<long> vid{0, 0, 1, 1, 0, 0, 1, 1};
    std::vector<std::uint8_t> allow(64, 0);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j)
        if ((i < 4) == (j < 4)) allow[i * 8 + j] = 1;
    auto enc = encode(ad::Tensor::constant({8, d}, std::move(both)), tid, vid,
                      allow, w);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < d; ++j)
        CHECK(enc.values()[i * d + j] == enc.values()[(i + 4) * d + j]);
  }

  SUBCASE("deterministic given weights and input") {
    std::mt19937_64 rng(6);
    ad::Tensor x = testsupport::rand_const(rng, {3, 64});
    std::vector<long> tid{0, 1, 2}, vid{0, 0, 0};
    std::vector<std::uint8_t> allow(9, 1);
    auto a = encode(x, tid, vid, allow, w);
    auto b = encode(x, tid, vid, allow, w);
    CHECK(a.values() == b.values());
  }
}

TEST_CASE("encoder stack gradients pass finite differences") {
  // one-layer micro config keeps the FD sweep fast
  ModelConfig cfg{1, 8, 12, 2, 4};
  auto w = ModelWeights::init(cfg, 13);
  std::mt19937_64 rng(14);
  ad::Tensor x = testsupport::rand_const(rng, {5, 8});
  ad::Tensor probe = testsupport::rand_const(rng, {5, 8});
  std::vector<long> tid{0, 1, 2, 0, 1}, vid{0, 0, 0, 1, 1};
  std::vector<std::uint8_t> allow(25, 1);

  const auto& l = w.layers[0];
  auto rep = testsupport::finite_diff_check(
      {l.attn.wq, l.attn.wk, l.attn.u_same, l.attn.u_diff, l.norm1_gain,
       l.w_gate, l.w_down, w.final_norm_gain},
      [&] { return ad::sum(ad::mul(encode(x, tid, vid, allow, w), probe)); },
      1e-4, 1e-7, 1e-5, /*stride=*/5);
  INFO("worst ", rep.worst);
  CHECK(rep.ok());
}
