#include "tsfm/attention.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "tsfm/errors.hpp"

using namespace tsfm;

namespace {

AttentionLayerParams make_params(int d_model, int heads, int d_kv,
                                 std::mt19937_64& rng) {
  AttentionLayerParams p;
  p.heads = heads;
  p.d_kv = d_kv;
  const std::size_t d = d_model, hk = static_cast<std::size_t>(heads) * d_kv;
  std::normal_distribution<double> n(0.0, 0.3);
  auto mk = [&](std::size_t r, std::size_t c) {
    std::vector<double> v(r * c);
    for (double& x : v) x = n(rng);
    return ad::Tensor::param({r, c}, std::move(v));
  };
  p.wq = mk(d, hk);
  p.wk = mk(d, hk);
  p.wv = mk(d, hk);
  p.wo = mk(hk, d);
  p.q_gain = ad::Tensor::param({static_cast<std::size_t>(heads),
                                static_cast<std::size_t>(d_kv)},
                               std::vector<double>(hk, 1.0));
  p.k_gain = ad::Tensor::param({static_cast<std::size_t>(heads),
                                static_cast<std::size_t>(d_kv)},
                               std::vector<double>(hk, 1.0));
  p.u_same = ad::Tensor::param({static_cast<std::size_t>(heads)},
                               std::vector<double>(heads, 0.0));
  p.u_diff = ad::Tensor::param({static_cast<std::size_t>(heads)},
                               std::vector<double>(heads, 0.0));
  return p;
}

std::vector<std::uint8_t> full_mask(std::size_t t) {
  return std::vector<std::uint8_t>(t * t, 1);
}

}  // namespace

TEST_CASE("rotary cache matches the traced primitive and is orthonormal") {
  std::mt19937_64 rng(4);
  auto cache = RotaryCache::build(8, 64);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<double> v(8);
  for (double& x : v) x = u(rng);

  for (long pos : {0L, 3L, 17L, 63L}) {
    auto manual = cache.rotate(v, pos);
    auto traced = ad::rotary(ad::Tensor::constant({1, 8}, v), {pos}, kRotaryBase);
    double norm0 = 0, norm1 = 0;
    for (int i = 0; i < 8; ++i) {
      CHECK(manual[i] == doctest::Approx(traced.values()[i]).epsilon(1e-15));
      norm0 += v[i] * v[i];
      norm1 += manual[i] * manual[i];
    }
    CHECK(std::fabs(std::sqrt(norm0) - std::sqrt(norm1)) < 1e-9);
  }
}

TEST_CASE("score examples") {
  std::mt19937_64 rng(9);
  auto p = make_params(12, 2, 6, rng);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> xq(12), xk(12);
  for (double& v : xq) v = u(rng);
  for (double& v : xk) v = u(rng);

  SUBCASE("zero bias contributes nothing at equal positions") {
    const double e_same = score(xq, xk, 4, 4, 0, 0, 1, p);
    const double e_diff = score(xq, xk, 4, 4, 0, 3, 1, p);
    CHECK(e_same == doctest::Approx(e_diff).epsilon(1e-12));  // u1 = u2 = 0
  }
  SUBCASE("pure bias with zero projections") {
    auto pz = make_params(12, 2, 6, rng);
    std::fill(pz.wq.values().begin(), pz.wq.values().end(), 0.0);
    std::fill(pz.wk.values().begin(), pz.wk.values().end(), 0.0);
    pz.u_same.values() = {3.0, 3.0};
    pz.u_diff.values() = {-1.0, -1.0};
    CHECK(score(xq, xk, 2, 5, 7, 7, 0, pz) == doctest::Approx(3.0));
    CHECK(score(xq, xk, 2, 5, 7, 8, 0, pz) == doctest::Approx(-1.0));
  }
  SUBCASE("shifting both time ids leaves the score unchanged") {
    const double e0 = score(xq, xk, 11, 4, 0, 1, 0, p);
    const double e1 = score(xq, xk, 16, 9, 0, 1, 0, p);
    CHECK(std::fabs(e0 - e1) < 1e-9);
  }
}

TEST_CASE("attend structure") {
  std::mt19937_64 rng(21);
  const int d = 16, heads = 2, dkv = 8;

  SUBCASE("single token: softmax over one key is identity") {
    auto p = make_params(d, heads, dkv, rng);
    ad::Tensor x = testsupport::rand_const(rng, {1, 16});
    auto out = attend(x, {0}, {0}, full_mask(1), p);
    ad::Tensor v = ad::matmul(x, p.wv);
    ad::Tensor expect = ad::matmul(v, p.wo);
    for (std::size_t i = 0; i < 16; ++i)
      CHECK(out.values()[i] == doctest::Approx(expect.values()[i]).epsilon(1e-12));
  }

  SUBCASE("packed blocks are fully isolated") {
    auto p = make_params(d, heads, dkv, rng);
    // tokens 0..2 sample A, 3..6 sample B
    const std::size_t t = 7;
    std::vector<std::uint8_t> allow(t * t, 0);
    auto block = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = lo; j < hi; ++j) allow[i * t + j] = 1;
    };
    block(0, 3);
    block(3, 7);
    std::vector<long> time_id{0, 1, 2, 0, 1, 2, 3};
    std::vector<long> variate_id{0, 0, 0, 0, 1, 1, 2};

    ad::Tensor x = testsupport::rand_const(rng, {t, 16});
    auto out0 = attend(x, time_id, variate_id, allow, p);

    ad::Tensor x2 = ad::Tensor::constant(x.shape(), x.values());
    std::mt19937_64 rng2(77);
    std::uniform_real_distribution<double> u(-5, 5);
    for (std::size_t i = 3; i < 7; ++i)
      for (std::size_t j = 0; j < 16; ++j) x2.values()[i * 16 + j] = u(rng2);
    auto out1 = attend(x2, time_id, variate_id, allow, p);

    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 16; ++j)
        CHECK(out0.values()[i * 16 + j] == out1.values()[i * 16 + j]);
  }
}

TEST_CASE("any-variate invariances") {
  std::mt19937_64 rng(31);
  const int d = 16;
  auto p = make_params(d, 2, 8, rng);
  p.u_same.values() = {0.7, -0.2};
  p.u_diff.values() = {-0.3, 0.4};

  // 3 variates x 4 patches
  const std::size_t vars = 3, per = 4, t = vars * per;
  std::vector<long> time_id(t), variate_id(t);
  for (std::size_t v = 0; v < vars; ++v)
    for (std::size_t i = 0; i < per; ++i) {
      time_id[v * per + i] = static_cast<long>(i);
      variate_id[v * per + i] = static_cast<long>(v);
    }
  ad::Tensor x = testsupport::rand_const(rng, {t, 16});

  auto base = attend(x, time_id, variate_id, full_mask(t), p);

  SUBCASE("relabeling variate ids is exactly invariant") {
    std::vector<long> relabeled(variate_id);
    for (long& v : relabeled) v = v == 0 ? 42 : (v == 1 ? 7 : 1000);
    auto out = attend(x, time_id, relabeled, full_mask(t), p);
    CHECK(out.values() == base.values());
  }

  SUBCASE("permuting variate blocks permutes outputs") {
    const std::size_t order[3] = {2, 0, 1};  // new block b holds old block order[b]
    std::vector<double> xp(t * 16);
    std::vector<long> tid(t), vid(t);
    for (std::size_t b = 0; b < vars; ++b)
      for (std::size_t i = 0; i < per; ++i) {
        const std::size_t src = order[b] * per + i;
        const std::size_t dst = b * per + i;
        std::copy_n(x.values().data() + src * 16, 16, xp.data() + dst * 16);
        tid[dst] = time_id[src];
        vid[dst] = variate_id[src];
      }
    auto out = attend(ad::Tensor::constant({t, 16}, std::move(xp)), tid, vid,
                      full_mask(t), p);
    for (std::size_t b = 0; b < vars; ++b)
      for (std::size_t i = 0; i < per; ++i)
        for (std::size_t j = 0; j < 16; ++j)
          CHECK(std::fabs(out.values()[(b * per + i) * 16 + j] -
                          base.values()[(order[b] * per + i) * 16 + j]) < 1e-7);
  }

  SUBCASE("time shift invariance") {
    std::vector<long> shifted(time_id);
    for (long& v : shifted) v += 5;
    auto out = attend(x, shifted, variate_id, full_mask(t), p);
    for (std::size_t i = 0; i < out.numel(); ++i)
      CHECK(std::fabs(out.values()[i] - base.values()[i]) < 1e-7);
  }

  SUBCASE("attention gradients pass finite differences") {
    ad::Tensor probe = testsupport::rand_const(rng, {t, 16});
    auto rep = testsupport::finite_diff_check(
        {p.u_same, p.u_diff, p.q_gain, p.wo},
        [&] {
          return ad::sum(
              ad::mul(attend(x, time_id, variate_id, full_mask(t), p), probe));
        },
        1e-4, 1e-7, 1e-5, /*stride=*/13);
    CHECK(rep.ok());
  }
}
