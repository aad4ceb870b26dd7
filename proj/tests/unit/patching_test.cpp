#include "tsfm/patching.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "tsfm/errors.hpp"

using namespace tsfm;

namespace {

TimeSeries make_series(std::size_t variates, std::size_t steps, Frequency f,
                       unsigned seed = 1) {
  TimeSeries s;
  s.id = "test";
  s.frequency = f;
  s.num_variates = variates;
  s.num_steps = steps;
  s.values.resize(variates * steps);
  s.roles.assign(variates, Role::target);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : s.values) v = n(rng) + 3.0;
  for (std::size_t v = 0; v < variates; ++v)
    s.variate_names.push_back("v" + std::to_string(v));
  return s;
}

}  // namespace

TEST_CASE("admissible patch sizes follow the frequency table") {
  CHECK(admissible_patch_sizes(Frequency::yearly) == std::vector<int>{8});
  CHECK(admissible_patch_sizes(Frequency::quarterly) == std::vector<int>{8});
  CHECK(admissible_patch_sizes(Frequency::monthly) ==
        std::vector<int>{8, 16, 32});
  CHECK(admissible_patch_sizes(Frequency::weekly) == std::vector<int>{16, 32});
  CHECK(admissible_patch_sizes(Frequency::daily) == std::vector<int>{16, 32});
  CHECK(admissible_patch_sizes(Frequency::hourly) == std::vector<int>{32, 64});
  CHECK(admissible_patch_sizes(Frequency::minute) ==
        std::vector<int>{32, 64, 128});
  CHECK(admissible_patch_sizes(Frequency::second) == std::vector<int>{64, 128});
  CHECK_THROWS_AS(parse_frequency("fortnightly"), ConfigError);
}

TEST_CASE("instance normalization") {
  SUBCASE("constant context collapses to zero with eps guard") {
    std::vector<double> w{5, 5, 5, 5};
    auto n = instance_normalize(w, 4, 0);
    CHECK(n.loc == 5.0);
    CHECK(n.scale == 0.0);
    for (double v : n.normalized) CHECK(std::fabs(v) < 1e-12);
  }
  SUBCASE("two point context") {
    std::vector<double> w{0, 2};
    auto n = instance_normalize(w, 2, 0);
    CHECK(n.loc == doctest::Approx(1.0));
    CHECK(n.scale == doctest::Approx(1.0));
    CHECK(n.normalized[0] == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(n.normalized[1] == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("horizon uses context statistics only") {
    std::vector<double> w{1, 3, 1, 3, 100, -100};
    auto n = instance_normalize(w, 4, 0);
    CHECK(n.loc == doctest::Approx(2.0));
    CHECK(n.scale == doctest::Approx(1.0));
  }
  SUBCASE("round trip") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d(2.0, 7.0);
    std::vector<double> w(40);
    for (double& v : w) v = d(rng);
    auto n = instance_normalize(w, 30, 0);
    for (std::size_t i = 0; i < w.size(); ++i)
      CHECK(std::fabs(denormalize(n.normalized[i], n.loc, n.scale) - w[i]) <
            1e-9);
  }
  SUBCASE("all-missing context is a data error") {
    std::vector<double> w{std::nan(""), std::nan(""), 1.0};
    CHECK_THROWS_WITH_AS(instance_normalize(w, 2, 3),
                         doctest::Contains("variate 3"), DataError);
  }
}

TEST_CASE("patchify token layout") {
  SUBCASE("3 variates, 192 steps, patch 64 -> 9 tokens") {
    TimeSeries s = make_series(3, 400, Frequency::hourly);
    TaskWindow w{.start = 300, .context_length = 128, .horizon = 64};
    auto t = patchify_flatten(s, w, 64);
    CHECK(t.num_tokens() == 9);
    for (std::size_t v = 0; v < 3; ++v)
      for (long pi = 0; pi < 3; ++pi) {
        CHECK(t.time_id[v * 3 + pi] == pi);
        CHECK(t.variate_id[v * 3 + pi] == static_cast<long>(v));
      }
  }
  SUBCASE("partial final patch is padded and unobserved") {
    TimeSeries s = make_series(1, 64, Frequency::monthly);
    TaskWindow w{.start = 30, .context_length = 6, .horizon = 4};
    auto t = patchify_flatten(s, w, 8);
    CHECK(t.num_tokens() == 2);
    for (std::size_t e = 0; e < 8; ++e)
      CHECK(t.observed[8 + e] == (e < 2 ? 1 : 0));
    for (std::size_t e = 2; e < 8; ++e) CHECK(t.patches[8 + e] == 0.0);
  }
  SUBCASE("mask covers horizon-overlapping target patches") {
    TimeSeries s = make_series(1, 128, Frequency::monthly);
    TaskWindow w{.start = 100, .context_length = 40, .horizon = 24};
    auto t = patchify_flatten(s, w, 8);
    CHECK(t.num_tokens() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(t.is_mask[i] == (i >= 5));
  }
  SUBCASE("known covariates are never masked") {
    TimeSeries s = make_series(2, 128, Frequency::monthly);
    s.roles[1] = Role::known_covariate;
    TaskWindow w{.start = 100, .context_length = 40, .horizon = 24};
    auto t = patchify_flatten(s, w, 8);
    for (std::size_t i = 0; i < t.num_tokens(); ++i) {
      if (t.variate_id[i] == 1) CHECK(t.is_mask[i] == 0);
    }
  }
  SUBCASE("window outside bounds is a contract error") {
    TimeSeries s = make_series(1, 64, Frequency::monthly);
    CHECK_THROWS_AS(
        patchify_flatten(s, TaskWindow{.start = 60, .context_length = 10, .horizon = 8}, 8),
        ContractError);
    CHECK_THROWS_AS(
        patchify_flatten(s, TaskWindow{.start = 5, .context_length = 10, .horizon = 8}, 8),
        ContractError);
  }
  SUBCASE("inadmissible patch size lists the allowed set") {
    TimeSeries s = make_series(1, 256, Frequency::hourly);
    TaskWindow w{.start = 128, .context_length = 64, .horizon = 32};
    CHECK_THROWS_WITH_AS(patchify_flatten(s, w, 8),
                         doctest::Contains("32 64"), ConfigError);
  }
}

TEST_CASE("patchify invariants") {
  std::mt19937_64 rng(17);
  TimeSeries s = make_series(3, 300, Frequency::hourly, 3);
  TaskWindow w{.start = 250, .context_length = 150, .horizon = 40};
  auto t = patchify_flatten(s, w, 32);

  SUBCASE("reconstruction reproduces the window") {
    auto flat = unpatchify(t);
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t i = 0; i < w.window_len(); ++i) {
        const double orig = s.at(v, w.begin() + i);
        const double rec =
            denormalize(flat[v * w.window_len() + i], t.norm_loc[v],
                        t.norm_scale[v]);
        CHECK(std::fabs(rec - orig) < 1e-9);
      }
  }
  SUBCASE("mask union covers exactly the horizon steps") {
    const std::size_t p = 32;
    for (std::size_t tok = 0; tok < t.num_tokens(); ++tok) {
      const std::size_t lo = static_cast<std::size_t>(t.time_id[tok]) * p;
      const std::size_t hi = lo + p;
      const bool overlaps = hi > t.context_len && lo < t.window_len();
      CHECK(static_cast<bool>(t.is_mask[tok]) == overlaps);
    }
    // last masked token ends beyond the horizon only via padding
    std::size_t masked_lo = t.window_len(), masked_hi = 0;
    for (std::size_t tok = 0; tok < t.num_tokens(); ++tok) {
      if (!t.is_mask[tok]) continue;
      masked_lo = std::min(masked_lo, static_cast<std::size_t>(t.time_id[tok]) * p);
      masked_hi = std::max(masked_hi, std::min(t.window_len(),
                                               (static_cast<std::size_t>(t.time_id[tok]) + 1) * p));
    }
    CHECK(masked_lo <= t.context_len);
    CHECK(masked_hi == t.window_len());
  }
  SUBCASE("variate permutation permutes token blocks") {
    TimeSeries perm = s;
    const std::size_t order[3] = {2, 0, 1};
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t i = 0; i < s.num_steps; ++i)
        perm.at(v, i) = s.at(order[v], i);
    auto tp = patchify_flatten(perm, w, 32);
    const std::size_t per = t.patches_per_variate;
    const std::size_t pw = 32;
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t pi = 0; pi < per; ++pi)
        for (std::size_t e = 0; e < pw; ++e)
          CHECK(tp.patches[(v * per + pi) * pw + e] ==
                t.patches[(order[v] * per + pi) * pw + e]);
  }
  SUBCASE("missing values are zero filled and unobserved") {
    TimeSeries sm = s;
    sm.at(1, 120) = std::nan("");
    auto tm = patchify_flatten(sm, w, 32);
    const std::size_t rel = 120 - w.begin();
    const std::size_t tok = 1 * tm.patches_per_variate + rel / 32;
    const std::size_t e = rel % 32;
    CHECK(tm.observed[tok * 32 + e] == 0);
    CHECK(tm.patches[tok * 32 + e] == 0.0);
  }
}
