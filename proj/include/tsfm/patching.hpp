#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsfm/timeseries.hpp"

namespace tsfm {

// Frequency -> allowed patch sizes. One shared projection per size overall;
// low frequencies get small patches, high frequencies large ones.
const std::vector<int>& admissible_patch_sizes(Frequency f);

// Every patch size any frequency may use, ascending.
const std::vector<int>& all_patch_sizes();

inline int min_patch_size(Frequency f) { return admissible_patch_sizes(f).front(); }

constexpr double kNormEps = 1e-5;

struct InstanceNorm {
  std::vector<double> normalized;  // NaNs preserved
  double loc = 0.0;
  double scale = 0.0;
};

// Standardizes one variate's window by mean/std of its observed context
// values (the first `context_len` entries). The horizon shares the context
// statistics; `variate` only labels the error message.
InstanceNorm instance_normalize(std::span<const double> window,
                                std::size_t context_len, std::size_t variate);

inline double denormalize(double x, double loc, double scale) {
  return x * (scale + kNormEps) + loc;
}

// The flattened token sequence of one (series, window, patch size) sample.
// Tokens are ordered variate-major; time_id restarts at 0 per variate.
struct FlattenedTokens {
  int patch_size = 0;
  std::size_t num_variates = 0;
  std::size_t context_len = 0;
  std::size_t horizon_len = 0;
  std::size_t patches_per_variate = 0;

  std::vector<double> patches;       // [num_tokens x patch_size], normalized, 0 if unobserved
  std::vector<long> time_id;         // per token
  std::vector<long> variate_id;      // per token
  std::vector<std::uint8_t> is_mask;  // per token: target-variate horizon patch
  std::vector<std::uint8_t> is_target;  // per token: variate role is target
  std::vector<std::uint8_t> observed;   // [num_tokens x patch_size]
  std::vector<double> norm_loc, norm_scale;  // per variate

  std::size_t window_len() const { return context_len + horizon_len; }
  std::size_t num_tokens() const { return time_id.size(); }
};

FlattenedTokens patchify_flatten(const TimeSeries& series,
                                 const TaskWindow& window, int patch_size);

// Inverse of patchify (padding dropped): normalized window values
// [num_variates x window_len].
std::vector<double> unpatchify(const FlattenedTokens& tokens);

}  // namespace tsfm
