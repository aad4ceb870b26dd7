#include "tsfm/patching.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tsfm {

Frequency parse_frequency(const std::string& s) {
  if (s == "yearly") return Frequency::yearly;
  if (s == "quarterly") return Frequency::quarterly;
  if (s == "monthly") return Frequency::monthly;
  if (s == "weekly") return Frequency::weekly;
  if (s == "daily") return Frequency::daily;
  if (s == "hourly") return Frequency::hourly;
  if (s == "minute") return Frequency::minute;
  if (s == "second") return Frequency::second;
  throw ConfigError("unknown frequency '" + s + "'");
}

std::string frequency_name(Frequency f) {
  switch (f) {
    case Frequency::yearly: return "yearly";
    case Frequency::quarterly: return "quarterly";
    case Frequency::monthly: return "monthly";
    case Frequency::weekly: return "weekly";
    case Frequency::daily: return "daily";
    case Frequency::hourly: return "hourly";
    case Frequency::minute: return "minute";
    case Frequency::second: return "second";
  }
  throw ConfigError("invalid frequency value");
}

Role parse_role(const std::string& s) {
  if (s == "target") return Role::target;
  if (s == "past_covariate") return Role::past_covariate;
  if (s == "known_covariate") return Role::known_covariate;
  throw ConfigError("unknown role '" + s + "'");
}

std::string role_name(Role r) {
  switch (r) {
    case Role::target: return "target";
    case Role::past_covariate: return "past_covariate";
    case Role::known_covariate: return "known_covariate";
  }
  throw ConfigError("invalid role value");
}

const std::vector<int>& admissible_patch_sizes(Frequency f) {
  static const std::vector<int> small{8};
  static const std::vector<int> monthly{8, 16, 32};
  static const std::vector<int> mid{16, 32};
  static const std::vector<int> hourly{32, 64};
  static const std::vector<int> minute{32, 64, 128};
  static const std::vector<int> second{64, 128};
  switch (f) {
    case Frequency::yearly:
    case Frequency::quarterly: return small;
    case Frequency::monthly: return monthly;
    case Frequency::weekly:
    case Frequency::daily: return mid;
    case Frequency::hourly: return hourly;
    case Frequency::minute: return minute;
    case Frequency::second: return second;
  }
  throw ConfigError("invalid frequency value");
}

const std::vector<int>& all_patch_sizes() {
  static const std::vector<int> sizes{8, 16, 32, 64, 128};
  return sizes;
}

InstanceNorm instance_normalize(std::span<const double> window,
                                std::size_t context_len, std::size_t variate) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < context_len; ++t) {
    if (std::isnan(window[t])) continue;
    sum += window[t];
    ++n;
  }
  if (n == 0)
    throw DataError("variate " + std::to_string(variate) +
                    ": context has no observed values");
  const double loc = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t t = 0; t < context_len; ++t) {
    if (std::isnan(window[t])) continue;
    const double d = window[t] - loc;
    ss += d * d;
  }
  const double scale = std::sqrt(ss / static_cast<double>(n));

  InstanceNorm out;
  out.loc = loc;
  out.scale = scale;
  out.normalized.resize(window.size());
  for (std::size_t t = 0; t < window.size(); ++t)
    out.normalized[t] = (window[t] - loc) / (scale + kNormEps);
  return out;
}

FlattenedTokens patchify_flatten(const TimeSeries& series,
                                 const TaskWindow& window, int patch_size) {
  const auto& allowed = admissible_patch_sizes(series.frequency);
  if (std::find(allowed.begin(), allowed.end(), patch_size) == allowed.end()) {
    std::ostringstream os;
    os << "patch size " << patch_size << " not admissible for "
       << frequency_name(series.frequency) << " data; allowed:";
    for (int p : allowed) os << " " << p;
    throw ConfigError(os.str());
  }
  window.validate(series.num_steps);

  const std::size_t v_count = series.num_variates;
  const std::size_t len = window.window_len();
  const std::size_t p = static_cast<std::size_t>(patch_size);
  const std::size_t per_var = (len + p - 1) / p;
  const std::size_t tokens = v_count * per_var;

  FlattenedTokens out;
  out.patch_size = patch_size;
  out.num_variates = v_count;
  out.context_len = window.context_length;
  out.horizon_len = window.horizon;
  out.patches_per_variate = per_var;
  out.patches.assign(tokens * p, 0.0);
  out.observed.assign(tokens * p, 0);
  out.time_id.resize(tokens);
  out.variate_id.resize(tokens);
  out.is_mask.assign(tokens, 0);
  out.is_target.assign(tokens, 0);
  out.norm_loc.resize(v_count);
  out.norm_scale.resize(v_count);

  // first patch index whose step range [pi*p, pi*p+p) reaches the horizon
  const std::size_t first_masked_patch = window.context_length / p;

  for (std::size_t v = 0; v < v_count; ++v) {
    std::span<const double> win(series.values.data() + v * series.num_steps +
                                    window.begin(),
                                len);
    InstanceNorm norm = instance_normalize(win, window.context_length, v);
    out.norm_loc[v] = norm.loc;
    out.norm_scale[v] = norm.scale;

    const bool target = series.roles[v] == Role::target;
    for (std::size_t pi = 0; pi < per_var; ++pi) {
      const std::size_t tok = v * per_var + pi;
      out.time_id[tok] = static_cast<long>(pi);
      out.variate_id[tok] = static_cast<long>(v);
      out.is_target[tok] = target;
      out.is_mask[tok] = target && pi >= first_masked_patch;
      for (std::size_t e = 0; e < p; ++e) {
        const std::size_t step = pi * p + e;
        if (step >= len) break;  // right padding stays 0 / unobserved
        const double val = norm.normalized[step];
        if (std::isnan(val)) continue;  // missing: zero fill, unobserved
        out.patches[tok * p + e] = val;
        out.observed[tok * p + e] = 1;
      }
    }
  }
  return out;
}

std::vector<double> unpatchify(const FlattenedTokens& tokens) {
  const std::size_t p = static_cast<std::size_t>(tokens.patch_size);
  const std::size_t len = tokens.window_len();
  std::vector<double> out(tokens.num_variates * len, 0.0);
  for (std::size_t tok = 0; tok < tokens.num_tokens(); ++tok) {
    const std::size_t v = static_cast<std::size_t>(tokens.variate_id[tok]);
    const std::size_t base = static_cast<std::size_t>(tokens.time_id[tok]) * p;
    for (std::size_t e = 0; e < p && base + e < len; ++e)
      out[v * len + base + e] = tokens.patches[tok * p + e];
  }
  return out;
}

}  // namespace tsfm
