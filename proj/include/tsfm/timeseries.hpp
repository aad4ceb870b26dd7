#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tsfm/errors.hpp"

namespace tsfm {

enum class Frequency {
  yearly,
  quarterly,
  monthly,
  weekly,
  daily,
  hourly,
  minute,
  second,
};

Frequency parse_frequency(const std::string& s);
std::string frequency_name(Frequency f);

enum class Role { target, past_covariate, known_covariate };

Role parse_role(const std::string& s);
std::string role_name(Role r);

struct Timestamp {
  int year = 1970, month = 1, day = 1;
  int hour = 0, minute = 0, second = 0;

  bool operator==(const Timestamp&) const = default;
};

// Raw multivariate series; values are [num_variates x num_steps] row-major
// with NaN marking missing observations.
struct TimeSeries {
  std::string id;
  Frequency frequency = Frequency::hourly;
  int multiplier = 1;
  std::size_t num_variates = 0;
  std::size_t num_steps = 0;
  std::vector<double> values;
  std::vector<Role> roles;
  std::vector<std::string> variate_names;
  Timestamp start;

  double at(std::size_t v, std::size_t t) const {
    return values[v * num_steps + t];
  }
  double& at(std::size_t v, std::size_t t) { return values[v * num_steps + t]; }

  bool has_target() const {
    for (Role r : roles)
      if (r == Role::target) return true;
    return false;
  }
};

// A sampled crop: forecast origin `start`, context of `context_length` steps
// ending at start, horizon of `horizon` steps from start.
struct TaskWindow {
  std::size_t start = 0;
  std::size_t context_length = 0;
  std::size_t horizon = 0;

  std::size_t window_len() const { return context_length + horizon; }
  std::size_t begin() const { return start - context_length; }
  std::size_t end() const { return start + horizon; }

  void validate(std::size_t num_steps) const {
    if (context_length < 1 || horizon < 1 || start < context_length ||
        start + horizon > num_steps)
      throw ContractError(
          "task window out of range: start=" + std::to_string(start) +
          " l=" + std::to_string(context_length) +
          " h=" + std::to_string(horizon) +
          " num_steps=" + std::to_string(num_steps));
  }
};

}  // namespace tsfm
