#pragma once

#include <cmath>
#include <vector>

#include "gpso/error.hpp"

namespace gpso {

struct AdvantageSet {
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;  // population (1/G) standard deviation
  bool zero_variance = false;
};

// Group-normalized advantages: A_i = (r_i - mean) / (stddev + eps_norm) with
// the population standard deviation. A zero-variance group yields exactly
// zero advantages for any eps_norm, including 0 (never NaN).
inline AdvantageSet advantages(const std::vector<double>& rewards, double eps_norm) {
  if (rewards.empty()) throw InputError("advantages: empty reward vector");
  if (eps_norm < 0.0) throw ConfigError("advantages: eps_norm must be >= 0");
  AdvantageSet out;
  const std::size_t n = rewards.size();
  double sum = 0.0;
  for (double r : rewards) sum += r;
  out.mean = sum / static_cast<double>(n);

  bool all_equal = true;
  for (double r : rewards) {
    if (r != rewards.front()) { all_equal = false; break; }
  }
  if (all_equal) {
    out.zero_variance = true;
    out.stddev = 0.0;
    out.values.assign(n, 0.0);
    return out;
  }

  double ss = 0.0;
  for (double r : rewards) {
    const double d = r - out.mean;
    ss += d * d;
  }
  out.stddev = std::sqrt(ss / static_cast<double>(n));
  out.values.reserve(n);
  for (double r : rewards) out.values.push_back((r - out.mean) / (out.stddev + eps_norm));
  return out;
}

}  // namespace gpso
