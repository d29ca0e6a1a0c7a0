// SPDX-License-Identifier: Apache-2.0
//
// Measures of the pre-blockage power signature, shared by the simulator
// tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace mmblock::testing {

inline constexpr int kVarianceWindow = 10;
inline constexpr int kSignatureSpan = 20;

/// Mean of the population variances of every 10-sample window lying in
/// p[start, start + count).
inline double windowed_variance(const std::vector<double>& p, int start, int count) {
  double acc = 0.0;
  int windows = 0;
  for (int s = start; s + kVarianceWindow <= start + count; ++s) {
    double mean = 0.0;
    for (int i = s; i < s + kVarianceWindow; ++i) mean += p[i];
    mean /= kVarianceWindow;
    double v = 0.0;
    for (int i = s; i < s + kVarianceWindow; ++i) v += (p[i] - mean) * (p[i] - mean);
    acc += v / kVarianceWindow;
    ++windows;
  }
  return acc / windows;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median unblocked power minus median blocked power, in dB.
inline double blocked_drop_db(const std::vector<double>& power, const std::vector<std::uint8_t>& status) {
  std::vector<double> blocked, clear;
  for (std::size_t i = 0; i < power.size(); ++i) (status[i] ? blocked : clear).push_back(power[i]);
  return median(clear) - median(blocked);
}

}  // namespace mmblock::testing
