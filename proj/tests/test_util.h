// Copyright 2026 The evonas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVONAS_TESTS_TEST_UTIL_H_
#define EVONAS_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "evonas/policy_net.h"
#include "evonas/search_space.h"

namespace evonas::testing {

// Pearson goodness-of-fit p-value of observed counts against expected
// probabilities (categories with zero expectation must have zero counts).
inline double ChiSquareGoodnessOfFit(const std::vector<std::uint64_t>& counts,
                                     const std::vector<double>& probabilities) {
  double total = 0.0;
  for (std::uint64_t c : counts) total += static_cast<double>(c);
  double statistic = 0.0;
  int categories = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = total * probabilities[i];
    if (expected <= 0.0) continue;
    const double d = static_cast<double>(counts[i]) - expected;
    statistic += d * d / expected;
    ++categories;
  }
  if (categories < 2) return 1.0;
  const boost::math::chi_squared dist(categories - 1);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Two-sample chi-square homogeneity test on a 2 x K contingency table.
// Returns the p-value; categories empty in both samples are dropped.
template <typename Key>
double ChiSquareTwoSample(const std::map<Key, std::uint64_t>& a,
                          const std::map<Key, std::uint64_t>& b) {
  std::map<Key, std::pair<double, double>> table;
  double total_a = 0.0;
  double total_b = 0.0;
  for (const auto& [k, c] : a) {
    table[k].first += static_cast<double>(c);
    total_a += static_cast<double>(c);
  }
  for (const auto& [k, c] : b) {
    table[k].second += static_cast<double>(c);
    total_b += static_cast<double>(c);
  }
  const double total = total_a + total_b;
  double statistic = 0.0;
  for (const auto& [k, cell] : table) {
    const double column = cell.first + cell.second;
    const double expected_a = total_a * column / total;
    const double expected_b = total_b * column / total;
    statistic += (cell.first - expected_a) * (cell.first - expected_a) / expected_a;
    statistic += (cell.second - expected_b) * (cell.second - expected_b) / expected_b;
  }
  if (table.size() < 2) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(table.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t parameters = 0;
  bool passed = false;
};

// Compares an analytic gradient against central differences of `objective`
// with step h. An entry passes when
//   |analytic - numeric| <= tolerance * max(|analytic|, |numeric|) + floor;
// the small absolute floor covers entries whose true gradient is zero.
inline GradientCheck CheckGradient(
    const PolicyParams& params, const PolicyParams& analytic,
    const std::function<double(const PolicyParams&)>& objective,
    double step = 1e-5, double tolerance = 1e-4, double floor = 1e-8) {
  GradientCheck check;
  const Eigen::VectorXd theta = params.Flatten();
  const Eigen::VectorXd grad = analytic.Flatten();
  check.parameters = static_cast<std::size_t>(theta.size());
  check.passed = true;
  PolicyParams probe = params;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd shifted = theta;
    shifted[i] = theta[i] + step;
    probe.Unflatten(shifted);
    const double plus = objective(probe);
    shifted[i] = theta[i] - step;
    probe.Unflatten(shifted);
    const double minus = objective(probe);
    const double numeric = (plus - minus) / (2.0 * step);
    const double scale = std::max(std::abs(numeric), std::abs(grad[i]));
    const double error = std::abs(numeric - grad[i]);
    const double relative = scale > 0.0 ? error / scale : 0.0;
    check.max_absolute_error = std::max(check.max_absolute_error, error);
    if (error > tolerance * scale + floor) {
      check.passed = false;
    }
    // Relative error is only reported where the gradient is not tiny.
    if (scale > 1e-6 && relative > check.max_relative_error) {
      check.max_relative_error = relative;
      check.worst_index = static_cast<std::size_t>(i);
    }
  }
  return check;
}

}  // namespace evonas::testing

#endif  // EVONAS_TESTS_TEST_UTIL_H_
