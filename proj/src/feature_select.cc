/*
 * Copyright 2026 The Brainet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "brainet/feature_select.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "brainet/error.h"

namespace brainet::feature_select {
namespace {

constexpr double kRedundancyFloor = 1e-12;

struct SetScore {
  double relevance;
  double redundancy;
  double gain;
};

// Scores S' = selected + {candidate}, summing in selection order.
SetScore ScoreCandidateSet(std::span<const std::size_t> selected,
                           std::size_t candidate,
                           std::span<const double> relevance,
                           const std::vector<std::vector<double>>& pairwise,
                           bool include_self_redundancy) {
  std::vector<std::size_t> set(selected.begin(), selected.end());
  set.push_back(candidate);
  const double size = static_cast<double>(set.size());

  double relevance_sum = 0.0;
  for (const std::size_t i : set) relevance_sum += relevance[i];

  double redundancy_sum = 0.0;
  for (const std::size_t i : set) {
    for (const std::size_t j : set) {
      if (i == j && !include_self_redundancy) continue;
      redundancy_sum += pairwise[i][j];
    }
  }
  const double pairs = include_self_redundancy ? size * size
                                               : size * (size - 1.0);
  SetScore score;
  score.relevance = relevance_sum / size;
  score.redundancy = pairs > 0.0 ? redundancy_sum / pairs : 0.0;
  score.gain = score.redundancy < kRedundancyFloor
                   ? score.relevance
                   : score.relevance / score.redundancy;
  return score;
}

}  // namespace

DiscreteSeries Discretize(std::span<const double> values, int bins) {
  if (bins < 1) throw ConfigError("bins must be positive");
  const std::size_t n = values.size();
  if (n < static_cast<std::size_t>(bins)) {
    throw DataError("cannot discretize " + std::to_string(n) +
                    " values into " + std::to_string(bins) + " bins");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  DiscreteSeries series;
  series.bins = bins;
  series.codes.resize(n);
  // A run of equal values takes the bin of its first rank.
  std::size_t run_start = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (rank > 0 && values[order[rank]] != values[order[rank - 1]]) run_start = rank;
    series.codes[order[rank]] =
        static_cast<int>(run_start * static_cast<std::size_t>(bins) / n);
  }
  return series;
}

DiscreteSeries FromLabels(std::span<const int> labels) {
  DiscreteSeries series;
  series.bins = 2;
  series.codes.assign(labels.begin(), labels.end());
  for (const int code : series.codes) {
    if (code != 0 && code != 1) throw DataError("invalid label");
  }
  return series;
}

double MutualInformation(const DiscreteSeries& x, const DiscreteSeries& y) {
  if (x.codes.size() != y.codes.size()) {
    throw DataError("mutual information needs equal-length series");
  }
  const std::size_t n = x.codes.size();
  if (n == 0) return 0.0;
  const std::size_t bx = static_cast<std::size_t>(x.bins);
  const std::size_t by = static_cast<std::size_t>(y.bins);
  std::vector<std::int64_t> joint(bx * by, 0);
  std::vector<std::int64_t> mx(bx, 0);
  std::vector<std::int64_t> my(by, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto a = static_cast<std::size_t>(x.codes[k]);
    const auto b = static_cast<std::size_t>(y.codes[k]);
    ++joint[a * by + b];
    ++mx[a];
    ++my[b];
  }
  // Terms are collected and summed in sorted order so that I(x,y) and I(y,x)
  // are bit-identical.
  const auto total = static_cast<std::int64_t>(n);
  std::vector<double> terms;
  for (std::size_t a = 0; a < bx; ++a) {
    for (std::size_t b = 0; b < by; ++b) {
      const std::int64_t count = joint[a * by + b];
      if (count == 0) continue;
      const double ratio = static_cast<double>(count * total) /
                           static_cast<double>(mx[a] * my[b]);
      terms.push_back(static_cast<double>(count) /
                      static_cast<double>(total) * std::log(ratio));
    }
  }
  std::sort(terms.begin(), terms.end());
  const double sum = std::accumulate(terms.begin(), terms.end(), 0.0);
  return std::max(0.0, sum);
}

double Entropy(const DiscreteSeries& x) {
  const std::size_t n = x.codes.size();
  if (n == 0) return 0.0;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(x.bins), 0);
  for (const int code : x.codes) ++counts[static_cast<std::size_t>(code)];
  double entropy = 0.0;
  for (const std::int64_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(n);
    entropy -= p * std::log(p);
  }
  return entropy;
}

MrmrResult MrmrSelect(const BiomarkerMatrix& matrix, std::size_t m,
                      const MrmrOptions& options) {
  const std::size_t p = matrix.cols();
  if (m < 1) throw ConfigError("mrmr needs m >= 1");
  if (m > p) {
    throw ConfigError("mrmr m=" + std::to_string(m) + " exceeds " +
                      std::to_string(p) + " features");
  }
  const DiscreteSeries response = FromLabels(matrix.labels);
  std::vector<DiscreteSeries> series;
  series.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    const Eigen::VectorXd column = matrix.values.col(static_cast<Eigen::Index>(j));
    series.push_back(Discretize(
        std::span<const double>(column.data(), static_cast<std::size_t>(column.size())),
        options.bins));
  }

  MrmrResult result;
  result.relevance.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    result.relevance[j] = MutualInformation(response, series[j]);
  }

  // Pairwise MI cache, filled lazily; NaN marks "not computed".
  const double unset = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> pairwise(p, std::vector<double>(p, unset));
  auto ensure = [&](std::size_t i, std::size_t j) {
    if (std::isnan(pairwise[i][j])) {
      const double value = MutualInformation(series[i], series[j]);
      pairwise[i][j] = value;
      pairwise[j][i] = value;
    }
  };

  std::vector<bool> chosen(p, false);
  while (result.order.size() < m) {
    std::size_t best = p;
    SetScore best_score{0.0, 0.0, -std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < p; ++j) {
      if (chosen[j]) continue;
      SetScore score;
      if (result.order.empty()) {
        ensure(j, j);
        score = ScoreCandidateSet({}, j, result.relevance, pairwise,
                                  options.include_self_redundancy);
        score.gain = score.relevance;  // pure relevance on the first pick
      } else {
        for (const std::size_t i : result.order) ensure(i, j);
        ensure(j, j);
        score = ScoreCandidateSet(result.order, j, result.relevance, pairwise,
                                  options.include_self_redundancy);
      }
      if (score.gain > best_score.gain) {
        best = j;
        best_score = score;
      }
    }
    chosen[best] = true;
    result.order.push_back(best);
    result.gains.push_back(best_score.gain);
    result.redundancy_trace.push_back(best_score.redundancy);
  }
  return result;
}

}  // namespace brainet::feature_select
