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

#include "brainet/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brainet/error.h"

namespace brainet::metrics {
namespace {

double SafeRatio(std::size_t numerator, std::size_t denominator) {
  return denominator == 0 ? 0.0
                          : static_cast<double>(numerator) /
                                static_cast<double>(denominator);
}

}  // namespace

MetricReport ComputeMetrics(std::span<const int> y_true,
                            std::span<const double> y_prob, double threshold) {
  if (y_true.size() != y_prob.size()) {
    throw DataError("metrics need equal-length inputs");
  }
  if (y_true.empty()) throw DataError("metrics need at least one sample");
  MetricReport report;
  Confusion& cm = report.confusion;
  bool has_positive = false;
  bool has_negative = false;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (!(y_prob[i] >= 0.0 && y_prob[i] <= 1.0)) {
      throw DataError("probabilities must lie in [0, 1]");
    }
    const bool predicted = y_prob[i] >= threshold;
    if (y_true[i] == 1) {
      has_positive = true;
      predicted ? ++cm.true_positive : ++cm.false_negative;
    } else if (y_true[i] == 0) {
      has_negative = true;
      predicted ? ++cm.false_positive : ++cm.true_negative;
    } else {
      throw DataError("invalid label");
    }
  }
  report.accuracy = SafeRatio(cm.true_positive + cm.true_negative, cm.total());
  report.precision =
      SafeRatio(cm.true_positive, cm.true_positive + cm.false_positive);
  report.recall =
      SafeRatio(cm.true_positive, cm.true_positive + cm.false_negative);
  report.sensitivity = report.recall;
  report.specificity =
      SafeRatio(cm.true_negative, cm.true_negative + cm.false_positive);
  report.micro_f1 = report.accuracy;
  report.auc = has_positive && has_negative
                   ? RocAuc(y_true, y_prob).auc
                   : std::numeric_limits<double>::quiet_NaN();
  return report;
}

RocResult RocAuc(std::span<const int> y_true, std::span<const double> y_score) {
  if (y_true.size() != y_score.size()) {
    throw DataError("roc needs equal-length inputs");
  }
  const std::size_t n = y_true.size();
  std::size_t positives = 0;
  for (const int y : y_true) {
    if (y != 0 && y != 1) throw DataError("invalid label");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("roc needs both classes");
  }

  // Descending score order; equal scores form one group.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return y_score[a] > y_score[b];
  });

  RocResult result;
  result.curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  // Mann-Whitney via groups: each positive beats every negative in later
  // groups and ties with negatives in its own group.
  double wins = 0.0;  // counted in half units to stay exact
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    std::size_t group_pos = 0;
    std::size_t group_neg = 0;
    while (end < n && y_score[order[end]] == y_score[order[start]]) {
      (y_true[order[end]] == 1 ? group_pos : group_neg) += 1;
      ++end;
    }
    // Positives in this group beat the negatives not yet seen (below) and
    // tie with this group's negatives.
    const std::size_t negatives_below = negatives - fp - group_neg;
    wins += 2.0 * static_cast<double>(group_pos) *
                static_cast<double>(negatives_below) +
            static_cast<double>(group_pos) * static_cast<double>(group_neg);
    tp += group_pos;
    fp += group_neg;
    result.curve.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives),
                            y_score[order[start]]});
    start = end;
  }
  result.auc = wins / (2.0 * static_cast<double>(positives) *
                       static_cast<double>(negatives));
  return result;
}

}  // namespace brainet::metrics
