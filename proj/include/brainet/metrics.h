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

#ifndef BRAINET_METRICS_H_
#define BRAINET_METRICS_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace brainet::metrics {

struct Confusion {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;

  std::size_t total() const {
    return true_positive + false_positive + true_negative + false_negative;
  }
};

// Binary classification summary. For single-label binary data micro-F1
// equals accuracy; both are reported. Zero-denominator precision, recall and
// specificity are 0. auc is NaN when the true labels hold a single class.
struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double micro_f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double auc = 0.0;
  Confusion confusion;
};

// Predicts the positive class when y_prob >= threshold.
MetricReport ComputeMetrics(std::span<const int> y_true,
                            std::span<const double> y_prob,
                            double threshold = 0.5);

struct RocPoint {
  double false_positive_rate;
  double true_positive_rate;
  double threshold;
};

struct RocResult {
  std::vector<RocPoint> curve;  // from (0,0) to (1,1)
  double auc;
};

// AUC as the probability that a random positive outranks a random negative
// (ties count one half), counted exactly over groups of equal scores. The
// curve sweeps every distinct score from high to low.
RocResult RocAuc(std::span<const int> y_true, std::span<const double> y_score);

}  // namespace brainet::metrics

#endif  // BRAINET_METRICS_H_
