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

#ifndef BRAINET_FEATURE_SELECT_H_
#define BRAINET_FEATURE_SELECT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "brainet/biomarker_matrix.h"

namespace brainet::feature_select {

struct DiscreteSeries {
  std::vector<int> codes;  // each in [0, bins)
  int bins = 1;
};

// Equal-frequency binning by rank: code = floor(rank * bins / n). Equal
// values share the bin of their lowest rank, so bins are only equal in size
// (within one) when the values are distinct.
DiscreteSeries Discretize(std::span<const double> values, int bins);

// Wraps 0/1 labels as a two-bin series.
DiscreteSeries FromLabels(std::span<const int> labels);

// Plug-in mutual information in nats.
double MutualInformation(const DiscreteSeries& x, const DiscreteSeries& y);

// Plug-in Shannon entropy in nats.
double Entropy(const DiscreteSeries& x);

struct MrmrOptions {
  int bins = 10;
  // Average redundancy over the full |S|^2 grid including I(i,i) terms.
  // When false, only distinct pairs are averaged.
  bool include_self_redundancy = true;
};

struct MrmrResult {
  std::vector<std::size_t> order;
  std::vector<double> gains;            // aligned with order
  std::vector<double> relevance;        // I(label, i) for every feature
  std::vector<double> redundancy_trace; // redundancy of the selected set after each pick
};

// Greedy max-relevance/min-redundancy ranking with the quotient gain
// relevance/redundancy, evaluated on the candidate set S + {j}. The first
// pick maximizes relevance; ties go to the lowest feature index. Redundancy
// below 1e-12 makes the gain fall back to relevance.
MrmrResult MrmrSelect(const BiomarkerMatrix& matrix, std::size_t m,
                      const MrmrOptions& options = {});

}  // namespace brainet::feature_select

#endif  // BRAINET_FEATURE_SELECT_H_
