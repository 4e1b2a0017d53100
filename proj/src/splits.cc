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

#include "brainet/splits.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brainet/error.h"
#include "brainet/random.h"

namespace brainet::splits {
namespace {

std::vector<std::vector<std::size_t>> IndicesByClass(std::span<const int> labels) {
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("invalid label");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return by_class;
}

}  // namespace

void SplitSpec::Validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (bootstrap_iterations < 1) {
    throw ConfigError("bootstrap_iterations must be at least 1");
  }
}

std::vector<std::size_t> StratifiedTestCounts(
    std::span<const std::size_t> class_sizes, double test_fraction) {
  std::size_t n = 0;
  for (const std::size_t size : class_sizes) n += size;
  const auto total = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * test_fraction + 0.5));

  std::vector<std::size_t> counts(class_sizes.size());
  std::vector<double> remainders(class_sizes.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    const double exact = static_cast<double>(class_sizes[c]) * test_fraction;
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    remainders[c] = exact - std::floor(exact);
    assigned += counts[c];
  }
  std::vector<std::size_t> order(class_sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::size_t i = 0; assigned < total && i < order.size(); ++i) {
    ++counts[order[i]];
    ++assigned;
  }
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    counts[c] = std::clamp<std::size_t>(counts[c], 1, class_sizes[c] - 1);
  }
  return counts;
}

TrainTest StratifiedSplit(std::span<const int> labels, const SplitSpec& spec,
                          int iteration) {
  spec.Validate();
  auto by_class = IndicesByClass(labels);
  const std::vector<std::size_t> sizes = {by_class[0].size(),
                                          by_class[1].size()};
  if (sizes[0] < 2 || sizes[1] < 2) {
    throw DataError("class too small to stratify: need two samples per class");
  }
  const auto counts = StratifiedTestCounts(sizes, spec.test_fraction);
  Rng rng(spec.IterationSeed(iteration));
  TrainTest split;
  for (std::size_t c = 0; c < 2; ++c) {
    rng.Shuffle(std::span<std::size_t>(by_class[c]));
    split.test.insert(split.test.end(), by_class[c].begin(),
                      by_class[c].begin() + static_cast<std::ptrdiff_t>(counts[c]));
    split.train.insert(split.train.end(),
                       by_class[c].begin() + static_cast<std::ptrdiff_t>(counts[c]),
                       by_class[c].end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<int> StratifiedKFold(std::span<const int> labels, int folds,
                                 std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  auto by_class = IndicesByClass(labels);
  for (const auto& members : by_class) {
    if (members.size() < static_cast<std::size_t>(folds)) {
      throw DataError("unstratifiable: a class has fewer samples than folds");
    }
  }
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t offset = 0;
  for (auto& members : by_class) {
    rng.Shuffle(std::span<std::size_t>(members));
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold[members[i]] = static_cast<int>((offset + i) % static_cast<std::size_t>(folds));
    }
    offset += members.size();
  }
  return fold;
}

}  // namespace brainet::splits
