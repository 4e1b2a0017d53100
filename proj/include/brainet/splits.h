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

#ifndef BRAINET_SPLITS_H_
#define BRAINET_SPLITS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace brainet::splits {

struct SplitSpec {
  double test_fraction = 0.2;
  int folds = 5;
  int bootstrap_iterations = 20;
  std::uint64_t base_seed = 0;

  std::uint64_t IterationSeed(int iteration) const {
    return base_seed + static_cast<std::uint64_t>(iteration);
  }
  void Validate() const;
};

struct TrainTest {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Per-class test counts: the total is round(n * fraction), distributed by
// largest remainder (ties to the lower class label) and clamped so every
// class keeps at least one sample on each side.
std::vector<std::size_t> StratifiedTestCounts(std::span<const std::size_t> class_sizes,
                                              double test_fraction);

// Seeded, class-proportional train/test split for bootstrap iteration
// `iteration` (seed = base_seed + iteration). Requires at least two samples
// per class.
TrainTest StratifiedSplit(std::span<const int> labels, const SplitSpec& spec,
                          int iteration);

// Stratified k-fold assignment: fold index per sample. Every fold receives
// both classes or DataError("unstratifiable") is thrown.
std::vector<int> StratifiedKFold(std::span<const int> labels, int folds,
                                 std::uint64_t seed);

}  // namespace brainet::splits

#endif  // BRAINET_SPLITS_H_
