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

#ifndef BRAINET_EVALUATION_H_
#define BRAINET_EVALUATION_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "brainet/attribution.h"
#include "brainet/biomarker_matrix.h"
#include "brainet/metrics.h"
#include "brainet/models.h"
#include "brainet/splits.h"
#include "json.hpp"

namespace brainet::evaluation {

struct ModelSearch {
  models::ModelKind kind = models::ModelKind::kElasticNetLogistic;
  models::HyperparameterGrid grid;
};

struct BootstrapOptions {
  // Run the grid search once, on the training split of iteration 0, and
  // reuse the chosen point in every iteration.
  bool hoist_grid_search = false;
  bool explain = true;
  std::size_t background_size = 100;
  attribution::ExplainOptions explain_options;
  int jobs = 1;
};

struct IterationRecord {
  int iteration = 0;
  models::ModelConfig chosen;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  metrics::MetricReport metrics;
};

struct BootstrapResult {
  std::vector<models::ModelKind> kinds;
  // records[m][it] and attributions[m][it] for model m and iteration it.
  std::vector<std::vector<IterationRecord>> records;
  std::vector<std::vector<attribution::AttributionMatrix>> attributions;
};

// Per iteration: stratified split, grid search on the training part, fit,
// metrics on the test part, attributions on the test part. Iteration it is
// seeded with base_seed + it, so results do not depend on `jobs`. Errors
// carry the iteration index and model kind.
BootstrapResult BootstrapRun(const BiomarkerMatrix& matrix,
                             std::span<const ModelSearch> searches,
                             const splits::SplitSpec& spec,
                             const BootstrapOptions& options);

struct Spread {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t count = 0;  // finite samples
};

// Type-7 quantiles over the finite values.
Spread Summarize(std::span<const double> values);

// One row per iteration and model.
std::string MetricsCsv(const BootstrapResult& result);
nlohmann::ordered_json SummaryJson(const BootstrapResult& result);

void WriteMetricsCsv(const BootstrapResult& result,
                     const std::filesystem::path& path);
void WriteSummaryJson(const BootstrapResult& result,
                      const std::filesystem::path& path);

}  // namespace brainet::evaluation

#endif  // BRAINET_EVALUATION_H_
