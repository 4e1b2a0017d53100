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

#ifndef BRAINET_ATTRIBUTION_H_
#define BRAINET_ATTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainet/models.h"

namespace brainet::attribution {

// Maps a batch of rows to one model output per row.
using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// P(case) of a trained model as a predictor.
BatchPredictor PredictorFor(const models::TrainedModel& model);

struct ShapleyValues {
  Eigen::VectorXd phi;
  double base = 0.0;        // v(empty set): mean output over the background
  double prediction = 0.0;  // f(x)
};

inline constexpr std::size_t kMaxExactFeatures = 20;

// Interventional Shapley values by full coalition enumeration. v(S) is the
// mean output over background rows with the features in S taken from x.
ShapleyValues ExactShapley(const BatchPredictor& predictor,
                           const Eigen::VectorXd& x,
                           const Eigen::MatrixXd& background);

// Kernel-weighted least squares over coalitions with the efficiency
// constraint sum(phi) = f(x) - base eliminated exactly. When the budget
// covers all 2^p - 2 proper nonempty coalitions they are enumerated and the
// result equals the exact values; otherwise coalitions are drawn in
// complementary pairs from the Shapley kernel with the given seed.
ShapleyValues SampledShapley(const BatchPredictor& predictor,
                             const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& background,
                             std::size_t n_coalitions, std::uint64_t seed);

enum class Estimator { kExact, kSampled };

struct ExplainOptions {
  Estimator estimator = Estimator::kSampled;
  std::size_t n_coalitions = 256;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Per-sample, per-feature attributions of one model on one test split.
struct AttributionMatrix {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;  // rows x features
  double base_value = 0.0;
  Eigen::VectorXd predictions;
  models::ModelKind model_kind = models::ModelKind::kElasticNetLogistic;
  int bootstrap_index = 0;
};

// Explains every row of `rows`. Sampled estimation uses seed + row index
// per row, so the output does not depend on `jobs`.
AttributionMatrix Explain(const models::TrainedModel& model,
                          const Eigen::MatrixXd& rows,
                          const Eigen::MatrixXd& background,
                          const ExplainOptions& options, int bootstrap_index);

// `size` distinct rows drawn with the seed (all rows when size >= n), kept in
// ascending row order.
Eigen::MatrixXd SampleBackground(const Eigen::MatrixXd& train,
                                 std::size_t size, std::uint64_t seed);

struct ImportanceAggregate {
  std::vector<std::string> feature_names;
  std::vector<double> scores;  // mean |phi| per feature
  std::size_t total_rows = 0;  // T summed over runs
  std::size_t bootstraps = 0;  // distinct bootstrap indices (B)
  std::size_t models = 0;      // distinct model kinds (K)
};

// Mean absolute attribution over every (sample, bootstrap, model) triple.
// Runs are reduced in a canonical order, so the result does not depend on
// the order of `runs`.
ImportanceAggregate AggregateImportance(std::span<const AttributionMatrix> runs);

struct SelectionConfig {
  std::size_t top_n = 30;
  // ECMAScript patterns searched anywhere in a feature name; a plain
  // substring such as "APOE" works as-is.
  std::vector<std::string> exclusion_patterns;
};

struct PoolSelection {
  std::vector<std::string> pool;         // by max cross-model score, descending
  std::vector<double> pool_scores;       // aligned with pool
  std::vector<std::vector<std::string>> per_model_top;
  std::vector<std::string> excluded;
};

// Union of each model's top_n features (ties to the lower index; top_n is
// capped at the feature count) minus names matching an exclusion pattern.
// Throws DataError("empty pool") when nothing survives.
PoolSelection SelectPool(std::span<const ImportanceAggregate> per_model,
                         const SelectionConfig& config);

}  // namespace brainet::attribution

#endif  // BRAINET_ATTRIBUTION_H_
