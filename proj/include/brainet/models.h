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

#ifndef BRAINET_MODELS_H_
#define BRAINET_MODELS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "brainet/biomarker_matrix.h"
#include "json.hpp"

namespace brainet::models {

enum class ModelKind { kElasticNetLogistic, kGradientBoostedTrees, kShallowMlp };

inline constexpr ModelKind kAllModelKinds[] = {
    ModelKind::kElasticNetLogistic, ModelKind::kGradientBoostedTrees,
    ModelKind::kShallowMlp};

// "elastic_net_logistic", "gradient_boosted_trees", "shallow_mlp".
std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

using Hyperparameters = std::map<std::string, double>;

struct ModelConfig {
  ModelKind kind = ModelKind::kElasticNetLogistic;
  Hyperparameters hyperparameters;
  std::uint64_t seed = 0;
};

// Defaults per kind:
//   elastic_net_logistic   lambda=0.01 l1_ratio=0.5
//   gradient_boosted_trees rounds=100 max_depth=3 learning_rate=0.1
//                          reg_lambda=1
//   shallow_mlp            hidden_units=16 epochs=500 step=0.1
Hyperparameters DefaultHyperparameters(ModelKind kind);

// Fills missing hyperparameters with defaults and rejects unknown names or
// out-of-range values with ConfigError.
ModelConfig CompleteConfig(const ModelConfig& config);

// Axes keep their declared order. Points are enumerated axis-major: the
// first axis varies slowest.
struct HyperparameterGrid {
  std::vector<std::pair<std::string, std::vector<double>>> axes;

  std::vector<Hyperparameters> Points() const;
};

HyperparameterGrid DefaultGrid(ModelKind kind);

struct LogisticParameters {
  double intercept = 0.0;
  Eigen::VectorXd weights;
};

// Flat binary tree. Node 0 is the root; feature < 0 marks a leaf. Rows go
// left when x[feature] < threshold.
struct RegressionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  double Predict(const double* row) const;
  int Depth() const;
};

struct TreeEnsemble {
  double base_score = 0.0;  // log-odds
  std::vector<RegressionTree> trees;
};

struct MlpParameters {
  Eigen::MatrixXd hidden_weights;  // hidden x inputs
  Eigen::VectorXd hidden_bias;
  Eigen::VectorXd output_weights;  // hidden
  double output_bias = 0.0;
};

using ModelParameters =
    std::variant<LogisticParameters, TreeEnsemble, MlpParameters>;

struct TrainingReport {
  bool converged = false;
  int iterations = 0;
  double final_loss = 0.0;
  std::vector<double> loss_trace;  // per sweep / round / epoch
};

struct TrainedModel {
  ModelConfig config;
  ModelParameters parameters;
  std::vector<std::string> feature_names;
  TrainingReport report;

  std::size_t input_width() const { return feature_names.size(); }

  // P(case) per row of `x`. Throws DataError on width mismatch.
  Eigen::VectorXd PredictProba(const Eigen::MatrixXd& x) const;
};

// Checks that `matrix` carries the model's features in order.
Eigen::VectorXd PredictProba(const TrainedModel& model,
                             const BiomarkerMatrix& matrix);

// Mean logistic loss plus lambda * (l1_ratio * |w|_1 + (1 - l1_ratio) / 2 *
// |w|_2^2), minimized by cyclic proximal Newton coordinate updates with
// backtracking. The intercept is unpenalized. Stops when the largest
// coefficient change in a sweep is below 1e-6 or after 10000 sweeps.
TrainedModel TrainLogisticElasticNet(const BiomarkerMatrix& matrix,
                                     double lambda, double l1_ratio,
                                     std::uint64_t seed);

// Second-order boosted trees on logistic loss with exact greedy splits.
TrainedModel TrainGbt(const BiomarkerMatrix& matrix, int rounds, int max_depth,
                      double learning_rate, std::uint64_t seed,
                      double reg_lambda = 1.0);

// One ReLU hidden layer and a sigmoid output trained full-batch with
// momentum 0.9. Throws NumericError("divergence ...") on a non-finite loss.
TrainedModel TrainMlp(const BiomarkerMatrix& matrix, int hidden_units,
                      int epochs, double step, std::uint64_t seed);

TrainedModel Train(const BiomarkerMatrix& matrix, const ModelConfig& config);

// Mean logistic loss of the network and its analytic gradient.
struct MlpLossAndGradient {
  double loss;
  MlpParameters gradient;
};
MlpLossAndGradient ComputeMlpLossAndGradient(const MlpParameters& params,
                                             const Eigen::MatrixXd& x,
                                             const Eigen::VectorXd& y);
MlpParameters InitializeMlp(int inputs, int hidden_units, std::uint64_t seed);
Eigen::VectorXd FlattenMlp(const MlpParameters& params);
MlpParameters UnflattenMlp(const Eigen::VectorXd& flat, int inputs,
                           int hidden_units);
Eigen::VectorXd MlpPredict(const MlpParameters& params,
                           const Eigen::MatrixXd& x);

struct GridSearchResult {
  ModelConfig best;
  std::vector<Hyperparameters> points;
  std::vector<double> mean_scores;  // mean validation micro-F1 per point
};

// Stratified k-fold grid search. Picks the point with the highest mean
// validation micro-F1; ties go to the earliest point. A point whose training
// fails numerically scores -infinity.
GridSearchResult GridSearchCv(const BiomarkerMatrix& matrix, ModelKind kind,
                              const HyperparameterGrid& grid, int folds,
                              std::uint64_t seed, int jobs = 1);

inline constexpr int kModelSchemaVersion = 1;

nlohmann::ordered_json ModelToJson(const TrainedModel& model);
TrainedModel ModelFromJson(const nlohmann::ordered_json& doc);
void SaveModel(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel LoadModel(const std::filesystem::path& path);

nlohmann::ordered_json GridToJson(const HyperparameterGrid& grid);
HyperparameterGrid GridFromJson(const nlohmann::ordered_json& doc);

}  // namespace brainet::models

#endif  // BRAINET_MODELS_H_
