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

#include "brainet/models.h"

#include <cmath>
#include <variant>
#include <vector>

#include "brainet/error.h"
#include "brainet/random.h"
#include "gtest/gtest.h"

namespace brainet::models {
namespace {

BiomarkerMatrix Cohort(std::uint64_t seed, std::size_t n, std::size_t p, double effect) {
  Rng rng(seed);
  BiomarkerMatrix m;
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) m.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t r = 0; r < n; ++r) {
    const int label = r % 2 == 0 ? 1 : 0;
    m.labels.push_back(label);
    for (std::size_t j = 0; j < p; ++j) {
      const double shift = j < 2 ? (label ? 0.5 : -0.5) * effect : 0.0;
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = shift + rng.Normal();
    }
  }
  return m;
}

double Accuracy(const TrainedModel& model, const BiomarkerMatrix& m) {
  const Eigen::VectorXd p = model.PredictProba(m.values);
  int correct = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    correct += (p[static_cast<Eigen::Index>(r)] >= 0.5 ? 1 : 0) == m.labels[r];
  }
  return static_cast<double>(correct) / static_cast<double>(m.rows());
}

TEST(GridTest, AxisMajorEnumeration) {
  HyperparameterGrid grid{{{"a", {1, 2}}, {"b", {10, 20, 30}}}};
  const auto points = grid.Points();
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[0].at("a"), 1);
  EXPECT_EQ(points[0].at("b"), 10);
  EXPECT_EQ(points[1].at("b"), 20);
  EXPECT_EQ(points[3].at("a"), 2);
  EXPECT_EQ(points[3].at("b"), 10);
}

TEST(ConfigTest, DefaultsAndValidation) {
  const ModelConfig c = CompleteConfig({ModelKind::kGradientBoostedTrees, {{"rounds", 7}}, 0});
  EXPECT_EQ(c.hyperparameters.at("rounds"), 7);
  EXPECT_EQ(c.hyperparameters.at("max_depth"), 3);
  EXPECT_THROW(CompleteConfig({ModelKind::kShallowMlp, {{"bogus", 1}}, 0}), ConfigError);
  EXPECT_THROW(CompleteConfig({ModelKind::kElasticNetLogistic, {{"l1_ratio", 1.5}}, 0}), ConfigError);
  EXPECT_EQ(ParseModelKind(ModelKindName(ModelKind::kShallowMlp)), ModelKind::kShallowMlp);
  EXPECT_THROW(ParseModelKind("forest"), ConfigError);
}

TEST(ElasticNetTest, HugePenaltyZeroesCoefficients) {
  const BiomarkerMatrix m = Cohort(1, 200, 5, 2.0);
  const TrainedModel model = TrainLogisticElasticNet(m, 1e6, 0.5, 0);
  const auto& params = std::get<LogisticParameters>(model.parameters);
  for (Eigen::Index j = 0; j < params.weights.size(); ++j) EXPECT_EQ(params.weights[j], 0.0);
  EXPECT_NEAR(params.intercept, 0.0, 1e-9);  // balanced labels
}

TEST(ElasticNetTest, SatisfiesOptimalityConditions) {
  const BiomarkerMatrix m = Cohort(2, 300, 6, 1.5);
  const double lambda = 0.05, alpha = 0.7;
  const TrainedModel model = TrainLogisticElasticNet(m, lambda, alpha, 0);
  ASSERT_TRUE(model.report.converged);
  const auto& params = std::get<LogisticParameters>(model.parameters);
  const Eigen::VectorXd p = model.PredictProba(m.values);
  const Eigen::VectorXd residual = p - m.LabelVector();
  const double n = static_cast<double>(m.rows());
  EXPECT_NEAR(residual.sum() / n, 0.0, 1e-5);
  for (Eigen::Index j = 0; j < params.weights.size(); ++j) {
    const double g = m.values.col(j).dot(residual) / n;
    const double w = params.weights[j];
    if (w == 0.0) {
      EXPECT_LE(std::fabs(g), lambda * alpha + 1e-5);
    } else {
      EXPECT_NEAR(g + lambda * (1 - alpha) * w + lambda * alpha * (w > 0 ? 1 : -1), 0.0, 1e-5);
    }
  }
  EXPECT_GT(Accuracy(model, m), 0.7);
}

TEST(GbtTest, TrainingLossNonIncreasing) {
  const BiomarkerMatrix m = Cohort(3, 200, 4, 1.0);
  const TrainedModel model = TrainGbt(m, 40, 3, 0.3, 0);
  const auto& trace = model.report.loss_trace;
  ASSERT_EQ(trace.size(), 41u);
  for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace[k], trace[k - 1] + 1e-12);
  for (const auto& tree : std::get<TreeEnsemble>(model.parameters).trees) {
    EXPECT_LE(tree.Depth(), 3);
  }
}

TEST(GbtTest, LearnsXorAtDepthTwo) {
  BiomarkerMatrix m;
  m.feature_names = {"a", "b"};
  m.values.resize(200, 2);
  for (int r = 0; r < 200; ++r) {
    const int a = r % 2, b = (r / 2) % 2;
    m.values(r, 0) = a;
    m.values(r, 1) = b;
    m.labels.push_back(a ^ b);
  }
  EXPECT_EQ(Accuracy(TrainGbt(m, 20, 2, 0.5, 0), m), 1.0);
}

TEST(MlpTest, AnalyticGradientMatchesCentralDifferences) {
  const BiomarkerMatrix m = Cohort(4, 40, 3, 1.0);
  const Eigen::VectorXd y = m.LabelVector();
  const MlpParameters params = InitializeMlp(3, 5, 7);
  const auto analytic = FlattenMlp(ComputeMlpLossAndGradient(params, m.values, y).gradient);
  Eigen::VectorXd flat = FlattenMlp(params);
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    const double saved = flat[k];
    flat[k] = saved + h;
    const double up = ComputeMlpLossAndGradient(UnflattenMlp(flat, 3, 5), m.values, y).loss;
    flat[k] = saved - h;
    const double down = ComputeMlpLossAndGradient(UnflattenMlp(flat, 3, 5), m.values, y).loss;
    flat[k] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max(std::fabs(analytic[k]) + std::fabs(numeric), 1e-6);
    EXPECT_LT(std::fabs(analytic[k] - numeric) / scale, 1e-4) << "parameter " << k;
  }
}

TEST(MlpTest, FitsSeparableDataAndIsSeeded) {
  const BiomarkerMatrix m = Cohort(5, 200, 3, 3.0);
  const TrainedModel a = TrainMlp(m, 8, 300, 0.1, 11);
  const TrainedModel b = TrainMlp(m, 8, 300, 0.1, 11);
  EXPECT_GT(Accuracy(a, m), 0.85);
  EXPECT_EQ(a.PredictProba(m.values), b.PredictProba(m.values));
  EXPECT_LT(a.report.final_loss, a.report.loss_trace.front());
}

TEST(SerializationTest, RoundTripPreservesPredictions) {
  const BiomarkerMatrix m = Cohort(6, 120, 4, 1.5);
  for (const ModelKind kind : kAllModelKinds) {
    ModelConfig config{kind, {}, 3};
    if (kind == ModelKind::kGradientBoostedTrees) config.hyperparameters["rounds"] = 10;
    if (kind == ModelKind::kShallowMlp) config.hyperparameters["epochs"] = 50;
    const TrainedModel model = Train(m, config);
    const TrainedModel back = ModelFromJson(ModelToJson(model));
    EXPECT_EQ(back.feature_names, model.feature_names);
    EXPECT_EQ(back.PredictProba(m.values), model.PredictProba(m.values));
    EXPECT_EQ(ModelToJson(back).dump(), ModelToJson(model).dump());
  }
}

TEST(SerializationTest, RejectsBadDocuments) {
  const BiomarkerMatrix m = Cohort(6, 60, 2, 1.5);
  auto doc = ModelToJson(TrainLogisticElasticNet(m, 0.01, 0.5, 0));
  doc["schema_version"] = 99;
  EXPECT_THROW(ModelFromJson(doc), Error);
}

TEST(PredictTest, WidthMismatch) {
  const BiomarkerMatrix m = Cohort(7, 60, 3, 1.0);
  const TrainedModel model = TrainLogisticElasticNet(m, 0.01, 0.5, 0);
  EXPECT_THROW(model.PredictProba(Eigen::MatrixXd::Zero(2, 4)), DataError);
}

TEST(GridSearchTest, ChoosesBestPointAndIsDeterministic) {
  const BiomarkerMatrix m = Cohort(8, 150, 4, 2.0);
  const HyperparameterGrid grid{{{"lambda", {1e3, 0.01}}, {"l1_ratio", {0.5}}}};
  const GridSearchResult a = GridSearchCv(m, ModelKind::kElasticNetLogistic, grid, 5, 1, 1);
  const GridSearchResult b = GridSearchCv(m, ModelKind::kElasticNetLogistic, grid, 5, 1, 4);
  ASSERT_EQ(a.mean_scores.size(), 2u);
  EXPECT_EQ(a.best.hyperparameters.at("lambda"), 0.01);
  EXPECT_GT(a.mean_scores[1], a.mean_scores[0]);
  EXPECT_EQ(a.mean_scores, b.mean_scores);
}

}  // namespace
}  // namespace brainet::models
