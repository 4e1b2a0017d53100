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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brainet/error.h"
#include "brainet/io.h"
#include "brainet/metrics.h"
#include "brainet/parallel.h"
#include "brainet/random.h"
#include "brainet/splits.h"

namespace brainet::models {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kCoefficientTolerance = 1e-6;
constexpr int kMaxSweeps = 10000;
constexpr double kMomentum = 0.9;
constexpr double kCurvatureFloor = 1e-12;

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double MeanLogLoss(const Eigen::VectorXd& margin, const Eigen::VectorXd& y) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    sum += Softplus(margin[i]) - y[i] * margin[i];
  }
  return sum / static_cast<double>(margin.size());
}

Eigen::VectorXd SigmoidVector(const Eigen::VectorXd& margin) {
  Eigen::VectorXd out(margin.size());
  for (Eigen::Index i = 0; i < margin.size(); ++i) out[i] = Sigmoid(margin[i]);
  return out;
}

double SoftThreshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

void RequireBothClasses(const BiomarkerMatrix& matrix) {
  matrix.Validate();
  const std::size_t positives = matrix.CountLabel(1);
  if (positives == 0 || positives == matrix.rows()) {
    throw DataError("training needs both classes; labels are single-class");
  }
}

double ClassPriorLogOdds(const BiomarkerMatrix& matrix) {
  const double prior = static_cast<double>(matrix.CountLabel(1)) /
                       static_cast<double>(matrix.rows());
  return std::log(prior / (1.0 - prior));
}

bool IsWholeNumber(double value) { return std::floor(value) == value; }

double Require(const Hyperparameters& hp, const std::string& name) {
  const auto it = hp.find(name);
  if (it == hp.end()) throw ConfigError("missing hyperparameter '" + name + "'");
  return it->second;
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kElasticNetLogistic:
      return "elastic_net_logistic";
    case ModelKind::kGradientBoostedTrees:
      return "gradient_boosted_trees";
    case ModelKind::kShallowMlp:
      return "shallow_mlp";
  }
  return "elastic_net_logistic";
}

ModelKind ParseModelKind(std::string_view name) {
  for (const ModelKind kind : kAllModelKinds) {
    if (ModelKindName(kind) == name) return kind;
  }
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

Hyperparameters DefaultHyperparameters(ModelKind kind) {
  switch (kind) {
    case ModelKind::kElasticNetLogistic:
      return {{"lambda", 0.01}, {"l1_ratio", 0.5}};
    case ModelKind::kGradientBoostedTrees:
      return {{"rounds", 100},
              {"max_depth", 3},
              {"learning_rate", 0.1},
              {"reg_lambda", 1.0}};
    case ModelKind::kShallowMlp:
      return {{"hidden_units", 16}, {"epochs", 500}, {"step", 0.1}};
  }
  return {};
}

ModelConfig CompleteConfig(const ModelConfig& config) {
  ModelConfig out = config;
  const Hyperparameters defaults = DefaultHyperparameters(config.kind);
  for (const auto& [name, value] : config.hyperparameters) {
    if (!defaults.contains(name)) {
      throw ConfigError("unknown hyperparameter '" + name + "' for " +
                        std::string(ModelKindName(config.kind)));
    }
    if (!std::isfinite(value)) {
      throw ConfigError("hyperparameter '" + name + "' must be finite");
    }
  }
  for (const auto& [name, value] : defaults) out.hyperparameters.emplace(name, value);

  const Hyperparameters& hp = out.hyperparameters;
  auto check = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  switch (config.kind) {
    case ModelKind::kElasticNetLogistic:
      check(hp.at("lambda") >= 0.0, "lambda must be nonnegative");
      check(hp.at("l1_ratio") >= 0.0 && hp.at("l1_ratio") <= 1.0,
            "l1_ratio must lie in [0, 1]");
      break;
    case ModelKind::kGradientBoostedTrees:
      check(hp.at("rounds") >= 1.0 && IsWholeNumber(hp.at("rounds")),
            "rounds must be a positive integer");
      check(hp.at("max_depth") >= 0.0 && IsWholeNumber(hp.at("max_depth")),
            "max_depth must be a nonnegative integer");
      check(hp.at("learning_rate") > 0.0 && hp.at("learning_rate") <= 1.0,
            "learning_rate must lie in (0, 1]");
      check(hp.at("reg_lambda") >= 0.0, "reg_lambda must be nonnegative");
      break;
    case ModelKind::kShallowMlp:
      check(hp.at("hidden_units") >= 1.0 && IsWholeNumber(hp.at("hidden_units")),
            "hidden_units must be a positive integer");
      check(hp.at("epochs") >= 1.0 && IsWholeNumber(hp.at("epochs")),
            "epochs must be a positive integer");
      check(hp.at("step") > 0.0, "step must be positive");
      break;
  }
  return out;
}

std::vector<Hyperparameters> HyperparameterGrid::Points() const {
  std::vector<Hyperparameters> points = {Hyperparameters{}};
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ConfigError("grid axis '" + name + "' is empty");
    std::vector<Hyperparameters> next;
    next.reserve(points.size() * values.size());
    for (const auto& point : points) {
      for (const double value : values) {
        Hyperparameters extended = point;
        extended[name] = value;
        next.push_back(std::move(extended));
      }
    }
    points = std::move(next);
  }
  return points;
}

HyperparameterGrid DefaultGrid(ModelKind kind) {
  switch (kind) {
    case ModelKind::kElasticNetLogistic:
      return {{{"lambda", {0.001, 0.01, 0.1}}, {"l1_ratio", {0.2, 0.5, 0.8}}}};
    case ModelKind::kGradientBoostedTrees:
      return {{{"rounds", {50, 100}},
               {"max_depth", {2, 3}},
               {"learning_rate", {0.1, 0.3}}}};
    case ModelKind::kShallowMlp:
      return {{{"hidden_units", {16, 32}},
               {"step", {0.01, 0.1}},
               {"epochs", {500}}}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Prediction.

double RegressionTree::Predict(const double* row) const {
  int node = 0;
  while (feature[static_cast<std::size_t>(node)] >= 0) {
    const auto index = static_cast<std::size_t>(node);
    node = row[feature[index]] < threshold[index] ? left[index] : right[index];
  }
  return value[static_cast<std::size_t>(node)];
}

int RegressionTree::Depth() const {
  std::vector<int> depth(feature.size(), 0);
  int deepest = 0;
  for (std::size_t node = 0; node < feature.size(); ++node) {
    deepest = std::max(deepest, depth[node]);
    if (feature[node] >= 0) {
      depth[static_cast<std::size_t>(left[node])] = depth[node] + 1;
      depth[static_cast<std::size_t>(right[node])] = depth[node] + 1;
    }
  }
  return deepest;
}

Eigen::VectorXd MlpPredict(const MlpParameters& params,
                           const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd hidden =
      ((x * params.hidden_weights.transpose()).rowwise() +
       params.hidden_bias.transpose())
          .cwiseMax(0.0);
  const Eigen::VectorXd margin =
      (hidden * params.output_weights).array() + params.output_bias;
  return SigmoidVector(margin);
}

Eigen::VectorXd TrainedModel::PredictProba(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_width()) {
    throw DataError("feature width mismatch: model expects " +
                    std::to_string(input_width()) + ", got " +
                    std::to_string(x.cols()));
  }
  return std::visit(
      [&](const auto& params) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, LogisticParameters>) {
          const Eigen::VectorXd margin =
              (x * params.weights).array() + params.intercept;
          return SigmoidVector(margin);
        } else if constexpr (std::is_same_v<T, TreeEnsemble>) {
          const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>
              rows = x;
          Eigen::VectorXd out(x.rows());
          for (Eigen::Index r = 0; r < x.rows(); ++r) {
            double margin = params.base_score;
            for (const auto& tree : params.trees) {
              margin += tree.Predict(rows.row(r).data());
            }
            out[r] = Sigmoid(margin);
          }
          return out;
        } else {
          return MlpPredict(params, x);
        }
      },
      parameters);
}

Eigen::VectorXd PredictProba(const TrainedModel& model,
                             const BiomarkerMatrix& matrix) {
  if (matrix.feature_names != model.feature_names) {
    throw DataError("feature mismatch between model and matrix");
  }
  return model.PredictProba(matrix.values);
}

// ---------------------------------------------------------------------------
// Elastic-net logistic regression.

TrainedModel TrainLogisticElasticNet(const BiomarkerMatrix& matrix,
                                     double lambda, double l1_ratio,
                                     std::uint64_t seed) {
  RequireBothClasses(matrix);
  ModelConfig config = CompleteConfig(
      {ModelKind::kElasticNetLogistic,
       {{"lambda", lambda}, {"l1_ratio", l1_ratio}},
       seed});

  const Eigen::MatrixXd& x = matrix.values;
  const Eigen::VectorXd y = matrix.LabelVector();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double l1 = lambda * l1_ratio;
  const double l2 = lambda * (1.0 - l1_ratio);
  auto penalty = [&](double w) { return l1 * std::fabs(w) + 0.5 * l2 * w * w; };

  LogisticParameters params;
  params.intercept = ClassPriorLogOdds(matrix);
  params.weights = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, params.intercept);
  Eigen::VectorXd prob = SigmoidVector(margin);
  double loss = MeanLogLoss(margin, y);

  TrainingReport report;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    double max_change = 0.0;

    // Unpenalized intercept: damped Newton step.
    {
      const double gradient = (prob - y).sum() * inv_n;
      const double curvature = std::max(
          (prob.array() * (1.0 - prob.array())).sum() * inv_n, kCurvatureFloor);
      const double direction = -gradient / curvature;
      double t = 1.0;
      for (int attempt = 0; attempt < 60 && direction != 0.0; ++attempt, t *= 0.5) {
        const Eigen::VectorXd trial = margin.array() + t * direction;
        const double trial_loss = MeanLogLoss(trial, y);
        if (trial_loss <= loss) {
          margin = trial;
          loss = trial_loss;
          params.intercept += t * direction;
          max_change = std::max(max_change, std::fabs(t * direction));
          prob = SigmoidVector(margin);
          break;
        }
      }
    }

    for (Eigen::Index j = 0; j < p; ++j) {
      const auto column = x.col(j);
      const double gradient = (prob - y).dot(column) * inv_n;
      const double curvature =
          (prob.array() * (1.0 - prob.array()) * column.array().square()).sum() *
          inv_n;
      if (curvature == 0.0 && gradient == 0.0) continue;  // all-zero column
      const double h = std::max(curvature, kCurvatureFloor);
      const double w = params.weights[j];
      const double target = SoftThreshold(h * w - gradient, l1) / (h + l2);
      const double direction = target - w;
      if (direction == 0.0) continue;

      const double current = loss + penalty(w);
      double t = 1.0;
      for (int attempt = 0; attempt < 60; ++attempt, t *= 0.5) {
        const double candidate = w + t * direction;
        const Eigen::VectorXd trial = margin + (t * direction) * column;
        const double trial_loss = MeanLogLoss(trial, y);
        if (trial_loss + penalty(candidate) <= current) {
          margin = trial;
          loss = trial_loss;
          params.weights[j] = candidate;
          max_change = std::max(max_change, std::fabs(candidate - w));
          prob = SigmoidVector(margin);
          break;
        }
      }
    }

    double objective = loss;
    for (Eigen::Index j = 0; j < p; ++j) objective += penalty(params.weights[j]);
    report.loss_trace.push_back(objective);
    report.iterations = sweep;
    if (max_change < kCoefficientTolerance) {
      report.converged = true;
      break;
    }
  }
  report.final_loss = report.loss_trace.back();

  TrainedModel model;
  model.config = std::move(config);
  model.parameters = std::move(params);
  model.feature_names = matrix.feature_names;
  model.report = std::move(report);
  return model;
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees.

namespace {

struct SplitCandidate {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

double SplitThreshold(double below, double above) {
  const double mid = below + (above - below) / 2.0;
  return below < mid ? mid : above;
}

// Grows one tree level by level. Returns the tree and, through `leaf_of`,
// the leaf each training row lands in.
RegressionTree GrowTree(const Eigen::MatrixXd& x,
                        const std::vector<std::vector<int>>& sorted,
                        const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                        int max_depth, double learning_rate, double reg_lambda,
                        std::vector<int>& leaf_of) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  RegressionTree tree;
  auto add_node = [&tree] {
    tree.feature.push_back(-1);
    tree.threshold.push_back(0.0);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.value.push_back(0.0);
    return static_cast<int>(tree.feature.size() - 1);
  };
  add_node();
  leaf_of.assign(n, 0);
  auto score = [reg_lambda](double grad, double hess) {
    const double denominator = hess + reg_lambda;
    return denominator > 0.0 ? grad * grad / denominator : 0.0;
  };

  std::vector<int> frontier = {0};
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot_of(tree.feature.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
    }
    const std::size_t slots = frontier.size();
    std::vector<double> grad_total(slots, 0.0), hess_total(slots, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const int s = slot_of[static_cast<std::size_t>(leaf_of[r])];
      if (s < 0) continue;
      grad_total[static_cast<std::size_t>(s)] += g[static_cast<Eigen::Index>(r)];
      hess_total[static_cast<std::size_t>(s)] += h[static_cast<Eigen::Index>(r)];
    }

    std::vector<SplitCandidate> best(slots);
    std::vector<double> grad_left(slots), hess_left(slots), last(slots);
    std::vector<bool> seen(slots);
    for (std::size_t f = 0; f < p; ++f) {
      std::fill(grad_left.begin(), grad_left.end(), 0.0);
      std::fill(hess_left.begin(), hess_left.end(), 0.0);
      std::fill(seen.begin(), seen.end(), false);
      for (const int row : sorted[f]) {
        const int slot = slot_of[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(row)])];
        if (slot < 0) continue;
        const auto s = static_cast<std::size_t>(slot);
        const double v = x(row, static_cast<Eigen::Index>(f));
        if (seen[s] && v > last[s]) {
          const double gl = grad_left[s];
          const double hl = hess_left[s];
          const double gr = grad_total[s] - gl;
          const double hr = hess_total[s] - hl;
          const double gain = 0.5 * (score(gl, hl) + score(gr, hr) -
                                     score(grad_total[s], hess_total[s]));
          if (gain > best[s].gain) {
            best[s] = {gain, static_cast<int>(f), SplitThreshold(last[s], v)};
          }
        }
        grad_left[s] += g[row];
        hess_left[s] += h[row];
        last[s] = v;
        seen[s] = true;
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < slots; ++s) {
      // Zero-gain splits are kept so that interactions invisible to a single
      // split (XOR) can still be reached one level deeper.
      if (best[s].feature < 0 || !(best[s].gain >= 0.0)) continue;
      const auto node = static_cast<std::size_t>(frontier[s]);
      const int left = add_node();
      const int right = add_node();
      tree.feature[node] = best[s].feature;
      tree.threshold[node] = best[s].threshold;
      tree.left[node] = left;
      tree.right[node] = right;
      next.push_back(left);
      next.push_back(right);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const auto node = static_cast<std::size_t>(leaf_of[r]);
      if (node >= slot_of.size() || slot_of[node] < 0 || tree.feature[node] < 0) {
        continue;
      }
      leaf_of[r] = x(static_cast<Eigen::Index>(r), tree.feature[node]) <
                           tree.threshold[node]
                       ? tree.left[node]
                       : tree.right[node];
    }
    frontier = std::move(next);
  }

  std::vector<double> grad_leaf(tree.feature.size(), 0.0);
  std::vector<double> hess_leaf(tree.feature.size(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    grad_leaf[static_cast<std::size_t>(leaf_of[r])] += g[static_cast<Eigen::Index>(r)];
    hess_leaf[static_cast<std::size_t>(leaf_of[r])] += h[static_cast<Eigen::Index>(r)];
  }
  for (std::size_t node = 0; node < tree.feature.size(); ++node) {
    if (tree.feature[node] >= 0) continue;
    const double denominator = hess_leaf[node] + reg_lambda;
    tree.value[node] =
        denominator > 0.0 ? -learning_rate * grad_leaf[node] / denominator : 0.0;
  }
  return tree;
}

}  // namespace

TrainedModel TrainGbt(const BiomarkerMatrix& matrix, int rounds, int max_depth,
                      double learning_rate, std::uint64_t seed,
                      double reg_lambda) {
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  RequireBothClasses(matrix);
  ModelConfig config = CompleteConfig({ModelKind::kGradientBoostedTrees,
                                       {{"rounds", rounds},
                                        {"max_depth", max_depth},
                                        {"learning_rate", learning_rate},
                                        {"reg_lambda", reg_lambda}},
                                       seed});

  const Eigen::MatrixXd& x = matrix.values;
  const Eigen::VectorXd y = matrix.LabelVector();
  const Eigen::Index n = x.rows();
  std::vector<std::vector<int>> sorted(matrix.cols());
  for (std::size_t f = 0; f < matrix.cols(); ++f) {
    sorted[f].resize(static_cast<std::size_t>(n));
    std::iota(sorted[f].begin(), sorted[f].end(), 0);
    std::stable_sort(sorted[f].begin(), sorted[f].end(), [&](int a, int b) {
      return x(a, static_cast<Eigen::Index>(f)) < x(b, static_cast<Eigen::Index>(f));
    });
  }

  TreeEnsemble ensemble;
  ensemble.base_score = ClassPriorLogOdds(matrix);
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, ensemble.base_score);
  TrainingReport report;
  report.loss_trace.push_back(MeanLogLoss(margin, y));
  std::vector<int> leaf_of;
  for (int round = 0; round < rounds; ++round) {
    const Eigen::VectorXd prob = SigmoidVector(margin);
    const Eigen::VectorXd g = prob - y;
    const Eigen::VectorXd h = (prob.array() * (1.0 - prob.array())).matrix();
    RegressionTree tree = GrowTree(x, sorted, g, h, max_depth, learning_rate,
                                   reg_lambda, leaf_of);
    for (Eigen::Index r = 0; r < n; ++r) {
      margin[r] += tree.value[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(r)])];
    }
    ensemble.trees.push_back(std::move(tree));
    report.loss_trace.push_back(MeanLogLoss(margin, y));
  }
  report.converged = true;
  report.iterations = rounds;
  report.final_loss = report.loss_trace.back();

  TrainedModel model;
  model.config = std::move(config);
  model.parameters = std::move(ensemble);
  model.feature_names = matrix.feature_names;
  model.report = std::move(report);
  return model;
}

// ---------------------------------------------------------------------------
// Shallow MLP.

MlpParameters InitializeMlp(int inputs, int hidden_units, std::uint64_t seed) {
  Rng rng(seed);
  MlpParameters params;
  const double hidden_range = std::sqrt(6.0 / (inputs + hidden_units));
  const double output_range = std::sqrt(6.0 / (hidden_units + 1));
  params.hidden_weights.resize(hidden_units, inputs);
  for (int i = 0; i < hidden_units; ++i) {
    for (int j = 0; j < inputs; ++j) {
      params.hidden_weights(i, j) = rng.Uniform(-hidden_range, hidden_range);
    }
  }
  params.hidden_bias = Eigen::VectorXd::Zero(hidden_units);
  params.output_weights.resize(hidden_units);
  for (int i = 0; i < hidden_units; ++i) {
    params.output_weights[i] = rng.Uniform(-output_range, output_range);
  }
  params.output_bias = 0.0;
  return params;
}

MlpLossAndGradient ComputeMlpLossAndGradient(const MlpParameters& params,
                                             const Eigen::MatrixXd& x,
                                             const Eigen::VectorXd& y) {
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  const Eigen::MatrixXd pre = (x * params.hidden_weights.transpose()).rowwise() +
                              params.hidden_bias.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::VectorXd margin =
      (hidden * params.output_weights).array() + params.output_bias;

  MlpLossAndGradient result;
  result.loss = MeanLogLoss(margin, y);
  const Eigen::VectorXd delta = (SigmoidVector(margin) - y) * inv_n;
  MlpParameters& grad = result.gradient;
  grad.output_weights = hidden.transpose() * delta;
  grad.output_bias = delta.sum();
  const Eigen::MatrixXd hidden_delta =
      ((delta * params.output_weights.transpose()).array() *
       (pre.array() > 0.0).cast<double>())
          .matrix();
  grad.hidden_weights = hidden_delta.transpose() * x;
  grad.hidden_bias = hidden_delta.colwise().sum().transpose();
  return result;
}

Eigen::VectorXd FlattenMlp(const MlpParameters& params) {
  const Eigen::Index w = params.hidden_weights.size();
  const Eigen::Index h = params.hidden_bias.size();
  Eigen::VectorXd flat(w + 2 * h + 1);
  flat.head(w) = params.hidden_weights.reshaped();
  flat.segment(w, h) = params.hidden_bias;
  flat.segment(w + h, h) = params.output_weights;
  flat[w + 2 * h] = params.output_bias;
  return flat;
}

MlpParameters UnflattenMlp(const Eigen::VectorXd& flat, int inputs,
                           int hidden_units) {
  const Eigen::Index w = static_cast<Eigen::Index>(inputs) * hidden_units;
  if (flat.size() != w + 2 * hidden_units + 1) {
    throw DataError("flattened MLP has the wrong length");
  }
  MlpParameters params;
  params.hidden_weights = flat.head(w).reshaped(hidden_units, inputs);
  params.hidden_bias = flat.segment(w, hidden_units);
  params.output_weights = flat.segment(w + hidden_units, hidden_units);
  params.output_bias = flat[w + 2 * hidden_units];
  return params;
}

TrainedModel TrainMlp(const BiomarkerMatrix& matrix, int hidden_units,
                      int epochs, double step, std::uint64_t seed) {
  RequireBothClasses(matrix);
  ModelConfig config = CompleteConfig({ModelKind::kShallowMlp,
                                       {{"hidden_units", hidden_units},
                                        {"epochs", epochs},
                                        {"step", step}},
                                       seed});
  const Eigen::MatrixXd& x = matrix.values;
  const Eigen::VectorXd y = matrix.LabelVector();
  MlpParameters params =
      InitializeMlp(static_cast<int>(matrix.cols()), hidden_units, seed);
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(FlattenMlp(params).size());

  TrainingReport report;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const MlpLossAndGradient step_info = ComputeMlpLossAndGradient(params, x, y);
    if (!std::isfinite(step_info.loss)) {
      throw NumericError("divergence at epoch " + std::to_string(epoch));
    }
    report.loss_trace.push_back(step_info.loss);
    velocity = kMomentum * velocity - step * FlattenMlp(step_info.gradient);
    params = UnflattenMlp(FlattenMlp(params) + velocity,
                          static_cast<int>(matrix.cols()), hidden_units);
  }
  const double final_loss = ComputeMlpLossAndGradient(params, x, y).loss;
  if (!std::isfinite(final_loss)) {
    throw NumericError("divergence at epoch " + std::to_string(epochs));
  }
  report.converged = true;
  report.iterations = epochs;
  report.final_loss = final_loss;

  TrainedModel model;
  model.config = std::move(config);
  model.parameters = std::move(params);
  model.feature_names = matrix.feature_names;
  model.report = std::move(report);
  return model;
}

TrainedModel Train(const BiomarkerMatrix& matrix, const ModelConfig& config) {
  const ModelConfig full = CompleteConfig(config);
  const Hyperparameters& hp = full.hyperparameters;
  switch (full.kind) {
    case ModelKind::kElasticNetLogistic:
      return TrainLogisticElasticNet(matrix, Require(hp, "lambda"),
                                     Require(hp, "l1_ratio"), full.seed);
    case ModelKind::kGradientBoostedTrees:
      return TrainGbt(matrix, static_cast<int>(Require(hp, "rounds")),
                      static_cast<int>(Require(hp, "max_depth")),
                      Require(hp, "learning_rate"), full.seed,
                      Require(hp, "reg_lambda"));
    case ModelKind::kShallowMlp:
      return TrainMlp(matrix, static_cast<int>(Require(hp, "hidden_units")),
                      static_cast<int>(Require(hp, "epochs")),
                      Require(hp, "step"), full.seed);
  }
  throw ConfigError("unknown model kind");
}

// ---------------------------------------------------------------------------
// Grid search.

GridSearchResult GridSearchCv(const BiomarkerMatrix& matrix, ModelKind kind,
                              const HyperparameterGrid& grid, int folds,
                              std::uint64_t seed, int jobs) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (matrix.rows() < static_cast<std::size_t>(folds)) {
    throw DataError("fewer samples than folds");
  }
  GridSearchResult result;
  result.points = grid.Points();
  if (result.points.empty()) throw ConfigError("empty hyperparameter grid");
  for (const auto& point : result.points) CompleteConfig({kind, point, seed});

  const std::vector<int> fold_of = splits::StratifiedKFold(matrix.labels, folds, seed);
  std::vector<BiomarkerMatrix> train_parts;
  std::vector<BiomarkerMatrix> validation_parts;
  for (int k = 0; k < folds; ++k) {
    std::vector<std::size_t> train_rows, validation_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      (fold_of[i] == k ? validation_rows : train_rows).push_back(i);
    }
    train_parts.push_back(matrix.SelectRows(train_rows));
    validation_parts.push_back(matrix.SelectRows(validation_rows));
  }

  result.mean_scores.assign(result.points.size(), 0.0);
  ParallelFor(result.points.size(), jobs, [&](std::size_t i) {
    const ModelConfig config{kind, result.points[i], seed};
    double total = 0.0;
    try {
      for (int k = 0; k < folds; ++k) {
        const TrainedModel model = Train(train_parts[static_cast<std::size_t>(k)], config);
        const auto& validation = validation_parts[static_cast<std::size_t>(k)];
        const Eigen::VectorXd prob = model.PredictProba(validation.values);
        total += metrics::ComputeMetrics(
                     validation.labels,
                     std::span<const double>(prob.data(), static_cast<std::size_t>(prob.size())))
                     .micro_f1;
      }
      result.mean_scores[i] = total / folds;
    } catch (const NumericError&) {
      result.mean_scores[i] = -std::numeric_limits<double>::infinity();
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.mean_scores[i] > result.mean_scores[best]) best = i;
  }
  if (std::isinf(result.mean_scores[best])) {
    throw NumericError("every grid point failed to train");
  }
  result.best = CompleteConfig({kind, result.points[best], seed});
  return result;
}

// ---------------------------------------------------------------------------
// Serialization.

nlohmann::ordered_json GridToJson(const HyperparameterGrid& grid) {
  Json doc = Json::object();
  for (const auto& [name, values] : grid.axes) doc[name] = values;
  return doc;
}

HyperparameterGrid GridFromJson(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw ConfigError("grid must be a JSON object");
  HyperparameterGrid grid;
  for (const auto& [name, values] : doc.items()) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError("grid axis '" + name + "' must be a nonempty array");
    }
    grid.axes.emplace_back(name, values.get<std::vector<double>>());
  }
  return grid;
}

namespace {

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const Json& doc, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(doc.size()), cols);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto row = doc[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("ragged weight matrix in model file");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFromJson(const Json& doc) {
  const auto values = doc.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::ordered_json ModelToJson(const TrainedModel& model) {
  Json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["kind"] = std::string(ModelKindName(model.config.kind));
  doc["seed"] = model.config.seed;
  doc["hyperparameters"] = Json::object();
  for (const auto& [name, value] : model.config.hyperparameters) {
    doc["hyperparameters"][name] = value;
  }
  doc["feature_names"] = model.feature_names;
  doc["training_report"] = {{"converged", model.report.converged},
                            {"iterations", model.report.iterations},
                            {"final_loss", model.report.final_loss}};
  Json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParameters>) {
          params["intercept"] = p.intercept;
          params["weights"] = VectorToJson(p.weights);
        } else if constexpr (std::is_same_v<T, TreeEnsemble>) {
          params["base_score"] = p.base_score;
          params["trees"] = Json::array();
          for (const auto& tree : p.trees) {
            params["trees"].push_back({{"feature", tree.feature},
                                       {"threshold", tree.threshold},
                                       {"left", tree.left},
                                       {"right", tree.right},
                                       {"value", tree.value}});
          }
        } else {
          params["hidden_weights"] = MatrixToJson(p.hidden_weights);
          params["hidden_bias"] = VectorToJson(p.hidden_bias);
          params["output_weights"] = VectorToJson(p.output_weights);
          params["output_bias"] = p.output_bias;
        }
      },
      model.parameters);
  doc["parameters"] = std::move(params);
  return doc;
}

TrainedModel ModelFromJson(const nlohmann::ordered_json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw ConfigError("unsupported model schema_version");
    }
    TrainedModel model;
    model.config.kind = ParseModelKind(doc.at("kind").get<std::string>());
    model.config.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& [name, value] : doc.at("hyperparameters").items()) {
      model.config.hyperparameters[name] = value.get<double>();
    }
    model.config = CompleteConfig(model.config);
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    const Json& report = doc.at("training_report");
    model.report.converged = report.at("converged").get<bool>();
    model.report.iterations = report.at("iterations").get<int>();
    model.report.final_loss = report.at("final_loss").get<double>();

    const Json& params = doc.at("parameters");
    const auto width = static_cast<Eigen::Index>(model.feature_names.size());
    switch (model.config.kind) {
      case ModelKind::kElasticNetLogistic: {
        LogisticParameters p;
        p.intercept = params.at("intercept").get<double>();
        p.weights = VectorFromJson(params.at("weights"));
        if (p.weights.size() != width) throw DataError("weight count mismatch");
        model.parameters = std::move(p);
        break;
      }
      case ModelKind::kGradientBoostedTrees: {
        TreeEnsemble p;
        p.base_score = params.at("base_score").get<double>();
        for (const auto& t : params.at("trees")) {
          RegressionTree tree;
          tree.feature = t.at("feature").get<std::vector<int>>();
          tree.threshold = t.at("threshold").get<std::vector<double>>();
          tree.left = t.at("left").get<std::vector<int>>();
          tree.right = t.at("right").get<std::vector<int>>();
          tree.value = t.at("value").get<std::vector<double>>();
          const std::size_t nodes = tree.feature.size();
          if (nodes == 0 || tree.threshold.size() != nodes ||
              tree.left.size() != nodes || tree.right.size() != nodes ||
              tree.value.size() != nodes) {
            throw DataError("malformed tree arrays");
          }
          for (std::size_t i = 0; i < nodes; ++i) {
            if (tree.feature[i] >= width) throw DataError("tree feature out of range");
            if (tree.feature[i] >= 0 &&
                (tree.left[i] <= static_cast<int>(i) || tree.right[i] <= static_cast<int>(i) ||
                 tree.left[i] >= static_cast<int>(nodes) ||
                 tree.right[i] >= static_cast<int>(nodes))) {
              throw DataError("malformed tree child index");
            }
          }
          p.trees.push_back(std::move(tree));
        }
        model.parameters = std::move(p);
        break;
      }
      case ModelKind::kShallowMlp: {
        MlpParameters p;
        p.hidden_weights = MatrixFromJson(params.at("hidden_weights"), width);
        p.hidden_bias = VectorFromJson(params.at("hidden_bias"));
        p.output_weights = VectorFromJson(params.at("output_weights"));
        p.output_bias = params.at("output_bias").get<double>();
        if (p.hidden_bias.size() != p.hidden_weights.rows() ||
            p.output_weights.size() != p.hidden_weights.rows()) {
          throw DataError("MLP layer shapes disagree");
        }
        model.parameters = std::move(p);
        break;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
}

void SaveModel(const TrainedModel& model, const std::filesystem::path& path) {
  io::WriteJson(path, ModelToJson(model));
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  return ModelFromJson(io::ReadJson(path));
}

}  // namespace brainet::models
