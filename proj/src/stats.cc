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

#include "brainet/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brainet/csv.h"
#include "brainet/error.h"
#include "brainet/io.h"
#include "brainet/parallel.h"
#include "brainet/special_functions.h"

namespace brainet::stats {

double Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson needs equal lengths");
  const std::size_t count = x.size();
  if (count < 2) throw DataError("pearson needs at least two samples");
  const auto [x_min, x_max] = std::minmax_element(x.begin(), x.end());
  const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
  if (*x_min == *x_max || *y_min == *y_max) {
    throw DataError("undefined correlation: constant input");
  }

  const double x0 = x[0];
  const double y0 = y[0];
  double sum_x = 0.0, sum_y = 0.0, sum_xy = 0.0, sum_xx = 0.0, sum_yy = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double a = x[k] - x0;
    const double b = y[k] - y0;
    sum_x += a;
    sum_y += b;
    sum_xy += a * b;
    sum_xx += a * a;
    sum_yy += b * b;
  }
  const double n = static_cast<double>(count);
  const double numerator = sum_xy - (1.0 / n) * sum_x * sum_y;
  const double var_x = (1.0 / n) * (n * sum_xx - sum_x * sum_x);
  const double var_y = (1.0 / n) * (n * sum_yy - sum_y * sum_y);
  if (!(var_x > 0.0) || !(var_y > 0.0)) {
    throw DataError("undefined correlation: zero variance");
  }
  const double r = numerator / std::sqrt(var_x * var_y);
  return std::clamp(r, -1.0, 1.0);
}

void CorrelationMatrix::Validate() const {
  const Eigen::Index p = r.rows();
  if (r.cols() != p || static_cast<std::size_t>(p) != names.size()) {
    throw DataError("correlation matrix shape does not match names");
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::fabs(r(i, i) - 1.0) > 1e-12) {
      throw DataError("correlation matrix diagonal must be one");
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(r(i, j)) || r(i, j) < -1.0 - 1e-12 ||
          r(i, j) > 1.0 + 1e-12) {
        throw DataError("correlation entry outside [-1, 1]");
      }
      if (std::fabs(r(i, j) - r(j, i)) > 1e-12) {
        throw DataError("correlation matrix is not symmetric");
      }
    }
  }
}

CorrelationMatrix ComputeCorrelationMatrix(const BiomarkerMatrix& matrix,
                                           std::span<const std::string> subset,
                                           int jobs) {
  if (subset.empty()) throw DataError("correlation subset is empty");
  std::vector<Eigen::VectorXd> columns;
  CorrelationMatrix corr;
  for (const auto& name : subset) {
    const auto index = matrix.FeatureIndex(name);
    if (!index) throw DataError("unknown feature '" + name + "'");
    columns.push_back(matrix.values.col(static_cast<Eigen::Index>(*index)));
    corr.names.push_back(name);
    const auto& column = columns.back();
    if (column.size() < 2 || column.maxCoeff() == column.minCoeff()) {
      throw DataError("undefined correlation: constant column '" + name + "'");
    }
  }
  const std::size_t p = subset.size();
  corr.r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                     static_cast<Eigen::Index>(p));
  ParallelFor(p, jobs, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const auto& a = columns[i];
      const auto& b = columns[j];
      const double r = Pearson(
          std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
          std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
      corr.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      corr.r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
    }
  });
  return corr;
}

void WriteCorrelationCsv(const CorrelationMatrix& corr,
                         const std::filesystem::path& path) {
  std::vector<csv::Row> rows;
  csv::Row header = {""};
  header.insert(header.end(), corr.names.begin(), corr.names.end());
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < corr.names.size(); ++i) {
    csv::Row row = {corr.names[i]};
    for (std::size_t j = 0; j < corr.names.size(); ++j) {
      row.push_back(io::FormatDouble(
          corr.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    rows.push_back(std::move(row));
  }
  csv::WriteFile(path, rows);
}

CorrelationMatrix ReadCorrelationCsv(const std::filesystem::path& path) {
  const auto rows = csv::ReadFile(path);
  if (rows.empty()) throw DataError("empty correlation file");
  CorrelationMatrix corr;
  corr.names.assign(std::next(rows.front().begin()), rows.front().end());
  const std::size_t p = corr.names.size();
  if (rows.size() != p + 1) {
    throw DataError("correlation file must be square");
  }
  corr.r.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != p + 1 || row[0] != corr.names[i]) {
      throw DataError("correlation row " + std::to_string(i + 1) +
                      " does not match the header");
    }
    for (std::size_t j = 0; j < p; ++j) {
      try {
        std::size_t used = 0;
        const double value = std::stod(row[j + 1], &used);
        if (used != row[j + 1].size()) throw std::invalid_argument("trailing");
        corr.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            value;
      } catch (const std::logic_error&) {
        throw DataError("unparseable correlation cell '" + row[j + 1] + "'");
      }
    }
  }
  corr.Validate();
  return corr;
}

AnovaResult AnovaOneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DataError("anova needs at least two groups");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& group : groups) {
    if (group.size() < 2) {
      throw DataError("anova groups need at least two values");
    }
    for (const double v : group) total += v;
    count += group.size();
  }
  const double grand_mean = total / static_cast<double>(count);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& group : groups) {
    double sum = 0.0;
    for (const double v : group) sum += v;
    const double mean = sum / static_cast<double>(group.size());
    ss_between += static_cast<double>(group.size()) * (mean - grand_mean) *
                  (mean - grand_mean);
    for (const double v : group) ss_within += (v - mean) * (v - mean);
  }

  AnovaResult result;
  result.df_between = static_cast<int>(groups.size()) - 1;
  result.df_within = static_cast<int>(count - groups.size());
  if (ss_within == 0.0) {
    if (ss_between == 0.0) return result;  // F = 0, p = 1
    result.f_stat = std::numeric_limits<double>::infinity();
    result.p_value = 0.0;
    return result;
  }
  result.f_stat = (ss_between / result.df_between) /
                  (ss_within / result.df_within);
  result.p_value = special::FDistributionUpperTail(
      result.f_stat, result.df_between, result.df_within);
  return result;
}

std::vector<CoefficientTest> LogisticWaldTests(
    const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
    const std::vector<std::string>& column_names) {
  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-8;
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols() + 1;
  if (labels.size() != n) throw DataError("label count mismatch");

  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  x.rightCols(p - 1) = design;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd information(p, p);

  bool converged = false;
  for (int iteration = 0; iteration < kMaxIterations; ++iteration) {
    const Eigen::VectorXd prob =
        (1.0 / (1.0 + (-(x * beta)).array().exp())).matrix();
    const Eigen::VectorXd weight = (prob.array() * (1.0 - prob.array())).matrix();
    information = x.transpose() * weight.asDiagonal() * x;
    const Eigen::VectorXd gradient = x.transpose() * (labels - prob);
    const Eigen::LDLT<Eigen::MatrixXd> solver(information);
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
      throw NumericError("complete separation: singular information matrix");
    }
    const Eigen::VectorXd step = solver.solve(gradient);
    if (!step.allFinite()) {
      throw NumericError("complete separation: non-finite Newton step");
    }
    beta += step;
    if (step.cwiseAbs().maxCoeff() < kTolerance) {
      converged = true;
      break;
    }
  }
  const Eigen::VectorXd prob =
      (1.0 / (1.0 + (-(x * beta)).array().exp())).matrix();
  const double worst_residual = (labels - prob).cwiseAbs().maxCoeff();
  if (!converged || worst_residual < 1e-6) {
    throw NumericError("complete separation: coefficients diverge");
  }
  const Eigen::VectorXd weight = (prob.array() * (1.0 - prob.array())).matrix();
  information = x.transpose() * weight.asDiagonal() * x;
  const Eigen::MatrixXd covariance =
      information.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  std::vector<CoefficientTest> tests;
  for (Eigen::Index j = 0; j < p; ++j) {
    CoefficientTest test;
    test.name = j == 0 ? "(intercept)"
                       : column_names.at(static_cast<std::size_t>(j - 1));
    test.estimate = beta[j];
    test.std_error = std::sqrt(covariance(j, j));
    test.z = test.estimate / test.std_error;
    test.p_value = special::TwoSidedNormalPValue(test.z);
    tests.push_back(std::move(test));
  }
  return tests;
}

std::vector<CoefficientTest> LogisticCoefficientPValues(
    const BiomarkerMatrix& matrix, std::span<const std::string> features,
    std::span<const std::string> covariates) {
  std::vector<std::string> names(features.begin(), features.end());
  names.insert(names.end(), covariates.begin(), covariates.end());
  if (names.empty()) throw ConfigError("no features to test");
  const BiomarkerMatrix sub = matrix.SelectFeatures(names);
  auto tests = LogisticWaldTests(sub.values, sub.LabelVector(), names);
  tests.erase(tests.begin());
  return tests;
}

}  // namespace brainet::stats
