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

#ifndef BRAINET_STATS_H_
#define BRAINET_STATS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainet/biomarker_matrix.h"

namespace brainet::stats {

// Pearson correlation written in raw-sum form:
//   w = (sum xy - (1/n) sum x sum y) / sqrt(Var(x) Var(y)),
//   Var(x) = (1/n) [n sum x^2 - (sum x)^2].
// Both inputs are shifted by their first element before summing; the
// coefficient is shift invariant and this keeps the sums well conditioned.
// Throws DataError("undefined correlation") for constant input.
double Pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd r;

  // Symmetric, unit diagonal, entries in [-1, 1].
  void Validate() const;
};

CorrelationMatrix ComputeCorrelationMatrix(const BiomarkerMatrix& matrix,
                                           std::span<const std::string> subset,
                                           int jobs = 1);

// CSV with a header row and a leading name column.
void WriteCorrelationCsv(const CorrelationMatrix& corr,
                         const std::filesystem::path& path);
CorrelationMatrix ReadCorrelationCsv(const std::filesystem::path& path);

struct AnovaResult {
  double f_stat = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p_value = 1.0;
};

// One-way ANOVA. Groups with zero spread everywhere give F = 0, p = 1.
AnovaResult AnovaOneway(const std::vector<std::vector<double>>& groups);

struct CoefficientTest {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

// Unpenalized logistic fit by Newton iterations (tolerance 1e-8 on the
// coefficient step) with an intercept column prepended to `design`. Returns
// Wald tests for the intercept followed by each design column. Throws
// NumericError("complete separation") when the fit diverges or fits the
// labels perfectly.
std::vector<CoefficientTest> LogisticWaldTests(
    const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
    const std::vector<std::string>& column_names);

// Wald p-values for `features` in a logistic model of the labels that also
// includes `covariates` as regressors. Results cover features then
// covariates (intercept omitted).
std::vector<CoefficientTest> LogisticCoefficientPValues(
    const BiomarkerMatrix& matrix, std::span<const std::string> features,
    std::span<const std::string> covariates = {});

}  // namespace brainet::stats

#endif  // BRAINET_STATS_H_
