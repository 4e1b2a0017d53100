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

#ifndef BRAINET_BIOMARKER_MATRIX_H_
#define BRAINET_BIOMARKER_MATRIX_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace brainet {

// Per-column statistics recorded by z-score normalization.
struct Normalization {
  std::vector<double> means;
  std::vector<double> stds;  // population (divide by n)
  std::vector<bool> constant;
};

// Complete numeric samples-by-features table with binary labels
// (1 = case, 0 = control).
struct BiomarkerMatrix {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;
  std::vector<int> labels;
  std::optional<Normalization> normalization;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

  // Index of `name` in feature_names, or nullopt.
  std::optional<std::size_t> FeatureIndex(const std::string& name) const;

  // Throws DataError when shapes disagree, a value is non-finite or a label
  // is not 0/1.
  void Validate() const;

  BiomarkerMatrix SelectRows(std::span<const std::size_t> rows) const;
  BiomarkerMatrix SelectFeatures(std::span<const std::string> names) const;
  // Rows whose label equals `label`.
  BiomarkerMatrix SelectGroup(int label) const;

  Eigen::VectorXd LabelVector() const;
  std::size_t CountLabel(int label) const;
};

}  // namespace brainet

#endif  // BRAINET_BIOMARKER_MATRIX_H_
