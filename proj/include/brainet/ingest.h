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

#ifndef BRAINET_INGEST_H_
#define BRAINET_INGEST_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brainet/biomarker_matrix.h"
#include "json.hpp"

namespace brainet::ingest {

enum class ColumnKind { kContinuous, kCategorical, kLabel, kExcluded };

std::string_view ColumnKindName(ColumnKind kind);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  std::optional<std::string> unit;
  std::optional<double> unit_scale_to_mg;
  // Set on the 0/1 columns produced by DummyEncode. Imputed indicator values
  // are rounded back to {0, 1}.
  bool indicator = false;
};

// Empty = missing; double for continuous and label cells; string for
// categorical and excluded cells.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool IsMissing(const Cell& cell) {
  return std::holds_alternative<std::monostate>(cell);
}

struct RawTable {
  std::vector<ColumnSchema> columns;
  std::vector<std::vector<Cell>> cells;  // row-major, rows x columns
  std::vector<std::string> row_ids;

  std::size_t rows() const { return cells.size(); }
  std::size_t cols() const { return columns.size(); }
  std::size_t LabelColumn() const;
  std::size_t CountMissing() const;
};

struct ParseOptions {
  std::vector<std::string> missing_tokens = {"", "NA", "NaN", "null"};
};

// Schema documents are JSON arrays of {name, kind, unit?, unit_scale_to_mg?}.
std::vector<ColumnSchema> SchemaFromJson(const nlohmann::ordered_json& doc);
nlohmann::ordered_json SchemaToJson(const std::vector<ColumnSchema>& schema);
std::vector<ColumnSchema> LoadSchema(const std::filesystem::path& path);

// Throws ConfigError unless names are unique and exactly one column is the
// label.
void ValidateSchema(const std::vector<ColumnSchema>& schema);

// Columns come out in schema order regardless of the file's header order.
RawTable ParseCsvText(std::string_view text,
                      const std::vector<ColumnSchema>& schema,
                      const ParseOptions& options = {});
RawTable ParseCsv(const std::filesystem::path& path,
                  const std::vector<ColumnSchema>& schema,
                  const ParseOptions& options = {});

// Multiplies unit-tagged continuous columns by their mg scale factor and
// clears the tags.
RawTable ConvertUnits(const RawTable& table);

// Replaces each categorical column with L-1 indicator columns named
// "<column>_<level>"; the lexicographically smallest level is the baseline.
// A missing categorical cell becomes missing in every indicator.
RawTable DummyEncode(const RawTable& table);

// k-nearest-neighbour imputation over the continuous columns. Distance is
// the mean squared difference over coordinates observed in both rows, donor
// ties go to the lower row index and the fill value is the unweighted donor
// mean. Distances always use the original observed values.
RawTable KnnImpute(const RawTable& table, std::size_t k);

// Z-score normalization with population standard deviation. Constant columns
// become zeros and are flagged. Excluded columns are dropped; categorical
// columns must already be encoded.
BiomarkerMatrix ZscoreNormalize(const RawTable& table);
BiomarkerMatrix ZscoreNormalize(const BiomarkerMatrix& matrix);

// convert -> encode -> impute -> normalize.
BiomarkerMatrix Preprocess(const RawTable& table, std::size_t k_impute);

// Matrix snapshot: CSV with a trailing "label" column plus a JSON sidecar
// {feature_names, means, stds, flags}.
void WriteMatrixSnapshot(const BiomarkerMatrix& matrix,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path);
BiomarkerMatrix ReadMatrixSnapshot(const std::filesystem::path& csv_path);

}  // namespace brainet::ingest

#endif  // BRAINET_INGEST_H_
