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

#include "brainet/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "brainet/csv.h"
#include "brainet/error.h"
#include "brainet/io.h"

namespace brainet {

std::optional<std::size_t> BiomarkerMatrix::FeatureIndex(
    const std::string& name) const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

void BiomarkerMatrix::Validate() const {
  if (feature_names.size() != cols()) {
    throw DataError("feature name count does not match matrix width");
  }
  if (labels.size() != rows()) {
    throw DataError("label count does not match matrix height");
  }
  if (cols() == 0) throw DataError("matrix has no features");
  if (!values.allFinite()) throw DataError("matrix contains non-finite values");
  for (const int label : labels) {
    if (label != 0 && label != 1) throw DataError("invalid label");
  }
}

BiomarkerMatrix BiomarkerMatrix::SelectRows(
    std::span<const std::size_t> rows) const {
  BiomarkerMatrix out;
  out.feature_names = feature_names;
  out.normalization = normalization;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) =
        values.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

BiomarkerMatrix BiomarkerMatrix::SelectFeatures(
    std::span<const std::string> names) const {
  BiomarkerMatrix out;
  out.labels = labels;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(names.size()));
  Normalization norm;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto index = FeatureIndex(names[j]);
    if (!index) throw DataError("unknown feature '" + names[j] + "'");
    out.feature_names.push_back(names[j]);
    out.values.col(static_cast<Eigen::Index>(j)) =
        values.col(static_cast<Eigen::Index>(*index));
    if (normalization) {
      norm.means.push_back(normalization->means[*index]);
      norm.stds.push_back(normalization->stds[*index]);
      norm.constant.push_back(normalization->constant[*index]);
    }
  }
  if (normalization) out.normalization = std::move(norm);
  return out;
}

BiomarkerMatrix BiomarkerMatrix::SelectGroup(int label) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) rows.push_back(i);
  }
  return SelectRows(rows);
}

Eigen::VectorXd BiomarkerMatrix::LabelVector() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = labels[i];
  }
  return y;
}

std::size_t BiomarkerMatrix::CountLabel(int label) const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), label));
}

namespace ingest {
namespace {

std::string Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return "";
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

std::optional<double> ParseNumber(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

ColumnKind ParseKind(const std::string& text) {
  if (text == "continuous") return ColumnKind::kContinuous;
  if (text == "categorical") return ColumnKind::kCategorical;
  if (text == "label") return ColumnKind::kLabel;
  if (text == "excluded") return ColumnKind::kExcluded;
  throw ConfigError("unknown column kind '" + text + "'");
}

bool IsNumericColumn(const ColumnSchema& column) {
  return column.kind == ColumnKind::kContinuous;
}

}  // namespace

std::string_view ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kContinuous:
      return "continuous";
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kLabel:
      return "label";
    case ColumnKind::kExcluded:
      return "excluded";
  }
  return "continuous";
}

std::size_t RawTable::LabelColumn() const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].kind == ColumnKind::kLabel) return j;
  }
  throw ConfigError("table has no label column");
}

std::size_t RawTable::CountMissing() const {
  std::size_t missing = 0;
  for (const auto& row : cells) {
    missing += static_cast<std::size_t>(
        std::count_if(row.begin(), row.end(), IsMissing));
  }
  return missing;
}

void ValidateSchema(const std::vector<ColumnSchema>& schema) {
  std::set<std::string> names;
  int labels = 0;
  for (const auto& column : schema) {
    if (column.name.empty()) throw ConfigError("schema column without name");
    if (!names.insert(column.name).second) {
      throw ConfigError("duplicate schema column '" + column.name + "'");
    }
    if (column.kind == ColumnKind::kLabel) ++labels;
    if (column.unit.has_value() != column.unit_scale_to_mg.has_value()) {
      throw ConfigError("unit and unit_scale_to_mg must be given together on '" +
                        column.name + "'");
    }
  }
  if (labels != 1) {
    throw ConfigError("schema must contain exactly one label column");
  }
}

std::vector<ColumnSchema> SchemaFromJson(const nlohmann::ordered_json& doc) {
  if (!doc.is_array()) throw ConfigError("schema must be a JSON array");
  std::vector<ColumnSchema> schema;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry.contains("kind")) {
      throw ConfigError("schema entries need 'name' and 'kind'");
    }
    ColumnSchema column;
    column.name = entry.at("name").get<std::string>();
    column.kind = ParseKind(entry.at("kind").get<std::string>());
    if (entry.contains("unit") && !entry.at("unit").is_null()) {
      column.unit = entry.at("unit").get<std::string>();
    }
    if (entry.contains("unit_scale_to_mg") &&
        !entry.at("unit_scale_to_mg").is_null()) {
      column.unit_scale_to_mg = entry.at("unit_scale_to_mg").get<double>();
    }
    schema.push_back(std::move(column));
  }
  ValidateSchema(schema);
  return schema;
}

nlohmann::ordered_json SchemaToJson(const std::vector<ColumnSchema>& schema) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& column : schema) {
    nlohmann::ordered_json entry;
    entry["name"] = column.name;
    entry["kind"] = std::string(ColumnKindName(column.kind));
    if (column.unit) entry["unit"] = *column.unit;
    if (column.unit_scale_to_mg) {
      entry["unit_scale_to_mg"] = *column.unit_scale_to_mg;
    }
    doc.push_back(std::move(entry));
  }
  return doc;
}

std::vector<ColumnSchema> LoadSchema(const std::filesystem::path& path) {
  return SchemaFromJson(io::ReadJson(path));
}

RawTable ParseCsvText(std::string_view text,
                      const std::vector<ColumnSchema>& schema,
                      const ParseOptions& options) {
  ValidateSchema(schema);
  const std::vector<csv::Row> records = csv::Parse(text);
  if (records.empty()) throw DataError("missing header row");

  const csv::Row& header = records.front();
  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!header_index.emplace(Trim(header[j]), j).second) {
      throw DataError("duplicate header '" + Trim(header[j]) + "'");
    }
  }
  bool matches = header_index.size() == schema.size();
  for (const auto& column : schema) {
    matches = matches && header_index.contains(column.name);
  }
  if (!matches) throw DataError("schema mismatch between header and schema");

  const std::set<std::string> missing_tokens(options.missing_tokens.begin(),
                                             options.missing_tokens.end());
  RawTable table;
  table.columns = schema;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const csv::Row& record = records[r];
    const std::string where = "row " + std::to_string(r);
    if (record.size() != header.size()) {
      throw DataError("malformed row width at " + where + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(record.size()));
    }
    std::vector<Cell> row;
    row.reserve(schema.size());
    for (const auto& column : schema) {
      const std::string raw = Trim(record[header_index.at(column.name)]);
      const bool missing = missing_tokens.contains(raw);
      switch (column.kind) {
        case ColumnKind::kLabel: {
          if (missing) throw DataError("missing label value at " + where);
          const auto value = ParseNumber(raw);
          if (!value || (*value != 0.0 && *value != 1.0)) {
            throw DataError("invalid label '" + raw + "' at " + where);
          }
          row.emplace_back(*value);
          break;
        }
        case ColumnKind::kContinuous: {
          if (missing) {
            row.emplace_back(std::monostate{});
            break;
          }
          const auto value = ParseNumber(raw);
          if (!value) {
            throw DataError("unparseable numeric cell '" + raw + "' at " +
                            where + ", column '" + column.name + "'");
          }
          row.emplace_back(*value);
          break;
        }
        case ColumnKind::kCategorical:
        case ColumnKind::kExcluded:
          if (missing) {
            row.emplace_back(std::monostate{});
          } else {
            row.emplace_back(raw);
          }
          break;
      }
    }
    table.cells.push_back(std::move(row));
    table.row_ids.push_back(std::to_string(r));
  }
  if (table.rows() == 0) throw DataError("table has no data rows");
  return table;
}

RawTable ParseCsv(const std::filesystem::path& path,
                  const std::vector<ColumnSchema>& schema,
                  const ParseOptions& options) {
  return ParseCsvText(io::ReadText(path), schema, options);
}

RawTable ConvertUnits(const RawTable& table) {
  RawTable out = table;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    ColumnSchema& column = out.columns[j];
    if (!column.unit && !column.unit_scale_to_mg) continue;
    if (!column.unit_scale_to_mg) {
      throw ConfigError("unit tag without scale factor on '" + column.name +
                        "'");
    }
    const double scale = *column.unit_scale_to_mg;
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw ConfigError("invalid scale on '" + column.name + "'");
    }
    if (column.kind != ColumnKind::kContinuous) {
      throw ConfigError("unit tag on non-continuous column '" + column.name +
                        "'");
    }
    for (auto& row : out.cells) {
      if (auto* value = std::get_if<double>(&row[j])) *value *= scale;
    }
    column.unit.reset();
    column.unit_scale_to_mg.reset();
  }
  return out;
}

RawTable DummyEncode(const RawTable& table) {
  RawTable out;
  out.row_ids = table.row_ids;
  out.cells.resize(table.rows());

  for (std::size_t j = 0; j < table.cols(); ++j) {
    const ColumnSchema& column = table.columns[j];
    if (column.kind != ColumnKind::kCategorical) {
      out.columns.push_back(column);
      for (std::size_t r = 0; r < table.rows(); ++r) {
        out.cells[r].push_back(table.cells[r][j]);
      }
      continue;
    }
    std::set<std::string> levels;
    for (const auto& row : table.cells) {
      if (const auto* level = std::get_if<std::string>(&row[j])) {
        levels.insert(*level);
      }
    }
    if (levels.size() < 2) {
      throw DataError("degenerate categorical column '" + column.name + "'");
    }
    // std::set iterates in lexicographic order; the first level is baseline.
    const std::vector<std::string> kept(std::next(levels.begin()),
                                        levels.end());
    for (const auto& level : kept) {
      ColumnSchema indicator;
      indicator.name = column.name + "_" + level;
      indicator.kind = ColumnKind::kContinuous;
      indicator.indicator = true;
      out.columns.push_back(std::move(indicator));
    }
    for (std::size_t r = 0; r < table.rows(); ++r) {
      const auto* level = std::get_if<std::string>(&table.cells[r][j]);
      for (const auto& candidate : kept) {
        if (level == nullptr) {
          out.cells[r].emplace_back(std::monostate{});
        } else {
          out.cells[r].emplace_back(*level == candidate ? 1.0 : 0.0);
        }
      }
    }
  }
  return out;
}

RawTable KnnImpute(const RawTable& table, std::size_t k) {
  if (k < 1) throw ConfigError("k must be at least 1");
  std::vector<std::size_t> numeric;
  for (std::size_t j = 0; j < table.cols(); ++j) {
    const ColumnSchema& column = table.columns[j];
    if (IsNumericColumn(column)) {
      numeric.push_back(j);
    } else if (column.kind == ColumnKind::kCategorical) {
      for (const auto& row : table.cells) {
        if (IsMissing(row[j])) {
          throw DataError("categorical column '" + column.name +
                          "' must be dummy-encoded before imputation");
        }
      }
    }
  }

  const std::size_t n = table.rows();
  // Observed-value lookup: NaN marks missing.
  std::vector<std::vector<double>> observed(
      n, std::vector<double>(numeric.size()));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < numeric.size(); ++c) {
      const Cell& cell = table.cells[r][numeric[c]];
      observed[r][c] = IsMissing(cell) ? std::nan("") : std::get<double>(cell);
    }
  }
  for (std::size_t c = 0; c < numeric.size(); ++c) {
    const bool any = std::any_of(observed.begin(), observed.end(),
                                 [&](const auto& row) {
                                   return !std::isnan(row[c]);
                                 });
    if (!any) {
      throw DataError("unimputable column '" +
                      table.columns[numeric[c]].name + "'");
    }
  }

  RawTable out = table;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::size_t> missing;
    for (std::size_t c = 0; c < numeric.size(); ++c) {
      if (std::isnan(observed[r][c])) missing.push_back(c);
    }
    if (missing.empty()) continue;

    // Mean squared difference to every other row over shared coordinates;
    // NaN when nothing is shared.
    std::vector<double> distance(n, std::nan(""));
    for (std::size_t other = 0; other < n; ++other) {
      if (other == r) continue;
      double sum = 0.0;
      std::size_t shared = 0;
      for (std::size_t c = 0; c < numeric.size(); ++c) {
        const double a = observed[r][c];
        const double b = observed[other][c];
        if (std::isnan(a) || std::isnan(b)) continue;
        sum += (a - b) * (a - b);
        ++shared;
      }
      if (shared > 0) distance[other] = sum / static_cast<double>(shared);
    }

    for (const std::size_t c : missing) {
      std::vector<std::size_t> donors;
      for (std::size_t other = 0; other < n; ++other) {
        if (other != r && !std::isnan(observed[other][c]) &&
            !std::isnan(distance[other])) {
          donors.push_back(other);
        }
      }
      if (donors.empty()) {
        throw DataError("isolated sample " + table.row_ids[r] +
                        ": no donor shares an observed feature");
      }
      std::stable_sort(donors.begin(), donors.end(),
                       [&](std::size_t a, std::size_t b) {
                         return distance[a] < distance[b];
                       });
      const std::size_t effective_k = std::min(k, donors.size());
      double sum = 0.0;
      for (std::size_t d = 0; d < effective_k; ++d) {
        sum += observed[donors[d]][c];
      }
      double value = sum / static_cast<double>(effective_k);
      if (table.columns[numeric[c]].indicator) value = value >= 0.5 ? 1.0 : 0.0;
      out.cells[r][numeric[c]] = value;
    }
  }
  return out;
}

namespace {

// Standardizes the columns of `values` in place.
Normalization StandardizeColumns(Eigen::MatrixXd& values) {
  Normalization norm;
  const double n = static_cast<double>(values.rows());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    auto column = values.col(j);
    const double mean = column.sum() / n;
    const double variance = (column.array() - mean).square().sum() / n;
    const double std_dev = std::sqrt(variance);
    const bool constant = column.maxCoeff() == column.minCoeff();
    norm.means.push_back(mean);
    norm.stds.push_back(constant ? 0.0 : std_dev);
    norm.constant.push_back(constant);
    if (constant) {
      column.setZero();
    } else {
      column = (column.array() - mean) / std_dev;
    }
  }
  return norm;
}

}  // namespace

BiomarkerMatrix ZscoreNormalize(const RawTable& table) {
  const std::size_t label_column = table.LabelColumn();
  std::vector<std::size_t> features;
  BiomarkerMatrix matrix;
  for (std::size_t j = 0; j < table.cols(); ++j) {
    const ColumnSchema& column = table.columns[j];
    if (column.kind == ColumnKind::kCategorical) {
      throw DataError("categorical column '" + column.name +
                      "' must be dummy-encoded before normalization");
    }
    if (column.kind == ColumnKind::kContinuous) {
      features.push_back(j);
      matrix.feature_names.push_back(column.name);
    }
  }
  if (features.empty()) throw DataError("table has no numeric features");

  matrix.values.resize(static_cast<Eigen::Index>(table.rows()),
                       static_cast<Eigen::Index>(features.size()));
  for (std::size_t r = 0; r < table.rows(); ++r) {
    matrix.labels.push_back(
        static_cast<int>(std::get<double>(table.cells[r][label_column])));
    for (std::size_t c = 0; c < features.size(); ++c) {
      const Cell& cell = table.cells[r][features[c]];
      if (IsMissing(cell)) {
        throw DataError("normalization needs a complete table; row " +
                        table.row_ids[r] + " is missing '" +
                        table.columns[features[c]].name + "'");
      }
      matrix.values(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(c)) = std::get<double>(cell);
    }
  }
  matrix.normalization = StandardizeColumns(matrix.values);
  matrix.Validate();
  return matrix;
}

BiomarkerMatrix ZscoreNormalize(const BiomarkerMatrix& matrix) {
  BiomarkerMatrix out = matrix;
  out.normalization = StandardizeColumns(out.values);
  out.Validate();
  return out;
}

BiomarkerMatrix Preprocess(const RawTable& table, std::size_t k_impute) {
  return ZscoreNormalize(KnnImpute(DummyEncode(ConvertUnits(table)), k_impute));
}

void WriteMatrixSnapshot(const BiomarkerMatrix& matrix,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path) {
  std::vector<csv::Row> rows;
  csv::Row header = matrix.feature_names;
  header.push_back("label");
  rows.push_back(std::move(header));
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    csv::Row row;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      row.push_back(io::FormatDouble(matrix.values(
          static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    }
    row.push_back(std::to_string(matrix.labels[r]));
    rows.push_back(std::move(row));
  }
  csv::WriteFile(csv_path, rows);

  nlohmann::ordered_json sidecar;
  sidecar["feature_names"] = matrix.feature_names;
  if (matrix.normalization) {
    sidecar["means"] = matrix.normalization->means;
    sidecar["stds"] = matrix.normalization->stds;
    sidecar["flags"] = nlohmann::ordered_json::array();
    for (const bool constant : matrix.normalization->constant) {
      sidecar["flags"].push_back(constant ? "constant" : "");
    }
  }
  io::WriteJson(json_path, sidecar);
}

BiomarkerMatrix ReadMatrixSnapshot(const std::filesystem::path& csv_path) {
  const std::vector<csv::Row> rows = csv::ReadFile(csv_path);
  if (rows.empty() || rows.front().empty() || rows.front().back() != "label") {
    throw DataError("matrix snapshot needs a header ending in 'label'");
  }
  BiomarkerMatrix matrix;
  matrix.feature_names.assign(rows.front().begin(),
                              std::prev(rows.front().end()));
  const std::size_t p = matrix.feature_names.size();
  matrix.values.resize(static_cast<Eigen::Index>(rows.size() - 1),
                       static_cast<Eigen::Index>(p));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != p + 1) {
      throw DataError("malformed row width in matrix snapshot");
    }
    for (std::size_t c = 0; c <= p; ++c) {
      const auto value = ParseNumber(Trim(rows[r][c]));
      if (!value) throw DataError("unparseable cell in matrix snapshot");
      if (c == p) {
        matrix.labels.push_back(static_cast<int>(*value));
      } else {
        matrix.values(static_cast<Eigen::Index>(r - 1),
                      static_cast<Eigen::Index>(c)) = *value;
      }
    }
  }
  std::filesystem::path sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  if (std::filesystem::exists(sidecar_path)) {
    const auto sidecar = io::ReadJson(sidecar_path);
    if (sidecar.contains("means")) {
      Normalization norm;
      norm.means = sidecar.at("means").get<std::vector<double>>();
      norm.stds = sidecar.at("stds").get<std::vector<double>>();
      for (const auto& flag : sidecar.at("flags")) {
        norm.constant.push_back(flag.get<std::string>() == "constant");
      }
      if (norm.means.size() == p) matrix.normalization = std::move(norm);
    }
  }
  matrix.Validate();
  return matrix;
}

}  // namespace ingest
}  // namespace brainet
