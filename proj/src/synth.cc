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

#include "brainet/synth.h"

#include <cmath>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "brainet/csv.h"
#include "brainet/error.h"
#include "brainet/io.h"
#include "brainet/random.h"

namespace brainet::synth {
using ingest::Cell;
using ingest::ColumnKind;
using ingest::ColumnSchema;
using ingest::RawTable;

namespace {

constexpr const char* kGenotypes[] = {"e2e3", "e3e3", "e3e4", "e4e4"};
// Cumulative genotype frequencies; cases carry more e4 alleles.
constexpr double kControlGenotypeCdf[] = {0.15, 0.75, 0.97, 1.0};
constexpr double kCaseGenotypeCdf[] = {0.05, 0.45, 0.85, 1.0};

Eigen::MatrixXd BlockFactor(std::size_t m, double rho) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(
      static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m), rho);
  sigma.diagonal().setOnes();
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("block correlation " + io::FormatDouble(rho) +
                      " is not positive definite for " + std::to_string(m) +
                      " members");
  }
  return llt.matrixL();
}

std::string CellText(const Cell& cell) {
  if (const auto* v = std::get_if<double>(&cell)) return io::FormatDouble(*v);
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return "";
}

}  // namespace

std::size_t SynthSpec::FeatureCount() const {
  std::size_t count = noise_features;
  for (const auto& block : blocks) count += block.member_count;
  return count;
}

void SynthSpec::Validate() const {
  if (n_per_group < 2) throw ConfigError("n_per_group must be at least 2");
  for (const auto& block : blocks) {
    if (block.member_count < 1) throw ConfigError("empty correlation block");
    for (const double rho : {block.rho_case, block.rho_control}) {
      if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("block correlation outside (-1, 1)");
    }
  }
  for (const auto& item : informative) {
    if (item.feature >= FeatureCount()) throw ConfigError("informative feature index out of range");
    if (!std::isfinite(item.effect)) throw ConfigError("effect size must be finite");
  }
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("missing_rate must lie in [0, 1)");
  if (microgram_columns > noise_features) {
    throw ConfigError("microgram_columns exceeds noise_features");
  }
  if (FeatureCount() == 0 && !age_confound) throw ConfigError("cohort has no features");
  if (age_confound && !(std::fabs(age_confound->loading) < 1.0)) {
    throw ConfigError("age loading must lie in (-1, 1)");
  }
}

SynthSpec SynthSpecFromJson(const nlohmann::ordered_json& doc) {
  static const std::set<std::string> kKeys = {
      "n_per_group", "blocks", "informative", "noise_features", "missing_rate", "seed",
      "age_confound", "genotype", "microgram_columns", "sample_ids"};
  if (!doc.is_object()) throw ConfigError("synth spec must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown synth spec key '" + key + "'");
  }
  try {
    SynthSpec spec;
    spec.n_per_group = doc.value("n_per_group", spec.n_per_group);
    for (const auto& b : doc.value("blocks", nlohmann::ordered_json::array())) {
      spec.blocks.push_back({b.at("member_count").get<std::size_t>(),
                             b.at("rho_case").get<double>(),
                             b.at("rho_control").get<double>()});
    }
    for (const auto& i : doc.value("informative", nlohmann::ordered_json::array())) {
      spec.informative.push_back({i.at("feature").get<std::size_t>(), i.at("effect").get<double>()});
    }
    spec.noise_features = doc.value("noise_features", spec.noise_features);
    spec.missing_rate = doc.value("missing_rate", spec.missing_rate);
    spec.seed = doc.value("seed", spec.seed);
    if (doc.contains("age_confound") && !doc.at("age_confound").is_null()) {
      const auto& a = doc.at("age_confound");
      spec.age_confound = AgeConfoundSpec{a.value("label_shift", 1.0), a.value("loading", 0.9)};
    }
    spec.genotype = doc.value("genotype", spec.genotype);
    spec.microgram_columns = doc.value("microgram_columns", spec.microgram_columns);
    spec.sample_ids = doc.value("sample_ids", spec.sample_ids);
    spec.Validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synth spec: ") + e.what());
  }
}

nlohmann::ordered_json SynthSpecToJson(const SynthSpec& spec) {
  nlohmann::ordered_json doc;
  doc["n_per_group"] = spec.n_per_group;
  doc["blocks"] = nlohmann::ordered_json::array();
  for (const auto& b : spec.blocks) {
    doc["blocks"].push_back({{"member_count", b.member_count},
                             {"rho_case", b.rho_case},
                             {"rho_control", b.rho_control}});
  }
  doc["informative"] = nlohmann::ordered_json::array();
  for (const auto& i : spec.informative) {
    doc["informative"].push_back({{"feature", i.feature}, {"effect", i.effect}});
  }
  doc["noise_features"] = spec.noise_features;
  doc["missing_rate"] = spec.missing_rate;
  doc["seed"] = spec.seed;
  if (spec.age_confound) {
    doc["age_confound"] = {{"label_shift", spec.age_confound->label_shift},
                           {"loading", spec.age_confound->loading}};
  } else {
    doc["age_confound"] = nullptr;
  }
  doc["genotype"] = spec.genotype;
  doc["microgram_columns"] = spec.microgram_columns;
  doc["sample_ids"] = spec.sample_ids;
  return doc;
}

nlohmann::ordered_json GroundTruthToJson(const GroundTruth& truth) {
  nlohmann::ordered_json doc;
  doc["label_column"] = truth.label_column;
  doc["n_per_group"] = truth.n_per_group;
  doc["blocks"] = nlohmann::ordered_json::array();
  for (const auto& b : truth.blocks) {
    doc["blocks"].push_back({{"members", b.members},
                             {"rho_case", b.rho_case},
                             {"rho_control", b.rho_control}});
  }
  doc["informative"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < truth.informative.size(); ++k) {
    doc["informative"].push_back({{"name", truth.informative[k]}, {"effect", truth.effects[k]}});
  }
  doc["noise"] = truth.noise;
  doc["confounders"] = truth.confounders;
  return doc;
}

Cohort GenerateCohort(const SynthSpec& spec) {
  spec.Validate();
  const std::size_t n = spec.n_per_group;
  const std::size_t rows = 2 * n;
  const std::size_t p = spec.FeatureCount();
  Rng rng(spec.seed);

  Cohort cohort;
  GroundTruth& truth = cohort.truth;
  truth.n_per_group = n;
  std::vector<std::string> names;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    PlantedBlock planted{{}, spec.blocks[b].rho_case, spec.blocks[b].rho_control};
    for (std::size_t m = 0; m < spec.blocks[b].member_count; ++m) {
      names.push_back("B" + std::to_string(b + 1) + "_" + std::to_string(m + 1));
      planted.members.push_back(names.back());
    }
    truth.blocks.push_back(std::move(planted));
  }
  for (std::size_t k = 0; k < spec.noise_features; ++k) {
    names.push_back("N" + std::to_string(k + 1));
    truth.noise.push_back(names.back());
  }
  for (const auto& item : spec.informative) {
    truth.informative.push_back(names[item.feature]);
    truth.effects.push_back(item.effect);
  }

  // Rows 0..n-1 are cases, n..2n-1 controls.
  auto label_of = [n](std::size_t row) { return row < n ? 1 : 0; };
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  std::size_t column = 0;
  for (const auto& block : spec.blocks) {
    const std::size_t m = block.member_count;
    const Eigen::MatrixXd case_factor = BlockFactor(m, block.rho_case);
    const Eigen::MatrixXd control_factor = BlockFactor(m, block.rho_control);
    Eigen::VectorXd z(static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < rows; ++r) {
      for (auto& v : z) v = rng.Normal();
      const Eigen::VectorXd x = (label_of(r) == 1 ? case_factor : control_factor) * z;
      values.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column), 1,
                   static_cast<Eigen::Index>(m)) = x.transpose();
    }
    column += m;
  }
  for (std::size_t k = 0; k < spec.noise_features; ++k, ++column) {
    for (std::size_t r = 0; r < rows; ++r) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column)) = rng.Normal();
    }
  }
  for (const auto& item : spec.informative) {
    for (std::size_t r = 0; r < rows; ++r) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(item.feature)) +=
          (label_of(r) == 1 ? 0.5 : -0.5) * item.effect;
    }
  }

  // Table layout: [SampleId], Diagnosis, features, [Age, Confounded], [APOE].
  RawTable& table = cohort.table;
  if (spec.sample_ids) table.columns.push_back({"SampleId", ColumnKind::kExcluded, {}, {}, false});
  table.columns.push_back({kLabelColumn, ColumnKind::kLabel, {}, {}, false});
  const std::size_t first_feature = table.columns.size();
  for (std::size_t j = 0; j < p; ++j) {
    ColumnSchema schema{names[j], ColumnKind::kContinuous, {}, {}, false};
    if (j >= p - spec.noise_features && j - (p - spec.noise_features) < spec.microgram_columns) {
      schema.unit = "ug";
      schema.unit_scale_to_mg = 0.001;
    }
    table.columns.push_back(std::move(schema));
  }
  if (spec.age_confound) {
    table.columns.push_back({"Age", ColumnKind::kContinuous, {}, {}, false});
    table.columns.push_back({"Confounded", ColumnKind::kContinuous, {}, {}, false});
    truth.confounders = {"Age", "Confounded"};
  }
  if (spec.genotype) table.columns.push_back({"APOE", ColumnKind::kCategorical, {}, {}, false});

  table.cells.assign(rows, std::vector<Cell>(table.columns.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    auto& row = table.cells[r];
    std::size_t c = 0;
    if (spec.sample_ids) row[c++] = "S" + std::to_string(r + 1);
    row[c++] = static_cast<double>(label_of(r));
    for (std::size_t j = 0; j < p; ++j) {
      double v = values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      if (table.columns[first_feature + j].unit) v = 1000.0 * (2.0 + 0.5 * v);
      row[c++] = v;
    }
    if (spec.age_confound) {
      const double sign = label_of(r) == 1 ? 0.5 : -0.5;
      const double age_z = sign * spec.age_confound->label_shift + rng.Normal();
      const double loading = spec.age_confound->loading;
      row[c++] = 72.0 + 8.0 * age_z;
      row[c++] = loading * age_z + std::sqrt(1.0 - loading * loading) * rng.Normal();
    }
    if (spec.genotype) {
      const double* cdf = label_of(r) == 1 ? kCaseGenotypeCdf : kControlGenotypeCdf;
      const double u = rng.Uniform();
      std::size_t g = 0;
      while (g < 3 && u >= cdf[g]) ++g;
      row[c++] = std::string(kGenotypes[g]);
    }
    table.row_ids.push_back(std::to_string(r + 1));
  }

  // MCAR mask over feature cells; every row keeps at least one observed cell.
  if (spec.missing_rate > 0.0) {
    for (std::size_t r = 0; r < rows; ++r) {
      auto& row = table.cells[r];
      std::size_t observed = 0;
      std::vector<std::size_t> masked;
      for (std::size_t c = first_feature; c < table.columns.size(); ++c) {
        if (rng.Uniform() < spec.missing_rate) {
          masked.push_back(c);
        } else {
          ++observed;
        }
      }
      if (observed == 0 && !masked.empty()) masked.erase(masked.begin());
      for (const std::size_t c : masked) row[c] = std::monostate{};
    }
  }
  return cohort;
}

void WriteCohort(const Cohort& cohort, const std::filesystem::path& dir) {
  std::vector<csv::Row> rows;
  csv::Row header;
  for (const auto& column : cohort.table.columns) header.push_back(column.name);
  rows.push_back(std::move(header));
  for (const auto& cells : cohort.table.cells) {
    csv::Row row;
    for (const auto& cell : cells) row.push_back(CellText(cell));
    rows.push_back(std::move(row));
  }
  std::filesystem::create_directories(dir);
  csv::WriteFile(dir / "cohort.csv", rows);
  io::WriteJson(dir / "schema.json", ingest::SchemaToJson(cohort.table.columns));
  io::WriteJson(dir / "truth.json", GroundTruthToJson(cohort.truth));
}

SynthSpec Preset(const std::string& name) {
  SynthSpec spec;
  if (name == "demo") {
    spec.n_per_group = 60;
    spec.blocks = {{3, 0.8, 0.8}, {3, 0.8, 0.8}, {5, 0.8, 0.8}, {3, 0.8, 0.1}};
    spec.noise_features = 6;
    spec.informative = {{0, 1.5}, {6, 1.0}, {11, 0.8}, {12, 0.8}, {13, 0.8}, {14, 1.0}};
    spec.missing_rate = 0.02;
    spec.seed = 2024;
    spec.age_confound = AgeConfoundSpec{1.0, 0.9};
    spec.genotype = true;
    spec.microgram_columns = 2;
  } else if (name == "planted") {
    spec.n_per_group = 2000;
    spec.blocks = {{3, 0.7, 0.7}, {3, 0.7, 0.7}, {11, 0.7, 0.7}, {3, 0.7, 0.1}};
    spec.noise_features = 5;
    spec.seed = 7;
    spec.sample_ids = false;
  } else {
    throw ConfigError("unknown synth preset '" + name + "'");
  }
  spec.Validate();
  return spec;
}

}  // namespace brainet::synth
