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

#ifndef BRAINET_SYNTH_H_
#define BRAINET_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "brainet/ingest.h"
#include "json.hpp"

namespace brainet::synth {

// Equicorrelated Gaussian block with its own correlation in each group.
struct BlockSpec {
  std::size_t member_count = 3;
  double rho_case = 0.0;
  double rho_control = 0.0;
};

// Group mean shift of +effect/2 (case) and -effect/2 (control) on a unit
// variance feature, so the log-odds of case given that feature alone is
// effect * x.
struct InformativeSpec {
  std::size_t feature = 0;  // index over block features, then noise features
  double effect = 0.0;
};

// An "Age" column that differs between groups and a "Confounded" feature
// driven by age only.
struct AgeConfoundSpec {
  double label_shift = 1.0;  // standardized age difference case - control
  double loading = 0.9;      // correlation of Confounded with age
};

struct SynthSpec {
  std::size_t n_per_group = 100;
  std::vector<BlockSpec> blocks;
  std::vector<InformativeSpec> informative;
  std::size_t noise_features = 0;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  std::optional<AgeConfoundSpec> age_confound;
  bool genotype = false;            // adds a categorical APOE column
  std::size_t microgram_columns = 0;  // leading noise features written in ug
  bool sample_ids = true;           // adds an excluded SampleId column

  void Validate() const;
  std::size_t FeatureCount() const;  // block plus noise features
};

SynthSpec SynthSpecFromJson(const nlohmann::ordered_json& doc);
nlohmann::ordered_json SynthSpecToJson(const SynthSpec& spec);

struct PlantedBlock {
  std::vector<std::string> members;
  double rho_case = 0.0;
  double rho_control = 0.0;
};

struct GroundTruth {
  std::vector<PlantedBlock> blocks;
  std::vector<std::string> informative;
  std::vector<double> effects;
  std::vector<std::string> noise;
  std::vector<std::string> confounders;
  std::string label_column = "Diagnosis";
  std::size_t n_per_group = 0;
};

nlohmann::ordered_json GroundTruthToJson(const GroundTruth& truth);

struct Cohort {
  ingest::RawTable table;
  GroundTruth truth;
};

inline const char* const kLabelColumn = "Diagnosis";

// Block members are named B<block>_<member> (1-based), noise features N<k>.
// Rows hold n_per_group cases followed by n_per_group controls. Throws
// ConfigError when a block correlation matrix is not positive definite.
Cohort GenerateCohort(const SynthSpec& spec);

// Writes cohort.csv, schema.json and truth.json into `dir`.
void WriteCohort(const Cohort& cohort, const std::filesystem::path& dir);

// Named presets: "demo" (the bundled cohort) and "planted" (three blocks of
// sizes 3, 3 and 11 plus a group-differential block).
SynthSpec Preset(const std::string& name);

}  // namespace brainet::synth

#endif  // BRAINET_SYNTH_H_
