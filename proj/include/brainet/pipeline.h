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

#ifndef BRAINET_PIPELINE_H_
#define BRAINET_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brainet/attribution.h"
#include "brainet/evaluation.h"
#include "brainet/graph.h"
#include "brainet/models.h"
#include "json.hpp"

namespace brainet::pipeline {

struct PipelineConfig {
  // Relative paths are resolved against `base_dir` (the config file's
  // directory when loaded from disk).
  std::filesystem::path base_dir;
  std::string input_csv;
  std::string schema;
  std::string output_dir = "out";

  std::size_t k_impute = 5;

  std::size_t mrmr_m = 0;  // 0 skips the mRMR report
  int mrmr_bins = 10;

  std::vector<models::ModelKind> model_kinds = {
      models::ModelKind::kElasticNetLogistic,
      models::ModelKind::kGradientBoostedTrees, models::ModelKind::kShallowMlp};
  std::map<models::ModelKind, models::HyperparameterGrid> grids;
  bool hoist_grid_search = false;

  std::size_t top_n = 30;
  std::vector<std::string> exclusion_patterns;
  std::size_t background_size = 100;
  attribution::Estimator estimator = attribution::Estimator::kSampled;
  std::size_t n_coalitions = 256;

  double alpha = 0.45;
  graph::EdgeMode mode = graph::EdgeMode::kSigned;

  int bootstrap_iterations = 20;
  int folds = 5;
  double test_fraction = 0.2;

  std::uint64_t base_seed = 0;

  void Validate() const;
  // Everything except the paths, which flags may still supply.
  void ValidateSettings() const;
  models::HyperparameterGrid GridFor(models::ModelKind kind) const;
  std::filesystem::path Resolve(const std::string& path) const;
};

// Missing keys take the defaults above; unknown keys are rejected.
PipelineConfig ConfigFromJson(const nlohmann::ordered_json& doc);
nlohmann::ordered_json ConfigToJson(const PipelineConfig& config);
PipelineConfig LoadConfig(const std::filesystem::path& path);

// Everything that determines the outputs: the config without paths and the
// input file digests. The manifest records its SHA-256.
std::string ConfigDigest(const PipelineConfig& config);

// Output helpers shared with the CLI subcommands.
std::string ImportanceCsv(const attribution::ImportanceAggregate& aggregate);
nlohmann::ordered_json PoolJson(const attribution::PoolSelection& pool,
                                std::span<const models::ModelKind> kinds,
                                const attribution::SelectionConfig& selection);
std::string DegreeTableCsv(const graph::DegreeTable& table);
std::string DegreeDistributionCsv(
    const std::vector<std::pair<std::string, graph::BiomarkerGraph>>& graphs);
nlohmann::ordered_json DiffJson(const graph::GraphDiff& diff,
                                const std::string& subject,
                                const std::string& reference);
nlohmann::ordered_json ComponentsJson(const graph::BiomarkerGraph& g);

struct RunResult {
  std::filesystem::path output_dir;
  nlohmann::ordered_json manifest;
};

// Runs preprocessing, the optional mRMR report, the bootstrap evaluation of
// every model kind, importance aggregation, pool selection and the per-group
// graph analysis. Files are written under <output>/partial and moved into
// <output> once every stage has succeeded; a failed run leaves the partial
// directory behind. Outputs do not depend on `jobs`.
RunResult RunPipeline(const PipelineConfig& config, int jobs);

// Markdown summary of a finished output directory.
std::string RenderReport(const std::filesystem::path& output_dir);

}  // namespace brainet::pipeline

#endif  // BRAINET_PIPELINE_H_
