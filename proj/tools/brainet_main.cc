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

// Command-line driver: `brainet run --config cfg.json` executes the whole
// pipeline; the other subcommands expose single stages on files.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "brainet/attribution.h"
#include "brainet/csv.h"
#include "brainet/error.h"
#include "brainet/feature_select.h"
#include "brainet/graph.h"
#include "brainet/ingest.h"
#include "brainet/io.h"
#include "brainet/models.h"
#include "brainet/pipeline.h"
#include "brainet/stats.h"
#include "brainet/synth.h"

namespace {

namespace fs = std::filesystem;
using brainet::ConfigError;
using Json = nlohmann::ordered_json;

struct GlobalFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

brainet::pipeline::PipelineConfig BaseConfig(const GlobalFlags& flags) {
  if (flags.config.empty()) return {};
  return brainet::pipeline::LoadConfig(flags.config);
}

std::string RequireOut(const GlobalFlags& flags) {
  if (flags.out.empty()) throw ConfigError("--out is required");
  return flags.out;
}

void Log(const std::string& message) { std::cerr << "[brainet] " << message << "\n"; }

int RunCommand(const GlobalFlags& flags) {
  if (flags.config.empty()) throw ConfigError("run needs --config");
  auto config = brainet::pipeline::LoadConfig(flags.config);
  if (!flags.out.empty()) {
    config.output_dir = fs::absolute(flags.out).string();
  }
  if (flags.seed) config.base_seed = *flags.seed;
  const auto result = brainet::pipeline::RunPipeline(config, flags.jobs);
  Log("wrote " + result.output_dir.string());
  std::cout << result.manifest.at("config_sha256").get<std::string>() << "\n";
  return 0;
}

struct PreprocessArgs {
  std::string input;
  std::string schema;
  std::optional<std::size_t> k;
};

int PreprocessCommand(const GlobalFlags& flags, const PreprocessArgs& args) {
  const auto config = BaseConfig(flags);
  const fs::path out = RequireOut(flags);
  const auto schema = brainet::ingest::LoadSchema(args.schema);
  const auto table = brainet::ingest::ParseCsv(args.input, schema);
  const auto matrix = brainet::ingest::Preprocess(table, args.k.value_or(config.k_impute));
  brainet::ingest::WriteMatrixSnapshot(matrix, out / "matrix.csv", out / "matrix.json");
  Log("matrix " + std::to_string(matrix.rows()) + " x " + std::to_string(matrix.cols()));
  return 0;
}

struct SelectArgs {
  std::string matrix;
  std::size_t m = 10;
  std::optional<int> bins;
};

int SelectCommand(const GlobalFlags& flags, const SelectArgs& args) {
  const auto config = BaseConfig(flags);
  const auto matrix = brainet::ingest::ReadMatrixSnapshot(args.matrix);
  brainet::feature_select::MrmrOptions options;
  options.bins = args.bins.value_or(config.mrmr_bins);
  const auto result = brainet::feature_select::MrmrSelect(
      matrix, std::min(args.m, matrix.cols()), options);
  Json picks = Json::array();
  for (std::size_t k = 0; k < result.order.size(); ++k) {
    picks.push_back({{"feature", matrix.feature_names[result.order[k]]},
                     {"gain", result.gains[k]},
                     {"relevance", result.relevance[result.order[k]]}});
  }
  const Json doc = {{"bins", options.bins}, {"selected", picks}};
  if (flags.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    brainet::io::WriteJson(flags.out, doc);
  }
  return 0;
}

struct TrainArgs {
  std::string matrix;
  std::string kind;
  std::string grid;
  std::optional<int> folds;
};

int TrainCommand(const GlobalFlags& flags, const TrainArgs& args) {
  const auto config = BaseConfig(flags);
  const auto matrix = brainet::ingest::ReadMatrixSnapshot(args.matrix);
  const auto kind = brainet::models::ParseModelKind(args.kind);
  const auto grid = args.grid.empty() ? config.GridFor(kind)
                                      : brainet::models::GridFromJson(brainet::io::ReadJson(args.grid));
  const std::uint64_t seed = flags.seed.value_or(config.base_seed);
  const auto search = brainet::models::GridSearchCv(matrix, kind, grid, args.folds.value_or(config.folds),
                                                    seed, flags.jobs);
  auto chosen = search.best;
  chosen.seed = seed;
  const auto model = brainet::models::Train(matrix, chosen);
  brainet::models::SaveModel(model, RequireOut(flags));
  Log("trained " + args.kind);
  return 0;
}

struct ExplainArgs {
  std::string model;
  std::string rows;
  std::string background;
  std::optional<std::size_t> background_size;
  std::string estimator;
  std::optional<std::size_t> coalitions;
};

int ExplainCommand(const GlobalFlags& flags, const ExplainArgs& args) {
  const auto config = BaseConfig(flags);
  const auto model = brainet::models::LoadModel(args.model);
  const auto rows = brainet::ingest::ReadMatrixSnapshot(args.rows).SelectFeatures(model.feature_names);
  const auto background_source =
      args.background.empty() ? rows
                              : brainet::ingest::ReadMatrixSnapshot(args.background).SelectFeatures(model.feature_names);
  const std::uint64_t seed = flags.seed.value_or(config.base_seed);
  const auto background = brainet::attribution::SampleBackground(
      background_source.values, args.background_size.value_or(config.background_size), seed);
  brainet::attribution::ExplainOptions options;
  options.estimator = config.estimator;
  if (args.estimator == "exact") options.estimator = brainet::attribution::Estimator::kExact;
  if (args.estimator == "sampled") options.estimator = brainet::attribution::Estimator::kSampled;
  if (!args.estimator.empty() && args.estimator != "exact" && args.estimator != "sampled") {
    throw ConfigError("unknown estimator '" + args.estimator + "'");
  }
  options.n_coalitions = args.coalitions.value_or(config.n_coalitions);
  options.seed = seed;
  options.jobs = flags.jobs;
  const auto result = brainet::attribution::Explain(model, rows.values, background, options, 0);

  std::vector<brainet::csv::Row> table;
  brainet::csv::Row header = {"row"};
  header.insert(header.end(), result.feature_names.begin(), result.feature_names.end());
  header.push_back("base_value");
  header.push_back("prediction");
  table.push_back(header);
  for (Eigen::Index r = 0; r < result.values.rows(); ++r) {
    brainet::csv::Row row = {std::to_string(r)};
    for (Eigen::Index j = 0; j < result.values.cols(); ++j) {
      row.push_back(brainet::io::FormatDouble(result.values(r, j)));
    }
    row.push_back(brainet::io::FormatDouble(result.base_value));
    row.push_back(brainet::io::FormatDouble(result.predictions[r]));
    table.push_back(std::move(row));
  }
  brainet::csv::WriteFile(RequireOut(flags), table);
  return 0;
}

struct GraphArgs {
  std::string correlation;
  std::optional<double> alpha;
  std::string mode;
  std::string group = "combined";
  std::vector<std::string> formats = {"graphml", "dot", "json"};
  bool keep_isolated = false;
};

int GraphCommand(const GlobalFlags& flags, const GraphArgs& args) {
  const auto config = BaseConfig(flags);
  const auto corr = brainet::stats::ReadCorrelationCsv(args.correlation);
  const auto mode = args.mode.empty() ? config.mode : brainet::graph::ParseEdgeMode(args.mode);
  auto g = brainet::graph::BuildGraph(corr, args.alpha.value_or(config.alpha), mode,
                                      brainet::graph::ParseGroupTag(args.group));
  if (!args.keep_isolated) g = brainet::graph::PruneIsolated(g);
  const fs::path out = RequireOut(flags);
  for (const auto& name : args.formats) {
    const auto format = brainet::graph::ParseExportFormat(name);
    brainet::graph::Export(g, format, out / ("graph_" + args.group + "." + brainet::graph::ExportExtension(format)));
  }
  brainet::io::WriteJson(out / ("components_" + args.group + ".json"),
                         brainet::pipeline::ComponentsJson(g));
  Log(std::to_string(g.nodes.size()) + " nodes, " + std::to_string(g.edges.size()) + " edges");
  return 0;
}

struct CompareArgs {
  std::string case_graph;
  std::string control_graph;
};

int CompareCommand(const GlobalFlags& flags, const CompareArgs& args) {
  const auto case_graph = brainet::graph::ImportJson(args.case_graph);
  const auto control_graph = brainet::graph::ImportJson(args.control_graph);
  const std::string table = brainet::pipeline::DegreeTableCsv(
      brainet::graph::BuildDegreeTable(case_graph, control_graph));
  const Json diff = brainet::pipeline::DiffJson(
      brainet::graph::DiffGraphs(case_graph, control_graph), "case", "control");
  if (flags.out.empty()) {
    std::cout << table;
  } else {
    const fs::path out = flags.out;
    brainet::io::WriteText(out / "degree_table.csv", table);
    brainet::io::WriteJson(out / "diff.json", diff);
  }
  return 0;
}

struct SynthArgs {
  std::string preset;
  std::string spec;
  std::string write_config;
};

int SynthCommand(const GlobalFlags& flags, const SynthArgs& args) {
  if (args.preset.empty() == args.spec.empty()) {
    throw ConfigError("synth needs exactly one of --preset or --spec");
  }
  auto spec = args.spec.empty() ? brainet::synth::Preset(args.preset)
                                : brainet::synth::SynthSpecFromJson(brainet::io::ReadJson(args.spec));
  if (flags.seed) spec.seed = *flags.seed;
  const fs::path out = RequireOut(flags);
  const auto cohort = brainet::synth::GenerateCohort(spec);
  brainet::synth::WriteCohort(cohort, out);
  Log("cohort " + std::to_string(cohort.table.rows()) + " rows written to " + out.string());
  return 0;
}

int ReportCommand(const GlobalFlags& flags, const std::string& dir, const std::string& file) {
  const std::string source = dir.empty() ? RequireOut(flags) : dir;
  const std::string report = brainet::pipeline::RenderReport(source);
  if (file.empty()) {
    std::cout << report;
  } else {
    brainet::io::WriteText(file, report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biomarker attribution and correlation-network toolkit", "brainet"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "Pipeline configuration JSON");
  app.add_option("--out", flags.out, "Output directory or file");
  app.add_option("--seed", flags.seed, "Base seed (overrides the config)");
  app.add_option("--jobs", flags.jobs, "Worker threads")->envname("BRAINET_JOBS")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run the full pipeline from --config");

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "Parse, encode, impute and normalize a cohort");
  preprocess->add_option("--input", pre.input, "Cohort CSV")->required();
  preprocess->add_option("--schema", pre.schema, "Schema JSON")->required();
  preprocess->add_option("--k", pre.k, "Neighbours for imputation");

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "mRMR report over a matrix snapshot");
  select->add_option("--matrix", sel.matrix, "Matrix snapshot CSV")->required();
  select->add_option("--m", sel.m, "Number of features to pick");
  select->add_option("--bins", sel.bins, "Discretization bins");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Grid-search and fit one model");
  train->add_option("--matrix", tr.matrix, "Matrix snapshot CSV")->required();
  train->add_option("--model", tr.kind, "elastic_net_logistic | gradient_boosted_trees | shallow_mlp")->required();
  train->add_option("--grid", tr.grid, "Grid JSON {axis: [values]}");
  train->add_option("--folds", tr.folds, "Cross-validation folds");

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Shapley attributions for a saved model");
  explain->add_option("--model", ex.model, "Model JSON")->required();
  explain->add_option("--rows", ex.rows, "Matrix snapshot with rows to explain")->required();
  explain->add_option("--background", ex.background, "Matrix snapshot for the background set");
  explain->add_option("--background-size", ex.background_size, "Background rows");
  explain->add_option("--estimator", ex.estimator, "exact | sampled");
  explain->add_option("--coalitions", ex.coalitions, "Coalition budget for the sampled estimator");

  GraphArgs gr;
  auto* graph = app.add_subcommand("graph", "Threshold a correlation CSV into a graph");
  graph->add_option("--correlation", gr.correlation, "Correlation CSV")->required();
  graph->add_option("--alpha", gr.alpha, "Edge threshold");
  graph->add_option("--mode", gr.mode, "signed | absolute");
  graph->add_option("--group", gr.group, "combined | case | control");
  graph->add_option("--format", gr.formats, "graphml, dot, json");
  graph->add_flag("--keep-isolated", gr.keep_isolated, "Keep nodes without edges");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Degree table and diff of two graph JSON files");
  compare->add_option("case", cmp.case_graph, "Case graph JSON")->required();
  compare->add_option("control", cmp.control_graph, "Control graph JSON")->required();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("--preset", sy.preset, "demo | planted");
  synth->add_option("--spec", sy.spec, "Synth spec JSON");

  std::string report_dir;
  std::string report_file;
  auto* report = app.add_subcommand("report", "Markdown summary of an output directory");
  report->add_option("dir", report_dir, "Pipeline output directory");
  report->add_option("--file", report_file, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "brainet: " << e.what() << "\n";
    return static_cast<int>(brainet::ErrorCode::kConfig);
  }

  try {
    if (run->parsed()) return RunCommand(flags);
    if (preprocess->parsed()) return PreprocessCommand(flags, pre);
    if (select->parsed()) return SelectCommand(flags, sel);
    if (train->parsed()) return TrainCommand(flags, tr);
    if (explain->parsed()) return ExplainCommand(flags, ex);
    if (graph->parsed()) return GraphCommand(flags, gr);
    if (compare->parsed()) return CompareCommand(flags, cmp);
    if (synth->parsed()) return SynthCommand(flags, sy);
    if (report->parsed()) return ReportCommand(flags, report_dir, report_file);
  } catch (const brainet::Error& e) {
    std::cerr << "brainet: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "brainet: " << e.what() << "\n";
    return static_cast<int>(brainet::ErrorCode::kIo);
  }
  return 0;
}
