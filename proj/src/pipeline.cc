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

#include "brainet/pipeline.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "brainet/csv.h"
#include "brainet/error.h"
#include "brainet/feature_select.h"
#include "brainet/hash.h"
#include "brainet/ingest.h"
#include "brainet/io.h"
#include "brainet/stats.h"

namespace brainet::pipeline {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

void CheckKeys(const Json& object, std::initializer_list<const char*> allowed,
               const std::string& section) {
  if (!object.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : object.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* name) { return key == name; });
    if (!known) throw ConfigError("unknown config key '" + section + "." + key + "'");
  }
}

Json Section(const Json& doc, const char* name) {
  return doc.contains(name) ? doc.at(name) : Json::object();
}

std::string EstimatorName(attribution::Estimator e) {
  return e == attribution::Estimator::kExact ? "exact" : "sampled";
}

attribution::Estimator ParseEstimator(const std::string& name) {
  if (name == "exact") return attribution::Estimator::kExact;
  if (name == "sampled") return attribution::Estimator::kSampled;
  throw ConfigError("unknown estimator '" + name + "'");
}

template <typename F>
auto Stage(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    RethrowWithContext(e, "stage " + name);
  } catch (const fs::filesystem_error& e) {
    throw IoError("stage " + name + ": " + e.what());
  }
}

std::vector<std::string> GroupUsable(const BiomarkerMatrix& group,
                                     const std::vector<std::string>& pool,
                                     std::vector<std::string>& dropped) {
  std::vector<std::string> usable;
  for (const auto& name : pool) {
    const auto index = group.FeatureIndex(name);
    const auto column = group.values.col(static_cast<Eigen::Index>(*index));
    if (group.rows() >= 2 && column.maxCoeff() > column.minCoeff()) {
      usable.push_back(name);
    } else {
      dropped.push_back(name);
    }
  }
  return usable;
}

Json AnovaJson(const BiomarkerMatrix& matrix, const std::vector<std::string>& patterns) {
  Json out = Json::array();
  std::vector<std::regex> regexes;
  for (const auto& p : patterns) regexes.emplace_back(p, std::regex::ECMAScript);
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    const std::string& name = matrix.feature_names[j];
    if (!std::any_of(regexes.begin(), regexes.end(),
                     [&](const std::regex& re) { return std::regex_search(name, re); })) {
      continue;
    }
    std::vector<std::vector<double>> groups(2);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      groups[static_cast<std::size_t>(1 - matrix.labels[r])].push_back(
          matrix.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
    }
    const stats::AnovaResult result = stats::AnovaOneway(groups);
    Json entry;
    entry["feature"] = name;
    entry["f_stat"] = std::isfinite(result.f_stat) ? Json(result.f_stat) : Json("inf");
    entry["df_between"] = result.df_between;
    entry["df_within"] = result.df_within;
    entry["p_value"] = result.p_value;
    entry["significant_at_0.05"] = result.p_value < 0.05;
    out.push_back(entry);
  }
  return out;
}

void MovePartial(const fs::path& partial, const fs::path& out) {
  std::vector<fs::path> entries;
  for (const auto& entry : fs::directory_iterator(partial)) entries.push_back(entry.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& source : entries) {
    const fs::path target = out / source.filename();
    fs::remove_all(target);
    fs::rename(source, target);
  }
  fs::remove_all(partial);
}

}  // namespace

void PipelineConfig::Validate() const {
  if (input_csv.empty()) throw ConfigError("paths.input is required");
  if (schema.empty()) throw ConfigError("paths.schema is required");
  if (output_dir.empty()) throw ConfigError("paths.output is required");
  ValidateSettings();
}

void PipelineConfig::ValidateSettings() const {
  if (k_impute < 1) throw ConfigError("preprocess.k_impute must be positive");
  if (mrmr_bins < 2) throw ConfigError("select.bins must be at least 2");
  if (model_kinds.empty()) throw ConfigError("models.kinds must not be empty");
  if (top_n < 1) throw ConfigError("attribution.top_n must be positive");
  if (background_size < 1) throw ConfigError("attribution.background_size must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("graph.alpha must lie in (0, 1)");
  splits::SplitSpec spec{test_fraction, folds, bootstrap_iterations, base_seed};
  spec.Validate();
  for (const auto& pattern : exclusion_patterns) {
    try {
      std::regex re(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error&) {
      throw ConfigError("invalid exclusion pattern '" + pattern + "'");
    }
  }
}

models::HyperparameterGrid PipelineConfig::GridFor(models::ModelKind kind) const {
  const auto it = grids.find(kind);
  return it != grids.end() ? it->second : models::DefaultGrid(kind);
}

fs::path PipelineConfig::Resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

PipelineConfig ConfigFromJson(const Json& doc) {
  CheckKeys(doc, {"paths", "preprocess", "select", "models", "attribution", "graph",
                  "evaluation", "base_seed"},
            "config");
  PipelineConfig c;
  try {
    const Json paths = Section(doc, "paths");
    CheckKeys(paths, {"input", "schema", "output"}, "paths");
    c.input_csv = paths.value("input", c.input_csv);
    c.schema = paths.value("schema", c.schema);
    c.output_dir = paths.value("output", c.output_dir);

    const Json pre = Section(doc, "preprocess");
    CheckKeys(pre, {"k_impute"}, "preprocess");
    c.k_impute = pre.value("k_impute", c.k_impute);

    const Json select = Section(doc, "select");
    CheckKeys(select, {"mrmr_m", "bins"}, "select");
    c.mrmr_m = select.value("mrmr_m", c.mrmr_m);
    c.mrmr_bins = select.value("bins", c.mrmr_bins);

    const Json models_json = Section(doc, "models");
    CheckKeys(models_json, {"kinds", "grids", "hoist_grid_search"}, "models");
    if (models_json.contains("kinds")) {
      c.model_kinds.clear();
      for (const auto& k : models_json.at("kinds")) {
        c.model_kinds.push_back(models::ParseModelKind(k.get<std::string>()));
      }
    }
    if (models_json.contains("grids")) {
      for (const auto& [name, grid] : models_json.at("grids").items()) {
        c.grids[models::ParseModelKind(name)] = models::GridFromJson(grid);
      }
    }
    c.hoist_grid_search = models_json.value("hoist_grid_search", c.hoist_grid_search);

    const Json attr = Section(doc, "attribution");
    CheckKeys(attr, {"top_n", "exclusion_patterns", "background_size", "estimator", "n_coalitions"},
              "attribution");
    c.top_n = attr.value("top_n", c.top_n);
    c.exclusion_patterns = attr.value("exclusion_patterns", c.exclusion_patterns);
    c.background_size = attr.value("background_size", c.background_size);
    c.estimator = ParseEstimator(attr.value("estimator", EstimatorName(c.estimator)));
    c.n_coalitions = attr.value("n_coalitions", c.n_coalitions);

    const Json g = Section(doc, "graph");
    CheckKeys(g, {"alpha", "mode"}, "graph");
    c.alpha = g.value("alpha", c.alpha);
    c.mode = graph::ParseEdgeMode(g.value("mode", graph::EdgeModeName(c.mode)));

    const Json eval = Section(doc, "evaluation");
    CheckKeys(eval, {"B", "folds", "test_fraction"}, "evaluation");
    c.bootstrap_iterations = eval.value("B", c.bootstrap_iterations);
    c.folds = eval.value("folds", c.folds);
    c.test_fraction = eval.value("test_fraction", c.test_fraction);

    c.base_seed = doc.value("base_seed", c.base_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.ValidateSettings();
  return c;
}

Json ConfigToJson(const PipelineConfig& c) {
  Json doc;
  doc["paths"] = {{"input", c.input_csv}, {"schema", c.schema}, {"output", c.output_dir}};
  doc["preprocess"] = {{"k_impute", c.k_impute}};
  doc["select"] = {{"mrmr_m", c.mrmr_m}, {"bins", c.mrmr_bins}};
  Json kinds = Json::array();
  Json grids = Json::object();
  for (const auto kind : c.model_kinds) {
    kinds.push_back(std::string(models::ModelKindName(kind)));
    grids[std::string(models::ModelKindName(kind))] = models::GridToJson(c.GridFor(kind));
  }
  doc["models"] = {{"kinds", kinds}, {"grids", grids}, {"hoist_grid_search", c.hoist_grid_search}};
  doc["attribution"] = {{"top_n", c.top_n},
                        {"exclusion_patterns", c.exclusion_patterns},
                        {"background_size", c.background_size},
                        {"estimator", EstimatorName(c.estimator)},
                        {"n_coalitions", c.n_coalitions}};
  doc["graph"] = {{"alpha", c.alpha}, {"mode", graph::EdgeModeName(c.mode)}};
  doc["evaluation"] = {{"B", c.bootstrap_iterations}, {"folds", c.folds},
                       {"test_fraction", c.test_fraction}};
  doc["base_seed"] = c.base_seed;
  return doc;
}

PipelineConfig LoadConfig(const fs::path& path) {
  PipelineConfig config = ConfigFromJson(io::ReadJson(path));
  config.base_dir = path.parent_path();
  return config;
}

std::string ConfigDigest(const PipelineConfig& config) {
  Json doc = ConfigToJson(config);
  doc.erase("paths");
  doc["inputs"] = {{"cohort_sha256", Sha256File(config.Resolve(config.input_csv))},
                   {"schema_sha256", Sha256File(config.Resolve(config.schema))}};
  return Sha256Hex(doc.dump());
}

std::string ImportanceCsv(const attribution::ImportanceAggregate& aggregate) {
  std::vector<std::size_t> order(aggregate.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return aggregate.scores[a] > aggregate.scores[b];
  });
  std::ostringstream out;
  out << "rank,feature,score\n";
  for (std::size_t k = 0; k < order.size(); ++k) {
    out << k + 1 << ',' << csv::EscapeField(aggregate.feature_names[order[k]]) << ','
        << io::FormatDouble(aggregate.scores[order[k]]) << '\n';
  }
  return out.str();
}

Json PoolJson(const attribution::PoolSelection& pool,
              std::span<const models::ModelKind> kinds,
              const attribution::SelectionConfig& selection) {
  Json doc;
  doc["top_n"] = selection.top_n;
  doc["exclusion_patterns"] = selection.exclusion_patterns;
  Json entries = Json::array();
  for (std::size_t k = 0; k < pool.pool.size(); ++k) {
    entries.push_back({{"name", pool.pool[k]}, {"score", pool.pool_scores[k]}});
  }
  doc["pool"] = entries;
  Json per_model = Json::object();
  for (std::size_t m = 0; m < kinds.size() && m < pool.per_model_top.size(); ++m) {
    per_model[std::string(models::ModelKindName(kinds[m]))] = pool.per_model_top[m];
  }
  doc["per_model_top"] = per_model;
  doc["excluded"] = pool.excluded;
  return doc;
}

std::string DegreeTableCsv(const graph::DegreeTable& table) {
  std::ostringstream out;
  out << "biomarker,degree_case,degree_control,present_only_in_case\n";
  for (const auto& row : table.rows) {
    out << csv::EscapeField(row.name) << ',' << row.degree_case << ',' << row.degree_control
        << ',' << (row.present_only_in_case ? "True" : "False") << '\n';
  }
  return out.str();
}

std::string DegreeDistributionCsv(
    const std::vector<std::pair<std::string, graph::BiomarkerGraph>>& graphs) {
  std::ostringstream out;
  out << "group,degree,count\n";
  for (const auto& [name, g] : graphs) {
    for (const auto& [degree, count] : graph::DegreeDistribution(g)) {
      out << name << ',' << degree << ',' << count << '\n';
    }
  }
  return out.str();
}

Json DiffJson(const graph::GraphDiff& diff, const std::string& subject,
              const std::string& reference) {
  auto edges = [](const std::vector<graph::NamedEdge>& list) {
    Json out = Json::array();
    for (const auto& e : list) {
      out.push_back({{"a", e.a}, {"b", e.b}, {"w", std::stod(io::FormatFixed(e.weight, 4))}});
    }
    return out;
  };
  Json doc;
  doc["subject"] = subject;
  doc["reference"] = reference;
  doc["edges_gained"] = edges(diff.edges_gained);
  doc["edges_lost"] = edges(diff.edges_lost);
  Json deltas = Json::array();
  for (const auto& d : diff.weight_deltas) {
    deltas.push_back({{"a", d.a}, {"b", d.b}, {"delta", std::stod(io::FormatFixed(d.delta, 4))}});
  }
  doc["weight_deltas"] = deltas;
  doc["nodes_gained"] = diff.nodes_gained;
  doc["nodes_lost"] = diff.nodes_lost;
  return doc;
}

Json ComponentsJson(const graph::BiomarkerGraph& g) {
  const graph::ComponentSet set = graph::ConnectedComponents(g);
  Json components = Json::array();
  for (const auto& members : set.components) {
    std::vector<std::string> names;
    for (const std::size_t index : members) names.push_back(g.nodes[index]);
    std::sort(names.begin(), names.end());
    components.push_back(names);
  }
  return {{"sizes", set.sizes}, {"components", components}};
}

RunResult RunPipeline(const PipelineConfig& config, int jobs) {
  config.Validate();
  const fs::path out_dir = config.Resolve(config.output_dir);
  const fs::path partial = out_dir / "partial";
  Stage("setup", [&] {
    fs::remove_all(partial);
    fs::create_directories(partial);
  });

  const BiomarkerMatrix matrix = Stage("preprocess", [&] {
    const auto schema = ingest::LoadSchema(config.Resolve(config.schema));
    const auto table = ingest::ParseCsv(config.Resolve(config.input_csv), schema);
    BiomarkerMatrix m = ingest::Preprocess(table, config.k_impute);
    ingest::WriteMatrixSnapshot(m, partial / "matrix.csv", partial / "matrix.json");
    return m;
  });

  if (config.mrmr_m > 0) {
    Stage("select", [&] {
      feature_select::MrmrOptions options;
      options.bins = config.mrmr_bins;
      const auto result = feature_select::MrmrSelect(
          matrix, std::min(config.mrmr_m, matrix.cols()), options);
      Json doc;
      Json picks = Json::array();
      for (std::size_t k = 0; k < result.order.size(); ++k) {
        picks.push_back({{"feature", matrix.feature_names[result.order[k]]},
                         {"gain", result.gains[k]},
                         {"relevance", result.relevance[result.order[k]]}});
      }
      doc["bins"] = config.mrmr_bins;
      doc["selected"] = picks;
      io::WriteJson(partial / "mrmr.json", doc);
    });
  }

  const splits::SplitSpec spec{config.test_fraction, config.folds,
                               config.bootstrap_iterations, config.base_seed};
  const evaluation::BootstrapResult boot = Stage("evaluate", [&] {
    std::vector<evaluation::ModelSearch> searches;
    for (const auto kind : config.model_kinds) searches.push_back({kind, config.GridFor(kind)});
    evaluation::BootstrapOptions options;
    options.hoist_grid_search = config.hoist_grid_search;
    options.background_size = config.background_size;
    options.explain_options.estimator = config.estimator;
    options.explain_options.n_coalitions = config.n_coalitions;
    options.jobs = jobs;
    auto result = evaluation::BootstrapRun(matrix, searches, spec, options);
    evaluation::WriteMetricsCsv(result, partial / "metrics.csv");
    evaluation::WriteSummaryJson(result, partial / "summary.json");
    return result;
  });

  const attribution::SelectionConfig selection{config.top_n, config.exclusion_patterns};
  const attribution::PoolSelection pool = Stage("attribution", [&] {
    std::vector<attribution::ImportanceAggregate> per_model;
    std::vector<attribution::AttributionMatrix> all;
    for (std::size_t m = 0; m < boot.kinds.size(); ++m) {
      per_model.push_back(attribution::AggregateImportance(boot.attributions[m]));
      io::WriteText(partial / ("importance_" + std::string(models::ModelKindName(boot.kinds[m])) + ".csv"),
                    ImportanceCsv(per_model.back()));
      all.insert(all.end(), boot.attributions[m].begin(), boot.attributions[m].end());
    }
    io::WriteText(partial / "importance_combined.csv",
                  ImportanceCsv(attribution::AggregateImportance(all)));
    auto selected = attribution::SelectPool(per_model, selection);
    io::WriteJson(partial / "pool.json", PoolJson(selected, boot.kinds, selection));
    io::WriteJson(partial / "anova.json", AnovaJson(matrix, config.exclusion_patterns));
    return selected;
  });

  Stage("graph", [&] {
    const std::vector<std::pair<graph::GroupTag, BiomarkerMatrix>> groups = {
        {graph::GroupTag::kCombined, matrix},
        {graph::GroupTag::kCase, matrix.SelectGroup(1)},
        {graph::GroupTag::kControl, matrix.SelectGroup(0)}};
    std::vector<std::pair<std::string, graph::BiomarkerGraph>> graphs;
    Json components = Json::object();
    for (const auto& [tag, group] : groups) {
      const std::string name = graph::GroupTagName(tag);
      std::vector<std::string> dropped;
      const auto usable = GroupUsable(group, pool.pool, dropped);
      stats::CorrelationMatrix corr{{}, Eigen::MatrixXd(0, 0)};
      if (!usable.empty()) corr = stats::ComputeCorrelationMatrix(group, usable, jobs);
      stats::WriteCorrelationCsv(corr, partial / "correlation" / ("correlation_" + name + ".csv"));
      const auto g = graph::PruneIsolated(graph::BuildGraph(corr, config.alpha, config.mode, tag));
      for (const auto format : {graph::ExportFormat::kGraphMl, graph::ExportFormat::kDot,
                                graph::ExportFormat::kJson}) {
        graph::Export(g, format, partial / "graphs" / ("graph_" + name + "." + graph::ExportExtension(format)));
      }
      Json entry = ComponentsJson(g);
      entry["dropped_constant"] = dropped;
      components[name] = entry;
      graphs.emplace_back(name, g);
    }
    io::WriteJson(partial / "components.json", components);
    const auto& case_graph = graphs[1].second;
    const auto& control_graph = graphs[2].second;
    io::WriteText(partial / "degree_table.csv",
                  DegreeTableCsv(graph::BuildDegreeTable(case_graph, control_graph)));
    io::WriteText(partial / "degree_distribution.csv", DegreeDistributionCsv(graphs));
    io::WriteJson(partial / "diff.json",
                  DiffJson(graph::DiffGraphs(case_graph, control_graph), "case", "control"));
  });

  Json manifest = Stage("manifest", [&] {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(partial)) {
      if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), partial).generic_string());
    }
    std::sort(files.begin(), files.end());
    Json doc;
    doc["manifest_version"] = kManifestVersion;
    doc["config_sha256"] = ConfigDigest(config);
    doc["base_seed"] = config.base_seed;
    doc["inputs"] = {{fs::path(config.input_csv).filename().string(), Sha256File(config.Resolve(config.input_csv))},
                     {fs::path(config.schema).filename().string(), Sha256File(config.Resolve(config.schema))}};
    Json checksums = Json::object();
    for (const auto& file : files) checksums[file] = Sha256File(partial / file);
    doc["files"] = checksums;
    io::WriteJson(partial / "manifest.json", doc);
    MovePartial(partial, out_dir);
    return doc;
  });
  return {out_dir, manifest};
}

std::string RenderReport(const fs::path& dir) {
  const Json manifest = io::ReadJson(dir / "manifest.json");
  std::ostringstream out;
  out << "# Pipeline report\n\n";
  out << "- config sha256: `" << manifest.at("config_sha256").get<std::string>() << "`\n";
  out << "- base seed: " << manifest.at("base_seed").dump() << "\n";
  out << "- files: " << manifest.at("files").size() << "\n\n";

  if (fs::exists(dir / "summary.json")) {
    const Json summary = io::ReadJson(dir / "summary.json");
    out << "## Bootstrap metrics (median [Q1, Q3], " << summary.at("iterations").dump()
        << " iterations)\n\n";
    out << "| model | accuracy | sensitivity | specificity | auc |\n|---|---|---|---|---|\n";
    for (const auto& [kind, entry] : summary.at("models").items()) {
      out << "| " << kind;
      for (const char* metric : {"accuracy", "sensitivity", "specificity", "auc"}) {
        const Json& s = entry.at(metric);
        auto fmt = [](const Json& v) {
          return v.is_number() ? io::FormatFixed(v.get<double>(), 3) : std::string("n/a");
        };
        out << " | " << fmt(s.at("median")) << " [" << fmt(s.at("q1")) << ", " << fmt(s.at("q3")) << "]";
      }
      out << " |\n";
    }
    out << "\n";
  }
  if (fs::exists(dir / "pool.json")) {
    const Json pool = io::ReadJson(dir / "pool.json");
    out << "## Biomarker pool\n\n";
    for (const auto& entry : pool.at("pool")) {
      out << "- " << entry.at("name").get<std::string>() << " ("
          << io::FormatFixed(entry.at("score").get<double>(), 4) << ")\n";
    }
    if (!pool.at("excluded").empty()) {
      out << "\nExcluded: " << pool.at("excluded").size() << " feature(s)\n";
    }
    out << "\n";
  }
  if (fs::exists(dir / "components.json")) {
    const Json components = io::ReadJson(dir / "components.json");
    out << "## Graph components\n\n";
    for (const auto& [group, entry] : components.items()) {
      out << "- " << group << ": sizes " << entry.at("sizes").dump() << "\n";
    }
    out << "\n";
  }
  if (fs::exists(dir / "degree_table.csv")) {
    out << "## Degree table\n\n| biomarker | case | control | only in case |\n|---|---|---|---|\n";
    const auto rows = csv::ReadFile(dir / "degree_table.csv");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      out << "| " << rows[r][0] << " | " << rows[r][1] << " | " << rows[r][2] << " | " << rows[r][3] << " |\n";
    }
  }
  return out.str();
}

}  // namespace brainet::pipeline
