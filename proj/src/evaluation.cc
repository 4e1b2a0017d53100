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

#include "brainet/evaluation.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "brainet/error.h"
#include "brainet/io.h"
#include "brainet/parallel.h"

namespace brainet::evaluation {
namespace {

struct MetricField {
  const char* name;
  double metrics::MetricReport::*field;
};

constexpr MetricField kMetricFields[] = {
    {"accuracy", &metrics::MetricReport::accuracy},
    {"precision", &metrics::MetricReport::precision},
    {"recall", &metrics::MetricReport::recall},
    {"micro_f1", &metrics::MetricReport::micro_f1},
    {"sensitivity", &metrics::MetricReport::sensitivity},
    {"specificity", &metrics::MetricReport::specificity},
    {"auc", &metrics::MetricReport::auc},
};

std::string Context(int iteration, models::ModelKind kind) {
  return "bootstrap iteration " + std::to_string(iteration) + ", model " +
         std::string(models::ModelKindName(kind));
}

nlohmann::ordered_json HyperparametersJson(const models::Hyperparameters& h) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, value] : h) out[name] = value;
  return out;
}

}  // namespace

BootstrapResult BootstrapRun(const BiomarkerMatrix& matrix,
                             std::span<const ModelSearch> searches,
                             const splits::SplitSpec& spec,
                             const BootstrapOptions& options) {
  spec.Validate();
  matrix.Validate();
  if (searches.empty()) throw ConfigError("no models to evaluate");
  const int iterations = spec.bootstrap_iterations;
  const std::size_t models_count = searches.size();

  BootstrapResult result;
  for (const auto& search : searches) result.kinds.push_back(search.kind);
  result.records.assign(models_count, std::vector<IterationRecord>(static_cast<std::size_t>(iterations)));
  result.attributions.assign(
      models_count, std::vector<attribution::AttributionMatrix>(static_cast<std::size_t>(iterations)));

  // Outer parallelism over iterations when there are enough of them,
  // otherwise inside grid search and attribution.
  const bool outer = iterations >= options.jobs;
  const int inner_jobs = outer ? 1 : options.jobs;

  std::vector<models::ModelConfig> hoisted(models_count);
  if (options.hoist_grid_search) {
    const auto split = splits::StratifiedSplit(matrix.labels, spec, 0);
    const BiomarkerMatrix train = matrix.SelectRows(split.train);
    for (std::size_t m = 0; m < models_count; ++m) {
      try {
        hoisted[m] = models::GridSearchCv(train, searches[m].kind, searches[m].grid,
                                          spec.folds, spec.IterationSeed(0), options.jobs)
                         .best;
      } catch (const Error& e) {
        RethrowWithContext(e, Context(0, searches[m].kind));
      }
    }
  }

  auto run_iteration = [&](std::size_t it_index) {
    const int it = static_cast<int>(it_index);
    const std::uint64_t seed = spec.IterationSeed(it);
    const auto split = splits::StratifiedSplit(matrix.labels, spec, it);
    const BiomarkerMatrix train = matrix.SelectRows(split.train);
    const BiomarkerMatrix test = matrix.SelectRows(split.test);
    for (std::size_t m = 0; m < models_count; ++m) {
      const ModelSearch& search = searches[m];
      try {
        models::ModelConfig config =
            options.hoist_grid_search
                ? hoisted[m]
                : models::GridSearchCv(train, search.kind, search.grid, spec.folds,
                                       seed, inner_jobs)
                      .best;
        config.seed = seed;
        const models::TrainedModel model = models::Train(train, config);
        const Eigen::VectorXd probs = model.PredictProba(test.values);
        IterationRecord& record = result.records[m][it_index];
        record.iteration = it;
        record.chosen = model.config;
        record.train_size = train.rows();
        record.test_size = test.rows();
        record.metrics = metrics::ComputeMetrics(
            test.labels, std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));
        if (options.explain) {
          const Eigen::MatrixXd background =
              attribution::SampleBackground(train.values, options.background_size, seed);
          attribution::ExplainOptions explain = options.explain_options;
          explain.seed = seed;
          explain.jobs = inner_jobs;
          result.attributions[m][it_index] =
              attribution::Explain(model, test.values, background, explain, it);
        }
      } catch (const Error& e) {
        RethrowWithContext(e, Context(it, search.kind));
      }
    }
  };
  ParallelFor(static_cast<std::size_t>(iterations), outer ? options.jobs : 1, run_iteration);
  if (!options.explain) result.attributions.clear();
  return result;
}

Spread Summarize(std::span<const double> values) {
  std::vector<double> sorted;
  for (const double v : values) {
    if (std::isfinite(v)) sorted.push_back(v);
  }
  Spread spread;
  spread.count = sorted.size();
  if (sorted.empty()) {
    spread.median = spread.q1 = spread.q3 = std::nan("");
    return spread;
  }
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  spread.median = quantile(0.5);
  spread.q1 = quantile(0.25);
  spread.q3 = quantile(0.75);
  return spread;
}

std::string MetricsCsv(const BootstrapResult& result) {
  std::ostringstream out;
  out << "iteration,model";
  for (const auto& field : kMetricFields) out << ',' << field.name;
  out << ",tp,fp,tn,fn,train_size,test_size\n";
  const std::size_t iterations = result.records.empty() ? 0 : result.records.front().size();
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t m = 0; m < result.kinds.size(); ++m) {
      const IterationRecord& r = result.records[m][it];
      out << r.iteration << ',' << models::ModelKindName(result.kinds[m]);
      for (const auto& field : kMetricFields) {
        out << ',' << io::FormatFixed(r.metrics.*field.field, 6);
      }
      const auto& c = r.metrics.confusion;
      out << ',' << c.true_positive << ',' << c.false_positive << ','
          << c.true_negative << ',' << c.false_negative << ',' << r.train_size
          << ',' << r.test_size << '\n';
    }
  }
  return out.str();
}

nlohmann::ordered_json SummaryJson(const BootstrapResult& result) {
  nlohmann::ordered_json doc;
  doc["iterations"] = result.records.empty() ? 0 : result.records.front().size();
  nlohmann::ordered_json models_json = nlohmann::ordered_json::object();
  for (std::size_t m = 0; m < result.kinds.size(); ++m) {
    nlohmann::ordered_json entry;
    for (const auto& field : kMetricFields) {
      std::vector<double> values;
      for (const auto& r : result.records[m]) values.push_back(r.metrics.*field.field);
      const Spread s = Summarize(values);
      nlohmann::ordered_json stat;
      auto number = [](double v) {
        return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
      };
      stat["median"] = number(s.median);
      stat["q1"] = number(s.q1);
      stat["q3"] = number(s.q3);
      stat["n"] = s.count;
      entry[field.name] = stat;
    }
    nlohmann::ordered_json chosen = nlohmann::ordered_json::array();
    for (const auto& r : result.records[m]) chosen.push_back(HyperparametersJson(r.chosen.hyperparameters));
    entry["chosen_hyperparameters"] = chosen;
    models_json[std::string(models::ModelKindName(result.kinds[m]))] = entry;
  }
  doc["models"] = models_json;
  doc["note"] = "binary micro_f1 equals accuracy";
  return doc;
}

void WriteMetricsCsv(const BootstrapResult& result,
                     const std::filesystem::path& path) {
  io::WriteText(path, MetricsCsv(result));
}

void WriteSummaryJson(const BootstrapResult& result,
                      const std::filesystem::path& path) {
  io::WriteJson(path, SummaryJson(result));
}

}  // namespace brainet::evaluation
