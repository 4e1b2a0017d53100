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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "brainet/error.h"
#include "brainet/graph.h"
#include "brainet/stats.h"
#include "gtest/gtest.h"

namespace brainet::pipeline {
namespace {

namespace fs = std::filesystem;

const fs::path kDemo = fs::path(BRAINET_SOURCE_DIR) / "data" / "demo";

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("brainet_pipeline_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// The bundled demo config with fewer iterations.
PipelineConfig QuickDemo(const fs::path& out) {
  PipelineConfig config = LoadConfig(kDemo / "config.json");
  config.bootstrap_iterations = 3;
  config.output_dir = out.string();
  return config;
}

TEST(ConfigTest, DefaultsAndUnknownKeys) {
  const PipelineConfig config = ConfigFromJson(nlohmann::ordered_json::object());
  EXPECT_EQ(config.alpha, 0.45);
  EXPECT_EQ(config.top_n, 30u);
  EXPECT_EQ(config.bootstrap_iterations, 20);
  EXPECT_EQ(config.model_kinds.size(), 3u);
  EXPECT_THROW(ConfigFromJson(nlohmann::ordered_json{{"graph", {{"alpah", 0.5}}}}), ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::ordered_json{{"extra", 1}}), ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::ordered_json{{"graph", {{"alpha", 1.5}}}}), ConfigError);
}

TEST(ConfigTest, JsonRoundTripAndDigest) {
  const PipelineConfig config = LoadConfig(kDemo / "config.json");
  const nlohmann::ordered_json doc = ConfigToJson(config);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(doc)), doc);
  PipelineConfig moved = config;
  moved.output_dir = "/elsewhere";
  EXPECT_EQ(ConfigDigest(moved), ConfigDigest(config));
  PipelineConfig changed = config;
  changed.alpha = 0.5;
  EXPECT_NE(ConfigDigest(changed), ConfigDigest(config));
}

TEST(PipelineTest, CompleteAndJobInvariant) {
  const fs::path root = Scratch("jobs");
  const RunResult serial = RunPipeline(QuickDemo(root / "serial"), 1);
  const RunResult parallel = RunPipeline(QuickDemo(root / "parallel"), 4);
  EXPECT_EQ(serial.manifest, parallel.manifest);
  for (const char* file :
       {"matrix.csv", "matrix.json", "mrmr.json", "metrics.csv", "summary.json", "importance_combined.csv",
        "importance_elastic_net_logistic.csv", "pool.json", "anova.json", "components.json",
        "degree_table.csv", "degree_distribution.csv", "diff.json", "manifest.json",
        "correlation/correlation_case.csv", "graphs/graph_control.graphml", "graphs/graph_case.dot",
        "graphs/graph_combined.json"}) {
    EXPECT_TRUE(fs::exists(root / "serial" / file)) << file;
  }
  EXPECT_FALSE(fs::exists(root / "serial" / "partial"));
  for (const auto& [file, digest] : serial.manifest["files"].items()) {
    EXPECT_EQ(Slurp(root / "serial" / file), Slurp(root / "parallel" / file)) << file;
  }
  const std::string report = RenderReport(root / "serial");
  EXPECT_NE(report.find("elastic_net_logistic"), std::string::npos);
  fs::remove_all(root);
}

TEST(PipelineTest, HighThresholdGivesEmptyGraphs) {
  const fs::path root = Scratch("alpha");
  PipelineConfig config = QuickDemo(root / "out");
  config.bootstrap_iterations = 1;
  config.alpha = 0.99;
  RunPipeline(config, 1);
  for (const char* group : {"combined", "case", "control"}) {
    const graph::BiomarkerGraph g =
        graph::ImportJson(root / "out" / "graphs" / (std::string("graph_") + group + ".json"));
    EXPECT_TRUE(g.edges.empty()) << group;
  }
  fs::remove_all(root);
}

TEST(PipelineTest, MissingInputIsAnIoError) {
  const fs::path root = Scratch("missing");
  PipelineConfig config = QuickDemo(root / "out");
  config.input_csv = (root / "absent.csv").string();
  try {
    RunPipeline(config, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo) << e.what();
  }
  fs::remove_all(root);
}

int RunCli(const std::string& args) {
  const std::string command = std::string(BRAINET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodes) {
  const fs::path root = Scratch("cli");
  const std::string config = (kDemo / "config.json").string();
  EXPECT_EQ(RunCli(""), 2);
  EXPECT_EQ(RunCli("frobnicate"), 2);
  EXPECT_EQ(RunCli("preprocess --schema x.json"), 2);
  EXPECT_EQ(RunCli("preprocess --input " + (root / "none.csv").string() + " --schema " +
                   (kDemo / "schema.json").string() + " --out " + root.string()),
            5);
  EXPECT_EQ(RunCli("synth --preset demo --out " + (root / "synth").string()), 0);
  EXPECT_EQ(Slurp(root / "synth" / "cohort.csv"), Slurp(kDemo / "cohort.csv"));
  EXPECT_EQ(RunCli("preprocess --input " + (kDemo / "cohort.csv").string() + " --schema " +
                   (kDemo / "schema.json").string() + " --out " + (root / "pre").string()),
            0);
  stats::CorrelationMatrix corr{{"A", "B"}, (Eigen::MatrixXd(2, 2) << 1, 0.6, 0.6, 1).finished()};
  stats::WriteCorrelationCsv(corr, root / "corr.csv");
  const std::string graph = "graph --correlation " + (root / "corr.csv").string() + " --out " + root.string();
  EXPECT_EQ(RunCli(graph + " --alpha 1.5"), 2);
  EXPECT_EQ(RunCli(graph + " --alpha 0.5 --format dot"), 0);
  EXPECT_NE(Slurp(root / "graph_combined.dot").find("weight=0.6000"), std::string::npos);
  EXPECT_EQ(RunCli("--config " + config + " --jobs 0 run"), 2);
  fs::remove_all(root);
}

}  // namespace
}  // namespace brainet::pipeline
