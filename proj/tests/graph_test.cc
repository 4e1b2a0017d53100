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

#include "brainet/graph.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "brainet/error.h"
#include "brainet/random.h"
#include "gtest/gtest.h"

namespace brainet::graph {
namespace {

stats::CorrelationMatrix Corr(std::vector<std::string> names, Eigen::MatrixXd r) {
  return stats::CorrelationMatrix{std::move(names), std::move(r)};
}

stats::CorrelationMatrix RandomCorr(Rng& rng, int p) {
  Eigen::MatrixXd x(40, p);
  for (int r = 0; r < 40; ++r) {
    const double shared = rng.Normal();
    for (int c = 0; c < p; ++c) x(r, c) = (c % 3 == 0 ? shared : 0.0) + rng.Normal();
  }
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  const Eigen::VectorXd d = cov.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = d.asDiagonal() * cov * d.asDiagonal();
  r.diagonal().setOnes();
  std::vector<std::string> names;
  for (int c = 0; c < p; ++c) names.push_back("v" + std::to_string(100 + c));
  return Corr(names, r);
}

// Builds a graph from name pairs; the node list is the sorted union.
BiomarkerGraph Named(const std::vector<std::pair<std::string, std::string>>& pairs,
                     std::vector<std::string> extra = {}) {
  std::set<std::string> names(extra.begin(), extra.end());
  for (const auto& [a, b] : pairs) {
    names.insert(a);
    names.insert(b);
  }
  BiomarkerGraph g;
  g.nodes.assign(names.begin(), names.end());
  auto index = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(g.nodes.begin(), g.nodes.end(), n) - g.nodes.begin());
  };
  for (const auto& [a, b] : pairs) {
    const std::size_t i = index(a);
    const std::size_t j = index(b);
    g.edges.push_back(Edge{std::min(i, j), std::max(i, j), 0.5});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& l, const Edge& r) { return std::tie(l.i, l.j) < std::tie(r.i, r.j); });
  return g;
}

std::vector<std::pair<std::string, std::string>> Star(const std::string& hub, const std::string& prefix,
                                                      int leaves) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int k = 0; k < leaves; ++k) pairs.emplace_back(hub, prefix + std::to_string(k));
  return pairs;
}

TEST(BuildGraphTest, HandCase) {
  const auto corr = Corr({"A", "B", "C"}, (Eigen::MatrixXd(3, 3) << 1, 0.5, 0.2,
                                           0.5, 1, 0.6,
                                           0.2, 0.6, 1).finished());
  const BiomarkerGraph g = BuildGraph(corr, 0.45);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0].i, 0u);
  EXPECT_EQ(g.edges[0].j, 1u);
  EXPECT_EQ(g.edges[1].i, 1u);
  EXPECT_EQ(g.edges[1].j, 2u);
  EXPECT_EQ(g.edges[1].weight, 0.6);
  const auto exact = Corr({"A", "B"}, (Eigen::MatrixXd(2, 2) << 1, 0.45, 0.45, 1).finished());
  EXPECT_EQ(BuildGraph(exact, 0.45).edges.size(), 1u);
}

TEST(BuildGraphTest, SignedAndAbsoluteModes) {
  const auto corr = Corr({"A", "B"}, (Eigen::MatrixXd(2, 2) << 1, -0.7, -0.7, 1).finished());
  EXPECT_TRUE(BuildGraph(corr, 0.45, EdgeMode::kSigned).edges.empty());
  const BiomarkerGraph g = BuildGraph(corr, 0.45, EdgeMode::kAbsolute);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].weight, -0.7);
}

TEST(BuildGraphTest, RejectsAlphaOutsideUnitInterval) {
  const auto corr = Corr({"A"}, Eigen::MatrixXd::Ones(1, 1));
  EXPECT_THROW(BuildGraph(corr, 0.0), ConfigError);
  EXPECT_THROW(BuildGraph(corr, 1.0), ConfigError);
  EXPECT_THROW(BuildGraph(corr, -0.2), ConfigError);
}

TEST(BuildGraphTest, EdgeSetShrinksWithAlpha) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto corr = RandomCorr(rng, 12);
    std::size_t previous = SIZE_MAX;
    std::set<std::pair<std::size_t, std::size_t>> previous_set;
    for (double alpha = 0.05; alpha < 0.99; alpha += 0.05) {
      const BiomarkerGraph g = BuildGraph(corr, alpha, EdgeMode::kAbsolute);
      std::set<std::pair<std::size_t, std::size_t>> current;
      for (const auto& e : g.edges) current.emplace(e.i, e.j);
      EXPECT_LE(g.edges.size(), previous);
      if (previous != SIZE_MAX) {
        EXPECT_TRUE(std::includes(previous_set.begin(), previous_set.end(), current.begin(), current.end()));
      }
      previous = g.edges.size();
      previous_set = std::move(current);
    }
  }
}

TEST(GraphInvariantsTest, DegreeSumAndBounds) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto corr = RandomCorr(rng, 15);
    const BiomarkerGraph g = BuildGraph(corr, 0.3, EdgeMode::kAbsolute);
    const auto degrees = g.Degrees();
    EXPECT_EQ(std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}), 2 * g.edges.size());
    for (const auto& e : g.edges) {
      EXPECT_LT(e.i, e.j);
      EXPECT_LE(std::abs(e.weight), 1.0);
      EXPECT_GE(std::abs(e.weight), 0.3);
    }
    EXPECT_NO_THROW(g.Validate());
  }
}

TEST(PruneTest, IdempotentAndPreservesEdges) {
  const BiomarkerGraph g = Named({{"A", "B"}, {"C", "D"}}, {"E", "F"});
  const BiomarkerGraph pruned = PruneIsolated(g);
  EXPECT_EQ(pruned.nodes, (std::vector<std::string>{"A", "B", "C", "D"}));
  EXPECT_EQ(pruned.edges.size(), 2u);
  const BiomarkerGraph twice = PruneIsolated(pruned);
  EXPECT_EQ(ToJson(twice), ToJson(pruned));
}

// Union-find reference for component sizes.
std::vector<std::size_t> OracleSizes(const BiomarkerGraph& g) {
  std::vector<std::size_t> parent(g.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : g.edges) parent[find(e.i)] = find(e.j);
  std::map<std::size_t, std::size_t> counts;
  const auto degrees = g.Degrees();
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    if (degrees[v] > 0) ++counts[find(v)];
  }
  std::vector<std::size_t> sizes;
  for (const auto& [root, size] : counts) sizes.push_back(size);
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

TEST(ComponentsTest, PathPlusPair) {
  const BiomarkerGraph g = Named({{"A", "B"}, {"B", "C"}, {"D", "E"}}, {"F"});
  const ComponentSet set = ConnectedComponents(g);
  EXPECT_EQ(set.sizes, (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(set.components[0], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(set.components[1], (std::vector<std::size_t>{3, 4}));
}

TEST(ComponentsTest, MatchesUnionFind) {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const auto corr = RandomCorr(rng, 14);
    const BiomarkerGraph g = BuildGraph(corr, 0.25 + 0.01 * t, EdgeMode::kAbsolute);
    const ComponentSet set = ConnectedComponents(g);
    EXPECT_EQ(set.sizes, OracleSizes(g));
    std::size_t covered = 0;
    for (const auto& c : set.components) covered += c.size();
    const auto degrees = g.Degrees();
    EXPECT_EQ(covered, static_cast<std::size_t>(
                           std::count_if(degrees.begin(), degrees.end(), [](std::size_t d) { return d > 0; })));
  }
}

TEST(DegreeTest, TriangleAndStar) {
  const BiomarkerGraph triangle = Named({{"A", "B"}, {"B", "C"}, {"A", "C"}});
  EXPECT_EQ(DegreeDistribution(triangle), (std::map<std::size_t, std::size_t>{{2, 3}}));
  const BiomarkerGraph star = Named(Star("H", "L", 4));
  EXPECT_EQ(DegreeDistribution(star), (std::map<std::size_t, std::size_t>{{1, 4}, {4, 1}}));
}

TEST(DegreeTableTest, CaseOnlyFlags) {
  auto case_pairs = Star("A", "X", 3);
  const auto shared = Star("B", "Y", 7);
  case_pairs.insert(case_pairs.end(), shared.begin(), shared.end());
  auto control_pairs = shared;
  const auto control_only = Star("C", "Z", 2);
  control_pairs.insert(control_pairs.end(), control_only.begin(), control_only.end());
  const BiomarkerGraph case_graph = Named(case_pairs, {"C"});
  const BiomarkerGraph control_graph = Named(control_pairs, {"A"});
  const DegreeTable table = BuildDegreeTable(case_graph, control_graph);
  auto row = [&](const std::string& name) {
    const auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                 [&](const DegreeRow& r) { return r.name == name; });
    EXPECT_NE(it, table.rows.end()) << name;
    return *it;
  };
  const DegreeRow a = row("A");
  EXPECT_EQ(a.degree_case, 3u);
  EXPECT_EQ(a.degree_control, 0u);
  EXPECT_TRUE(a.present_only_in_case);
  const DegreeRow b = row("B");
  EXPECT_EQ(b.degree_case, 7u);
  EXPECT_EQ(b.degree_control, 7u);
  EXPECT_FALSE(b.present_only_in_case);
  const DegreeRow c = row("C");
  EXPECT_EQ(c.degree_case, 0u);
  EXPECT_EQ(c.degree_control, 2u);
  EXPECT_FALSE(c.present_only_in_case);
  for (const auto& r : table.rows) {
    EXPECT_EQ(r.present_only_in_case, r.degree_case > 0 && r.degree_control == 0) << r.name;
    EXPECT_TRUE(r.degree_case > 0 || r.degree_control > 0);
  }
}

TEST(DegreeTableTest, MismatchedThresholdsRejected) {
  BiomarkerGraph a = Named({{"A", "B"}});
  BiomarkerGraph b = a;
  b.alpha = 0.5;
  EXPECT_THROW(BuildDegreeTable(a, b), ConfigError);
}

TEST(DiffTest, GainedLostAndSelf) {
  const BiomarkerGraph subject = Named({{"A", "B"}, {"B", "C"}});
  const BiomarkerGraph reference = Named({{"A", "B"}, {"C", "D"}});
  const GraphDiff diff = DiffGraphs(subject, reference);
  ASSERT_EQ(diff.edges_gained.size(), 1u);
  EXPECT_EQ(diff.edges_gained[0].a, "B");
  EXPECT_EQ(diff.edges_gained[0].b, "C");
  ASSERT_EQ(diff.edges_lost.size(), 1u);
  EXPECT_EQ(diff.edges_lost[0].a, "C");
  EXPECT_EQ(diff.edges_lost[0].b, "D");
  EXPECT_EQ(diff.nodes_lost, (std::vector<std::string>{"D"}));
  EXPECT_TRUE(diff.nodes_gained.empty());
  EXPECT_TRUE(DiffGraphs(subject, subject).Empty());
  const GraphDiff reverse = DiffGraphs(reference, subject);
  EXPECT_EQ(reverse.edges_gained[0].a, "C");
  EXPECT_EQ(reverse.edges_lost[0].b, "C");
}

TEST(DiffTest, WeightDeltas) {
  BiomarkerGraph subject = Named({{"A", "B"}});
  BiomarkerGraph reference = subject;
  subject.edges[0].weight = 0.8;
  reference.edges[0].weight = 0.5;
  const GraphDiff diff = DiffGraphs(subject, reference);
  ASSERT_EQ(diff.weight_deltas.size(), 1u);
  EXPECT_NEAR(diff.weight_deltas[0].delta, 0.3, 1e-12);
  EXPECT_FALSE(diff.Empty());
}

TEST(ExportTest, DotFixture) {
  const auto corr = Corr({"B", "A"}, (Eigen::MatrixXd(2, 2) << 1, 0.6, 0.6, 1).finished());
  const BiomarkerGraph g = BuildGraph(corr, 0.45, EdgeMode::kSigned, GroupTag::kCase);
  const std::string dot = ToDot(g);
  EXPECT_EQ(dot,
            "graph \"case\" {\n"
            "  \"A\";\n"
            "  \"B\";\n"
            "  \"A\" -- \"B\" [label=\"0.6000\", weight=0.6000];\n"
            "}\n");
}

TEST(ExportTest, JsonRoundTripIsByteIdentical) {
  Rng rng(14);
  for (int t = 0; t < 10; ++t) {
    const BiomarkerGraph g = BuildGraph(RandomCorr(rng, 9), 0.2, EdgeMode::kAbsolute, GroupTag::kControl);
    const std::string first = ToJson(g);
    const BiomarkerGraph back = FromJson(first);
    EXPECT_EQ(ToJson(back), first);
    EXPECT_EQ(back.group, GroupTag::kControl);
    EXPECT_EQ(back.mode, EdgeMode::kAbsolute);
    EXPECT_EQ(back.edges.size(), g.edges.size());
  }
}

TEST(ExportTest, GraphMlIsWellFormedAndFilesMatchRender) {
  const BiomarkerGraph g = Named({{"A", "B"}, {"B", "C"}});
  const std::string xml = ToGraphMl(g);
  EXPECT_NE(xml.find("<graphml"), std::string::npos);
  EXPECT_NE(xml.find("</graphml>"), std::string::npos);
  const auto dir = std::filesystem::temp_directory_path() / "brainet_graph_test";
  std::filesystem::create_directories(dir);
  for (const auto format : {ExportFormat::kGraphMl, ExportFormat::kDot, ExportFormat::kJson}) {
    const auto path = dir / ("g." + ExportExtension(format));
    Export(g, format, path);
    std::ifstream in(path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str(), Render(g, format));
  }
  EXPECT_EQ(ToJson(ImportJson(dir / ("g." + ExportExtension(ExportFormat::kJson)))), ToJson(g));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ParseExportFormat("png"), ConfigError);
}

}  // namespace
}  // namespace brainet::graph
