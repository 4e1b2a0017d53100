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

#ifndef BRAINET_GRAPH_H_
#define BRAINET_GRAPH_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "brainet/stats.h"

namespace brainet::graph {

enum class EdgeMode { kSigned, kAbsolute };
enum class GroupTag { kCombined, kCase, kControl };

std::string EdgeModeName(EdgeMode mode);
EdgeMode ParseEdgeMode(const std::string& name);
std::string GroupTagName(GroupTag tag);
GroupTag ParseGroupTag(const std::string& name);

struct Edge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double weight = 0.0;
};

struct BiomarkerGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;  // sorted by (i, j)
  double alpha = 0.45;
  EdgeMode mode = EdgeMode::kSigned;
  GroupTag group = GroupTag::kCombined;

  std::vector<std::size_t> Degrees() const;
  void Validate() const;
};

// Keeps w >= alpha (signed) or |w| >= alpha (absolute) for each pair i < j.
BiomarkerGraph BuildGraph(const stats::CorrelationMatrix& corr, double alpha,
                          EdgeMode mode = EdgeMode::kSigned,
                          GroupTag group = GroupTag::kCombined);

// Drops nodes without edges; edges are re-indexed, not changed.
BiomarkerGraph PruneIsolated(const BiomarkerGraph& g);

struct ComponentSet {
  std::vector<std::vector<std::size_t>> components;  // ascending node indices
  std::vector<std::size_t> sizes;                    // descending
};

// Components over nodes with at least one edge. Larger components first;
// equal sizes are ordered by their smallest member.
ComponentSet ConnectedComponents(const BiomarkerGraph& g);

struct DegreeRow {
  std::string name;
  std::size_t degree_case = 0;
  std::size_t degree_control = 0;
  bool present_only_in_case = false;
};

struct DegreeTable {
  std::vector<DegreeRow> rows;
};

// Union of node names, case-graph order first, then names seen only in the
// control graph. A node missing from a graph, or isolated in it, has degree
// zero there; names with degree zero in both graphs are left out.
DegreeTable BuildDegreeTable(const BiomarkerGraph& case_graph,
                             const BiomarkerGraph& control_graph);

// degree -> number of nodes with that degree.
std::map<std::size_t, std::size_t> DegreeDistribution(const BiomarkerGraph& g);

struct NamedEdge {
  std::string a;  // a < b lexicographically
  std::string b;
  double weight = 0.0;
};

struct WeightDelta {
  std::string a;
  std::string b;
  double delta = 0.0;  // subject weight minus reference weight
};

struct GraphDiff {
  std::vector<NamedEdge> edges_gained;  // in subject only
  std::vector<NamedEdge> edges_lost;    // in reference only
  std::vector<WeightDelta> weight_deltas;
  std::vector<std::string> nodes_gained;
  std::vector<std::string> nodes_lost;

  bool Empty() const;
};

// Compares `subject` against `reference` by node-name edge keys. Nodes count
// as present when they carry at least one edge.
GraphDiff DiffGraphs(const BiomarkerGraph& subject,
                     const BiomarkerGraph& reference);

enum class ExportFormat { kGraphMl, kDot, kJson };

ExportFormat ParseExportFormat(const std::string& name);
std::string ExportExtension(ExportFormat format);

// Deterministic text: nodes sorted by name, edges by (i, j) in that order,
// weights with four decimals.
std::string ToGraphMl(const BiomarkerGraph& g);
std::string ToDot(const BiomarkerGraph& g);
std::string ToJson(const BiomarkerGraph& g);
std::string Render(const BiomarkerGraph& g, ExportFormat format);
void Export(const BiomarkerGraph& g, ExportFormat format,
            const std::filesystem::path& path);

BiomarkerGraph FromJson(const std::string& text);
BiomarkerGraph ImportJson(const std::filesystem::path& path);

}  // namespace brainet::graph

#endif  // BRAINET_GRAPH_H_
