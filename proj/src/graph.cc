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
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "brainet/error.h"
#include "brainet/io.h"
#include "json.hpp"

namespace brainet::graph {
namespace {

using EdgeKey = std::pair<std::string, std::string>;

EdgeKey KeyOf(const BiomarkerGraph& g, const Edge& e) {
  const std::string& a = g.nodes[e.i];
  const std::string& b = g.nodes[e.j];
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

void CheckCompatible(const BiomarkerGraph& a, const BiomarkerGraph& b) {
  if (a.alpha != b.alpha || a.mode != b.mode) {
    throw ConfigError("graphs differ in alpha or edge mode");
  }
}

void SortEdges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
}

// Same graph with nodes sorted by name.
BiomarkerGraph Canonical(const BiomarkerGraph& g) {
  std::vector<std::size_t> order(g.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.nodes[a] < g.nodes[b];
  });
  std::vector<std::size_t> position(g.nodes.size());
  BiomarkerGraph out = g;
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.nodes[k] = g.nodes[order[k]];
    position[order[k]] = k;
  }
  for (auto& e : out.edges) {
    std::size_t i = position[e.i];
    std::size_t j = position[e.j];
    if (i > j) std::swap(i, j);
    e.i = i;
    e.j = j;
  }
  SortEdges(out.edges);
  return out;
}

std::string XmlEscape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string DotQuote(const std::string& text) {
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string JsonString(const std::string& text) {
  return nlohmann::json(text).dump();
}

std::string Weight(double w) { return io::FormatFixed(w, 4); }

}  // namespace

std::string EdgeModeName(EdgeMode mode) {
  return mode == EdgeMode::kSigned ? "signed" : "absolute";
}

EdgeMode ParseEdgeMode(const std::string& name) {
  if (name == "signed") return EdgeMode::kSigned;
  if (name == "absolute") return EdgeMode::kAbsolute;
  throw ConfigError("unknown edge mode '" + name + "'");
}

std::string GroupTagName(GroupTag tag) {
  switch (tag) {
    case GroupTag::kCase: return "case";
    case GroupTag::kControl: return "control";
    default: return "combined";
  }
}

GroupTag ParseGroupTag(const std::string& name) {
  if (name == "combined") return GroupTag::kCombined;
  if (name == "case") return GroupTag::kCase;
  if (name == "control") return GroupTag::kControl;
  throw ConfigError("unknown group tag '" + name + "'");
}

std::vector<std::size_t> BiomarkerGraph::Degrees() const {
  std::vector<std::size_t> degree(nodes.size(), 0);
  for (const auto& e : edges) {
    ++degree[e.i];
    ++degree[e.j];
  }
  return degree;
}

void BiomarkerGraph::Validate() const {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.i >= e.j || e.j >= nodes.size()) {
      throw DataError("graph edge indices out of order or range");
    }
    if (!seen.emplace(e.i, e.j).second) throw DataError("duplicate graph edge");
    if (!std::isfinite(e.weight)) throw DataError("non-finite edge weight");
  }
}

BiomarkerGraph BuildGraph(const stats::CorrelationMatrix& corr, double alpha,
                          EdgeMode mode, GroupTag group) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  corr.Validate();
  BiomarkerGraph g;
  g.nodes = corr.names;
  g.alpha = alpha;
  g.mode = mode;
  g.group = group;
  const std::size_t p = corr.names.size();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const double w = corr.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double tested = mode == EdgeMode::kSigned ? w : std::fabs(w);
      if (tested >= alpha) g.edges.push_back({i, j, w});
    }
  }
  return g;
}

BiomarkerGraph PruneIsolated(const BiomarkerGraph& g) {
  const auto degree = g.Degrees();
  BiomarkerGraph out;
  out.alpha = g.alpha;
  out.mode = g.mode;
  out.group = g.group;
  std::vector<std::size_t> remap(g.nodes.size(), 0);
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    if (degree[k] == 0) continue;
    remap[k] = out.nodes.size();
    out.nodes.push_back(g.nodes[k]);
  }
  for (const auto& e : g.edges) out.edges.push_back({remap[e.i], remap[e.j], e.weight});
  SortEdges(out.edges);
  return out;
}

ComponentSet ConnectedComponents(const BiomarkerGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& e : g.edges) {
    adjacency[e.i].push_back(e.j);
    adjacency[e.j].push_back(e.i);
  }
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start] || adjacency[start].empty()) continue;
    std::vector<std::size_t> members;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const std::size_t node = frontier.front();
      frontier.pop();
      members.push_back(node);
      for (const std::size_t next : adjacency[node]) {
        if (!seen[next]) {
          seen[next] = true;
          frontier.push(next);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a.front() < b.front();
                   });
  ComponentSet set;
  for (auto& c : components) {
    set.sizes.push_back(c.size());
    set.components.push_back(std::move(c));
  }
  return set;
}

DegreeTable BuildDegreeTable(const BiomarkerGraph& case_graph,
                             const BiomarkerGraph& control_graph) {
  CheckCompatible(case_graph, control_graph);
  std::vector<std::string> names;
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> degrees;
  const auto case_degree = case_graph.Degrees();
  for (std::size_t k = 0; k < case_graph.nodes.size(); ++k) {
    if (degrees.emplace(case_graph.nodes[k], std::pair{case_degree[k], std::size_t{0}}).second) {
      names.push_back(case_graph.nodes[k]);
    }
  }
  const auto control_degree = control_graph.Degrees();
  for (std::size_t k = 0; k < control_graph.nodes.size(); ++k) {
    auto [it, inserted] = degrees.emplace(control_graph.nodes[k], std::pair{std::size_t{0}, std::size_t{0}});
    if (inserted) names.push_back(control_graph.nodes[k]);
    it->second.second = control_degree[k];
  }
  DegreeTable table;
  for (const auto& name : names) {
    const auto [dc, dn] = degrees.at(name);
    if (dc == 0 && dn == 0) continue;
    table.rows.push_back({name, dc, dn, dc > 0 && dn == 0});
  }
  return table;
}

std::map<std::size_t, std::size_t> DegreeDistribution(const BiomarkerGraph& g) {
  std::map<std::size_t, std::size_t> histogram;
  for (const std::size_t d : g.Degrees()) ++histogram[d];
  return histogram;
}

bool GraphDiff::Empty() const {
  return edges_gained.empty() && edges_lost.empty() && nodes_gained.empty() &&
         nodes_lost.empty() &&
         std::all_of(weight_deltas.begin(), weight_deltas.end(),
                     [](const WeightDelta& d) { return d.delta == 0.0; });
}

GraphDiff DiffGraphs(const BiomarkerGraph& subject,
                     const BiomarkerGraph& reference) {
  CheckCompatible(subject, reference);
  std::map<EdgeKey, double> s_edges;
  std::map<EdgeKey, double> r_edges;
  for (const auto& e : subject.edges) s_edges[KeyOf(subject, e)] = e.weight;
  for (const auto& e : reference.edges) r_edges[KeyOf(reference, e)] = e.weight;

  GraphDiff diff;
  for (const auto& [key, w] : s_edges) {
    auto it = r_edges.find(key);
    if (it == r_edges.end()) {
      diff.edges_gained.push_back({key.first, key.second, w});
    } else {
      diff.weight_deltas.push_back({key.first, key.second, w - it->second});
    }
  }
  for (const auto& [key, w] : r_edges) {
    if (!s_edges.count(key)) diff.edges_lost.push_back({key.first, key.second, w});
  }

  auto present = [](const BiomarkerGraph& g) {
    std::set<std::string> names;
    const auto degree = g.Degrees();
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      if (degree[k] > 0) names.insert(g.nodes[k]);
    }
    return names;
  };
  const auto s_nodes = present(subject);
  const auto r_nodes = present(reference);
  std::set_difference(s_nodes.begin(), s_nodes.end(), r_nodes.begin(), r_nodes.end(),
                      std::back_inserter(diff.nodes_gained));
  std::set_difference(r_nodes.begin(), r_nodes.end(), s_nodes.begin(), s_nodes.end(),
                      std::back_inserter(diff.nodes_lost));
  return diff;
}

ExportFormat ParseExportFormat(const std::string& name) {
  if (name == "graphml") return ExportFormat::kGraphMl;
  if (name == "dot") return ExportFormat::kDot;
  if (name == "json") return ExportFormat::kJson;
  throw ConfigError("unknown export format '" + name + "'");
}

std::string ExportExtension(ExportFormat format) {
  switch (format) {
    case ExportFormat::kGraphMl: return "graphml";
    case ExportFormat::kDot: return "dot";
    default: return "json";
  }
}

std::string ToGraphMl(const BiomarkerGraph& graph) {
  const BiomarkerGraph g = Canonical(graph);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"" << GroupTagName(g.group) << "\" edgedefault=\"undirected\">\n";
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    out << "    <node id=\"" << XmlEscape(g.nodes[k]) << "\"/>\n";
  }
  for (const auto& e : g.edges) {
    out << "    <edge source=\"" << XmlEscape(g.nodes[e.i]) << "\" target=\""
        << XmlEscape(g.nodes[e.j]) << "\">\n"
        << "      <data key=\"weight\">" << Weight(e.weight) << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string ToDot(const BiomarkerGraph& graph) {
  const BiomarkerGraph g = Canonical(graph);
  std::ostringstream out;
  out << "graph " << DotQuote(GroupTagName(g.group)) << " {\n";
  for (const auto& name : g.nodes) out << "  " << DotQuote(name) << ";\n";
  for (const auto& e : g.edges) {
    const std::string w = Weight(e.weight);
    out << "  " << DotQuote(g.nodes[e.i]) << " -- " << DotQuote(g.nodes[e.j])
        << " [label=\"" << w << "\", weight=" << w << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string ToJson(const BiomarkerGraph& graph) {
  const BiomarkerGraph g = Canonical(graph);
  std::ostringstream out;
  out << "{\n  \"nodes\": [";
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    out << (k ? ", " : "") << JsonString(g.nodes[k]);
  }
  out << "],\n  \"edges\": [";
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    out << (k ? "," : "") << "\n    {\"a\": " << JsonString(g.nodes[e.i])
        << ", \"b\": " << JsonString(g.nodes[e.j]) << ", \"w\": " << Weight(e.weight) << "}";
  }
  out << (g.edges.empty() ? "" : "\n  ") << "],\n"
      << "  \"alpha\": " << io::FormatDouble(g.alpha) << ",\n"
      << "  \"mode\": " << JsonString(EdgeModeName(g.mode)) << ",\n"
      << "  \"group\": " << JsonString(GroupTagName(g.group)) << "\n}\n";
  return out.str();
}

std::string Render(const BiomarkerGraph& g, ExportFormat format) {
  switch (format) {
    case ExportFormat::kGraphMl: return ToGraphMl(g);
    case ExportFormat::kDot: return ToDot(g);
    default: return ToJson(g);
  }
}

void Export(const BiomarkerGraph& g, ExportFormat format,
            const std::filesystem::path& path) {
  io::WriteText(path, Render(g, format));
}

BiomarkerGraph FromJson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid graph JSON: ") + e.what());
  }
  try {
    BiomarkerGraph g;
    g.nodes = doc.at("nodes").get<std::vector<std::string>>();
    g.alpha = doc.at("alpha").get<double>();
    g.mode = ParseEdgeMode(doc.at("mode").get<std::string>());
    g.group = ParseGroupTag(doc.at("group").get<std::string>());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      if (!index.emplace(g.nodes[k], k).second) throw DataError("duplicate graph node");
    }
    for (const auto& item : doc.at("edges")) {
      const auto a = index.find(item.at("a").get<std::string>());
      const auto b = index.find(item.at("b").get<std::string>());
      if (a == index.end() || b == index.end()) throw DataError("edge references unknown node");
      std::size_t i = a->second;
      std::size_t j = b->second;
      if (i == j) throw DataError("self-loop in graph JSON");
      if (i > j) std::swap(i, j);
      g.edges.push_back({i, j, item.at("w").get<double>()});
    }
    SortEdges(g.edges);
    g.Validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph JSON: ") + e.what());
  }
}

BiomarkerGraph ImportJson(const std::filesystem::path& path) {
  return FromJson(io::ReadText(path));
}

}  // namespace brainet::graph
