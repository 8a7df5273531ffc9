#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gemini/ecs.hpp"

namespace gemini {

struct GraphNode {
  enum class Kind { component, processor };
  std::string label;
  Kind kind;
  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::string from;
  std::string to;
  auto operator<=>(const GraphEdge&) const = default;
};

/// Data flow between component instances (boxes) and processors (rounded).
/// Nodes and edges are kept sorted by label.
struct PipelineGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  const GraphNode* node(std::string_view label) const {
    for (const auto& n : nodes)
      if (n.label == label) return &n;
    return nullptr;
  }

  /// True when some directed cycle passes through `label`.
  bool on_cycle(std::string_view label) const {
    std::set<std::string> seen;
    std::vector<std::string> todo;
    for (const auto& e : edges)
      if (e.from == label) todo.push_back(e.to);
    while (!todo.empty()) {
      std::string cur = todo.back();
      todo.pop_back();
      if (cur == label) return true;
      if (!seen.insert(cur).second) continue;
      for (const auto& e : edges)
        if (e.from == cur) todo.push_back(e.to);
    }
    return false;
  }

  std::string to_dot() const {
    auto quote = [](const std::string& s) {
      std::string q = "\"";
      for (char c : s) {
        if (c == '"' || c == '\\') q += '\\';
        q += c;
      }
      return q + "\"";
    };
    std::string out = "digraph pipeline {\n";
    for (const auto& n : nodes) {
      out += "  " + quote(n.label) +
             (n.kind == GraphNode::Kind::component ? " [shape=box];\n" : " [shape=box, style=rounded];\n");
    }
    for (const auto& e : edges) out += "  " + quote(e.from) + " -> " + quote(e.to) + ";\n";
    out += "}\n";
    return out;
  }
};

inline std::string entity_label(const World& world, EntityId id) {
  if (auto name = world.name_of(id)) return *name;
  return "#" + to_string(id);
}

inline PipelineGraph emit_pipeline_graph(const World& world) {
  PipelineGraph g;
  // component type name -> labels of its instances
  std::map<std::string, std::vector<std::pair<EntityId, std::string>>> instances;
  for (EntityId e : world.entities()) {
    for (const Component* c : world.components(e)) {
      std::string label = entity_label(world, e) + "." + std::string(c->type_name());
      instances[std::string(c->type_name())].emplace_back(e, label);
      g.nodes.push_back({label, GraphNode::Kind::component});
    }
  }

  std::map<std::string, int> name_count;
  for (const auto& p : world.pipeline()) ++name_count[std::string(p->name())];
  std::map<std::string, int> seen;
  std::set<GraphEdge> edges;
  for (const auto& p : world.pipeline()) {
    std::string label(p->name());
    int k = ++seen[label];
    if (name_count[label] > 1) label += " (" + std::to_string(k) + ")";
    g.nodes.push_back({label, GraphNode::Kind::processor});
    for (const auto& type : p->reads())
      for (const auto& [e, inst] : instances[type])
        if (p->applies_to(e) || type == "Time") edges.insert({inst, label});
    for (const auto& type : p->writes())
      for (const auto& [e, inst] : instances[type])
        if (p->applies_to(e)) edges.insert({label, inst});
  }
  std::sort(g.nodes.begin(), g.nodes.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

}  // namespace gemini
