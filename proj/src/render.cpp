#include "ephs/render.hpp"

#include <sstream>

namespace ephs {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

const char* fill_color(ComponentKind k) {
  switch (k) {
    case ComponentKind::storage: return "#4a7fd4";
    case ComponentKind::dirac: return "#3fa34d";
    case ComponentKind::resistive: return "#d64541";
    case ComponentKind::environment: return "#9e9e9e";
    case ComponentKind::composite: return "#ffffff";
  }
  return "#ffffff";
}

}  // namespace

FillerKinds filler_kinds(const Component& c) {
  FillerKinds out;
  if (const auto* comp = std::get_if<CompositeComponent>(&c.body)) {
    for (const auto& [label, filler] : comp->fillers) out[label] = filler->kind();
  }
  return out;
}

std::string to_dot(const Diagram& d, const std::optional<FillerKinds>& kinds, const std::string& graph_name) {
  require_valid(d, "rendered diagram");
  auto order = canonical_junction_order(d);
  std::vector<std::size_t> position(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;
  auto jnode = [&](std::size_t j) { return quoted("j" + std::to_string(position[j])); };

  std::ostringstream os;
  os << "graph " << quoted(graph_name) << " {\n";
  os << "  graph [rankdir=LR];\n";
  os << "  node [fontname=\"Helvetica\"];\n";
  os << "  edge [dir=none];\n";
  for (const auto& [label, iface] : d.boxes) {
    os << "  " << quoted("box:" + label) << " [label=" << quoted(label) << ", shape=box";
    if (kinds) {
      auto it = kinds->find(label);
      if (it != kinds->end()) {
        os << ", style=filled, fillcolor=" << quoted(fill_color(it->second));
      }
    }
    os << "];\n";
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    os << "  " << quoted("j" + std::to_string(k))
       << " [label=\"\", shape=circle, style=filled, fillcolor=black, width=0.12, tooltip="
       << quoted(d.junction_types[order[k]]) << "];\n";
  }
  if (!d.boundary.empty()) {
    os << "  subgraph \"cluster_boundary\" {\n";
    os << "    label=\"boundary\";\n";
    for (const auto& b : d.boundary) {
      os << "    " << quoted("port:" + b.name) << " [label=" << quoted(b.name) << ", shape=plaintext];\n";
    }
    os << "  }\n";
  }
  for (const auto& [ref, j] : d.port_junction) {
    os << "  " << quoted("box:" + ref.box) << " -- " << jnode(j) << " [label=" << quoted(ref.port) << "];\n";
  }
  for (const auto& b : d.boundary) {
    os << "  " << quoted("port:" + b.name) << " -- " << jnode(b.junction) << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ephs
