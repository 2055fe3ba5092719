#pragma once

#include <map>
#include <optional>
#include <string>

#include "ephs/diagram.hpp"
#include "ephs/semantics.hpp"

namespace ephs {

// Filler kind per box label; boxes are colored only when this is given.
using FillerKinds = std::map<std::string, ComponentKind>;

// Graphviz text for a valid diagram: one node per box, junction and boundary
// port, one undirected edge per bond. Output is byte-for-byte deterministic.
std::string to_dot(const Diagram& d, const std::optional<FillerKinds>& kinds = std::nullopt,
                   const std::string& graph_name = "expression");

FillerKinds filler_kinds(const Component& composite);

}  // namespace ephs
