#pragma once

#include <map>
#include <string>
#include <vector>

#include "ephs/diagram.hpp"

namespace ephs {

// The diagram with a single inner box `i` whose ports are wired one-to-one to
// boundary ports of the same names.
Diagram identity(const Interface& i);

// The outer box of a diagram: its boundary ports in declaration order.
Interface boundary_interface(const Diagram& d, std::string label = {});

struct InterfaceMatch {
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
  std::string str() const;
};

// Ports are matched by name; each matched pair must carry the same type.
InterfaceMatch check_interface_match(const Interface& inner, const Interface& guest_boundary);

// Replaces inner box `label` of `host` by `guest`. The junctions of the result
// are the pushout of host and guest junctions that identifies, for every port
// p of the shared interface, the host junction of (label, p) with the guest
// junction of boundary port p. Junctions left without any incident port are
// dropped.
//
// Throws ephs::Error: unknown_label, interface_mismatch, label_collision (a
// surviving host box shares a label with a guest box), invalid_diagram.
Diagram substitute(const Diagram& host, const std::string& label, const Diagram& guest);

using FillerMap = std::map<std::string, Diagram>;

// Substitutes every entry of `fillers`; unfilled boxes stay as inner boxes.
Diagram ocompose(const Diagram& host, const FillerMap& fillers);

}  // namespace ephs
