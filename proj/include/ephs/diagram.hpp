#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ephs {

// Port types are compared by name. The unit strings document the physical
// dimension of the flow and effort variables.
struct PortType {
  std::string name;
  std::string flow_dimension;
  std::string effort_dimension;
};

struct Port {
  std::string name;
  std::string type;

  friend bool operator==(const Port&, const Port&) = default;
};

// A box: a label and an ordered list of typed ports. Port order is only used
// for display; ports are matched by name.
struct Interface {
  std::string label;
  std::vector<Port> ports;

  const Port* find(const std::string& port) const;
  friend bool operator==(const Interface&, const Interface&) = default;
};

struct PortRef {
  std::string box;
  std::string port;

  std::string str() const { return box + "." + port; }
  friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

struct BoundaryPort {
  std::string name;
  std::string type;
  std::size_t junction = 0;

  friend bool operator==(const BoundaryPort&, const BoundaryPort&) = default;
};

// An undirected wiring diagram stored as an attributed C-set: inner boxes with
// their ports, junctions carrying a port type, the port-to-junction map, and
// the outer boundary ports with their own junction map.
//
// Junction indices are an implementation detail. Two diagrams that differ
// only by a permutation of junction indices denote the same expression.
struct Diagram {
  std::map<std::string, Interface> boxes;
  std::vector<std::string> junction_types;
  std::map<PortRef, std::size_t> port_junction;
  std::vector<BoundaryPort> boundary;

  std::size_t junction_count() const { return junction_types.size(); }
  const BoundaryPort* find_boundary(const std::string& name) const;
  // Inner ports and boundary port names attached to each junction.
  std::vector<std::vector<PortRef>> inner_members() const;
  std::vector<std::vector<std::string>> boundary_members() const;
};

struct Violation {
  std::string message;
};

// Checks every structural invariant; an empty result means the diagram is
// valid. Violations are data rather than failures.
std::vector<Violation> validate(const Diagram& d);
bool is_valid(const Diagram& d);

// Throws ephs::Error(invalid_diagram) listing the violations.
void require_valid(const Diagram& d, const std::string& what);

// Encoding of a diagram that forgets junction indices. Each junction is
// identified by its (type, incident members), which is well defined because
// every port has a fixed name.
struct CanonicalForm {
  std::vector<std::string> boxes;
  std::vector<std::string> boundary;
  std::vector<std::string> junctions;

  std::string str() const;
  friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

// Requires a valid diagram; throws ephs::Error(invalid_diagram) otherwise.
CanonicalForm canonicalize(const Diagram& d);

// Order of junction indices sorted by their canonical encoding. Two
// isomorphic diagrams list corresponding junctions at the same positions.
std::vector<std::size_t> canonical_junction_order(const Diagram& d);

// Searches for a junction bijection that preserves types and incidences.
// Candidates are pruned by (type, degree) signature and by already-fixed
// incidences; diagrams are assumed small.
bool is_isomorphic(const Diagram& a, const Diagram& b);

// Renumbers junctions: junction j of `d` becomes junction perm[j].
Diagram permute_junctions(const Diagram& d, const std::vector<std::size_t>& perm);

Diagram relabel_boxes(const Diagram& d, const std::map<std::string, std::string>& new_labels);

}  // namespace ephs
