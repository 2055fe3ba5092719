#include "ephs/operad.hpp"

#include "ephs/error.hpp"
#include "ephs/union_find.hpp"

namespace ephs {

Diagram identity(const Interface& i) {
  Diagram d;
  d.boxes.emplace(i.label, i);
  for (const auto& p : i.ports) {
    std::size_t j = d.junction_types.size();
    d.junction_types.push_back(p.type);
    d.port_junction[PortRef{i.label, p.name}] = j;
    d.boundary.push_back(BoundaryPort{p.name, p.type, j});
  }
  return d;
}

Interface boundary_interface(const Diagram& d, std::string label) {
  Interface out;
  out.label = std::move(label);
  for (const auto& b : d.boundary) out.ports.push_back(Port{b.name, b.type});
  return out;
}

std::string InterfaceMatch::str() const {
  std::string out;
  for (std::size_t i = 0; i < problems.size(); ++i) out += (i ? "; " : "") + problems[i];
  return out;
}

InterfaceMatch check_interface_match(const Interface& inner, const Interface& guest_boundary) {
  InterfaceMatch m;
  for (const auto& p : inner.ports) {
    const Port* other = guest_boundary.find(p.name);
    if (other == nullptr) {
      m.problems.push_back("missing " + p.name);
    } else if (other->type != p.type) {
      m.problems.push_back("type of " + p.name + ": box expects '" + p.type + "', boundary has '" + other->type + "'");
    }
  }
  for (const auto& p : guest_boundary.ports) {
    if (inner.find(p.name) == nullptr) m.problems.push_back("unexpected " + p.name);
  }
  return m;
}

Diagram substitute(const Diagram& host, const std::string& label, const Diagram& guest) {
  auto box = host.boxes.find(label);
  if (box == host.boxes.end()) throw Error(ErrorKind::unknown_label, "no inner box labelled '" + label + "'");
  require_valid(host, "host");
  require_valid(guest, "guest");

  InterfaceMatch match = check_interface_match(box->second, boundary_interface(guest));
  if (!match.ok()) {
    throw Error(ErrorKind::interface_mismatch, "cannot substitute into '" + label + "': " + match.str());
  }
  for (const auto& [guest_label, iface] : guest.boxes) {
    if (guest_label != label && host.boxes.count(guest_label)) {
      throw Error(ErrorKind::label_collision, "box label '" + guest_label + "' occurs in both host and guest");
    }
  }

  const std::size_t nh = host.junction_count();
  const std::size_t ng = guest.junction_count();
  UnionFind classes(nh + ng);
  for (const auto& p : box->second.ports) {
    std::size_t hj = host.port_junction.at(PortRef{label, p.name});
    std::size_t gj = guest.find_boundary(p.name)->junction;
    classes.unite(hj, nh + gj);
  }

  // Junctions that keep at least one incident port after the shared interface
  // disappears.
  std::vector<bool> occupied(nh + ng, false);
  for (const auto& [ref, j] : host.port_junction) {
    if (ref.box != label) occupied[classes.find(j)] = true;
  }
  for (const auto& b : host.boundary) occupied[classes.find(b.junction)] = true;
  for (const auto& [ref, j] : guest.port_junction) occupied[classes.find(nh + j)] = true;

  // Dense renumbering in order of first appearance: host junctions, then guest.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> renumber(nh + ng, kNone);
  Diagram out;
  for (std::size_t j = 0; j < nh + ng; ++j) {
    std::size_t root = classes.find(j);
    const std::string& type = j < nh ? host.junction_types[j] : guest.junction_types[j - nh];
    if (!occupied[root]) continue;
    if (renumber[root] == kNone) {
      renumber[root] = out.junction_types.size();
      out.junction_types.push_back(type);
    } else if (out.junction_types[renumber[root]] != type) {
      throw Error(ErrorKind::interface_mismatch, "pushout merges junctions of types '" +
                                                     out.junction_types[renumber[root]] + "' and '" + type + "'");
    }
  }

  for (const auto& [l, iface] : host.boxes) {
    if (l != label) out.boxes.emplace(l, iface);
  }
  for (const auto& [l, iface] : guest.boxes) out.boxes.emplace(l, iface);
  for (const auto& [ref, j] : host.port_junction) {
    if (ref.box != label) out.port_junction[ref] = renumber[classes.find(j)];
  }
  for (const auto& [ref, j] : guest.port_junction) out.port_junction[ref] = renumber[classes.find(nh + j)];
  for (const auto& b : host.boundary) {
    out.boundary.push_back(BoundaryPort{b.name, b.type, renumber[classes.find(b.junction)]});
  }
  return out;
}

Diagram ocompose(const Diagram& host, const FillerMap& fillers) {
  for (const auto& [label, guest] : fillers) {
    if (!host.boxes.count(label)) throw Error(ErrorKind::unknown_label, "no inner box labelled '" + label + "'");
  }
  Diagram out = host;
  for (const auto& [label, guest] : fillers) out = substitute(out, label, guest);
  return out;
}

}  // namespace ephs
