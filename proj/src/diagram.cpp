#include "ephs/diagram.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "ephs/error.hpp"

namespace ephs {

const Port* Interface::find(const std::string& port) const {
  for (const auto& p : ports) {
    if (p.name == port) return &p;
  }
  return nullptr;
}

const BoundaryPort* Diagram::find_boundary(const std::string& name) const {
  for (const auto& b : boundary) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::vector<std::vector<PortRef>> Diagram::inner_members() const {
  std::vector<std::vector<PortRef>> out(junction_count());
  for (const auto& [ref, j] : port_junction) {
    if (j < out.size()) out[j].push_back(ref);
  }
  return out;
}

std::vector<std::vector<std::string>> Diagram::boundary_members() const {
  std::vector<std::vector<std::string>> out(junction_count());
  for (const auto& b : boundary) {
    if (b.junction < out.size()) out[b.junction].push_back(b.name);
  }
  return out;
}

std::vector<Violation> validate(const Diagram& d) {
  std::vector<Violation> out;
  auto add = [&](std::string msg) { out.push_back(Violation{std::move(msg)}); };

  std::vector<std::size_t> degree(d.junction_count(), 0);

  for (const auto& [label, iface] : d.boxes) {
    std::set<std::string> seen;
    for (const auto& port : iface.ports) {
      PortRef ref{label, port.name};
      if (!seen.insert(port.name).second) {
        add("duplicate port name at port " + ref.str());
        continue;
      }
      auto it = d.port_junction.find(ref);
      if (it == d.port_junction.end()) {
        add("port " + ref.str() + " is not attached to a junction");
        continue;
      }
      if (it->second >= d.junction_count()) {
        add("port " + ref.str() + " refers to missing junction " + std::to_string(it->second));
        continue;
      }
      ++degree[it->second];
      const std::string& jt = d.junction_types[it->second];
      if (jt != port.type) {
        add("type mismatch at port " + ref.str() + ": port has type '" + port.type + "' but junction " +
            std::to_string(it->second) + " has type '" + jt + "'");
      }
    }
  }

  for (const auto& [ref, j] : d.port_junction) {
    auto box = d.boxes.find(ref.box);
    if (box == d.boxes.end()) {
      add("attachment of " + ref.str() + " names an unknown box");
    } else if (box->second.find(ref.port) == nullptr) {
      add("attachment of " + ref.str() + " names an unknown port");
    }
  }

  std::set<std::string> boundary_names;
  for (const auto& b : d.boundary) {
    if (!boundary_names.insert(b.name).second) {
      add("duplicate boundary port " + b.name);
      continue;
    }
    if (b.junction >= d.junction_count()) {
      add("boundary port " + b.name + " refers to missing junction " + std::to_string(b.junction));
      continue;
    }
    ++degree[b.junction];
    const std::string& jt = d.junction_types[b.junction];
    if (jt != b.type) {
      add("type mismatch at boundary port " + b.name + ": port has type '" + b.type + "' but junction " +
          std::to_string(b.junction) + " has type '" + jt + "'");
    }
  }

  for (std::size_t j = 0; j < d.junction_count(); ++j) {
    if (degree[j] == 0) add("junction " + std::to_string(j) + " has no incident ports");
  }
  return out;
}

bool is_valid(const Diagram& d) { return validate(d).empty(); }

void require_valid(const Diagram& d, const std::string& what) {
  auto violations = validate(d);
  if (violations.empty()) return;
  std::string msg = what + " is not a valid diagram:";
  for (const auto& v : violations) msg += "\n  " + v.message;
  throw Error(ErrorKind::invalid_diagram, msg);
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

std::string encode_box(const std::string& label, const Interface& iface) {
  std::vector<std::string> ports;
  for (const auto& p : iface.ports) ports.push_back(p.name + ":" + p.type);
  std::sort(ports.begin(), ports.end());
  std::string out = label + "{";
  for (std::size_t i = 0; i < ports.size(); ++i) out += (i ? "," : "") + ports[i];
  return out + "}";
}

std::vector<std::string> junction_codes(const Diagram& d) {
  auto inner = d.inner_members();
  auto outer = d.boundary_members();
  std::vector<std::string> codes(d.junction_count());
  for (std::size_t j = 0; j < d.junction_count(); ++j) {
    std::vector<std::string> members;
    for (const auto& ref : inner[j]) members.push_back(ref.str());
    for (const auto& b : outer[j]) members.push_back("@" + b);
    std::sort(members.begin(), members.end());
    std::string code = d.junction_types[j] + "[";
    for (std::size_t i = 0; i < members.size(); ++i) code += (i ? "," : "") + members[i];
    codes[j] = code + "]";
  }
  return codes;
}

}  // namespace

std::string CanonicalForm::str() const {
  std::ostringstream os;
  os << "boxes:";
  for (const auto& b : boxes) os << " " << b;
  os << "\nboundary:";
  for (const auto& b : boundary) os << " " << b;
  os << "\njunctions:";
  for (const auto& j : junctions) os << " " << j;
  os << "\n";
  return os.str();
}

CanonicalForm canonicalize(const Diagram& d) {
  require_valid(d, "canonicalize input");
  CanonicalForm out;
  for (const auto& [label, iface] : d.boxes) out.boxes.push_back(encode_box(label, iface));
  for (const auto& b : d.boundary) out.boundary.push_back(b.name + ":" + b.type);
  std::sort(out.boundary.begin(), out.boundary.end());
  out.junctions = junction_codes(d);
  std::sort(out.junctions.begin(), out.junctions.end());
  return out;
}

std::vector<std::size_t> canonical_junction_order(const Diagram& d) {
  auto codes = junction_codes(d);
  std::vector<std::size_t> order(d.junction_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return codes[a] < codes[b]; });
  return order;
}

// ---------------------------------------------------------------------------
// Isomorphism

namespace {

struct Incidence {
  // members[j]: inner ports as "box.port" and boundary ports as "@name".
  std::vector<std::vector<std::string>> members;
  std::map<std::string, std::size_t> junction_of;
};

Incidence incidence(const Diagram& d) {
  Incidence inc;
  inc.members.resize(d.junction_count());
  for (const auto& [ref, j] : d.port_junction) {
    inc.members[j].push_back(ref.str());
    inc.junction_of[ref.str()] = j;
  }
  for (const auto& b : d.boundary) {
    inc.members[b.junction].push_back("@" + b.name);
    inc.junction_of["@" + b.name] = b.junction;
  }
  return inc;
}

bool same_outer_shape(const Diagram& a, const Diagram& b) {
  if (a.junction_count() != b.junction_count()) return false;
  if (a.boxes.size() != b.boxes.size()) return false;
  for (const auto& [label, iface] : a.boxes) {
    auto it = b.boxes.find(label);
    if (it == b.boxes.end()) return false;
    if (encode_box(label, iface) != encode_box(label, it->second)) return false;
  }
  if (a.boundary.size() != b.boundary.size()) return false;
  for (const auto& bp : a.boundary) {
    const BoundaryPort* other = b.find_boundary(bp.name);
    if (other == nullptr || other->type != bp.type) return false;
  }
  return true;
}

class IsoSearch {
 public:
  IsoSearch(const Diagram& a, const Diagram& b) : a_(a), b_(b), ia_(incidence(a)), ib_(incidence(b)) {
    map_.assign(a.junction_count(), kNone);
    used_.assign(b.junction_count(), false);
  }

  bool run() { return extend(0); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool compatible(std::size_t ja, std::size_t jb) const {
    if (a_.junction_types[ja] != b_.junction_types[jb]) return false;
    if (ia_.members[ja].size() != ib_.members[jb].size()) return false;
    // Every member of ja must sit on jb in the other diagram.
    for (const auto& m : ia_.members[ja]) {
      auto it = ib_.junction_of.find(m);
      if (it == ib_.junction_of.end() || it->second != jb) return false;
    }
    return true;
  }

  bool extend(std::size_t ja) {
    if (ja == map_.size()) return true;
    for (std::size_t jb = 0; jb < used_.size(); ++jb) {
      if (used_[jb] || !compatible(ja, jb)) continue;
      map_[ja] = jb;
      used_[jb] = true;
      if (extend(ja + 1)) return true;
      used_[jb] = false;
      map_[ja] = kNone;
    }
    return false;
  }

  const Diagram& a_;
  const Diagram& b_;
  Incidence ia_;
  Incidence ib_;
  std::vector<std::size_t> map_;
  std::vector<bool> used_;
};

}  // namespace

bool is_isomorphic(const Diagram& a, const Diagram& b) {
  if (!same_outer_shape(a, b)) return false;
  return IsoSearch(a, b).run();
}

Diagram permute_junctions(const Diagram& d, const std::vector<std::size_t>& perm) {
  Diagram out;
  out.boxes = d.boxes;
  out.junction_types.resize(d.junction_count());
  for (std::size_t j = 0; j < d.junction_count(); ++j) out.junction_types[perm[j]] = d.junction_types[j];
  for (const auto& [ref, j] : d.port_junction) out.port_junction[ref] = perm[j];
  out.boundary = d.boundary;
  for (auto& b : out.boundary) b.junction = perm[b.junction];
  return out;
}

Diagram relabel_boxes(const Diagram& d, const std::map<std::string, std::string>& new_labels) {
  auto label_of = [&](const std::string& old) {
    auto it = new_labels.find(old);
    return it == new_labels.end() ? old : it->second;
  };
  Diagram out;
  for (const auto& [label, iface] : d.boxes) {
    if (!out.boxes.emplace(label_of(label), iface).second) {
      throw Error(ErrorKind::label_collision, "relabeling maps two boxes to '" + label_of(label) + "'");
    }
  }
  out.junction_types = d.junction_types;
  for (const auto& [ref, j] : d.port_junction) out.port_junction[PortRef{label_of(ref.box), ref.port}] = j;
  out.boundary = d.boundary;
  return out;
}

}  // namespace ephs
