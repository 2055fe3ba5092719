#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ephs/dsl.hpp"
#include "ephs/operad.hpp"

namespace ephs {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path, const SourceLoc& loc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read '" + path.string() + "'", loc);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path directory_of(const std::string& file) {
  if (file.empty() || file.front() == '<') return fs::current_path();
  fs::path p(file);
  return p.has_parent_path() ? p.parent_path() : fs::current_path();
}

// Depth-first expansion of `use`; each canonical path is read once.
void expand(const ModelDoc& doc, std::set<fs::path>& seen, std::vector<Decl>& out) {
  for (const auto& decl : doc.decls) {
    const auto* use = std::get_if<UseDecl>(&decl);
    if (use == nullptr) {
      out.push_back(decl);
      continue;
    }
    fs::path target = directory_of(doc.file) / use->path;
    std::error_code ec;
    fs::path canonical = fs::weakly_canonical(target, ec);
    if (ec || !fs::exists(canonical)) {
      throw Error(ErrorKind::io, "cannot read '" + target.string() + "'", use->loc);
    }
    if (!seen.insert(canonical).second) continue;
    ModelDoc sub = parse_model(read_file(canonical, use->loc), target.string());
    expand(sub, seen, out);
  }
}

template <typename F>
auto at(const SourceLoc& loc, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.located(loc);
  }
}

[[noreturn]] void fail(ErrorKind kind, const std::string& msg, const SourceLoc& loc) { throw Error(kind, msg, loc); }

double constant_value(const Expr& e, const Env& env, const SourceLoc& loc) {
  return at(loc, [&] { return eval(e, env); });
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    out.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return out;
}

class Resolver {
 public:
  Model run(const ModelDoc& doc) {
    std::set<fs::path> seen;
    if (!doc.file.empty() && doc.file.front() != '<') {
      std::error_code ec;
      auto self = fs::weakly_canonical(doc.file, ec);
      if (!ec) seen.insert(self);
    }
    std::vector<Decl> decls;
    expand(doc, seen, decls);

    for (const auto& d : decls) {
      std::visit([&](const auto& x) { declare(x); }, d);
    }
    for (const auto& name : model_.declaration_order) {
      model_.system_components[name] = model_.system(name).component;
    }
    return std::move(model_);
  }

 private:
  void declare(const UseDecl&) {}

  void declare(const PortTypeDecl& d) {
    if (model_.port_types.count(d.name)) fail(ErrorKind::duplicate_name, "duplicate port type '" + d.name + "'", d.loc);
    if (d.flow_unit.empty() || d.effort_unit.empty()) {
      fail(ErrorKind::invalid_diagram, "port type '" + d.name + "' needs non-empty flow and effort units", d.loc);
    }
    model_.port_types[d.name] = PortType{d.name, d.flow_unit, d.effort_unit};
  }

  void require_type(const std::string& type, const SourceLoc& loc) const {
    if (!model_.port_types.count(type)) fail(ErrorKind::unknown_reference, "unknown port type '" + type + "'", loc);
  }

  void declare(const InterfaceDecl& d) {
    if (model_.interfaces.count(d.name)) fail(ErrorKind::duplicate_name, "duplicate interface '" + d.name + "'", d.loc);
    Interface iface{d.name, {}};
    for (const auto& p : d.ports) {
      require_type(p.type, p.loc);
      if (iface.find(p.name)) fail(ErrorKind::duplicate_name, "duplicate port '" + p.name + "'", p.loc);
      iface.ports.push_back(Port{p.name, p.type});
    }
    model_.interfaces[d.name] = iface;
  }

  const Interface& interface(const std::string& name, const SourceLoc& loc) const {
    auto it = model_.interfaces.find(name);
    if (it == model_.interfaces.end()) fail(ErrorKind::unknown_reference, "unknown interface '" + name + "'", loc);
    return it->second;
  }

  void declare(const DiagramDecl& d) {
    if (model_.diagrams.count(d.name)) fail(ErrorKind::duplicate_name, "duplicate diagram '" + d.name + "'", d.loc);
    Diagram out;
    std::map<std::string, std::size_t> junction;
    for (const auto& j : d.junctions) {
      require_type(j.type, j.loc);
      if (!junction.emplace(j.name, out.junction_types.size()).second) {
        fail(ErrorKind::duplicate_name, "duplicate junction '" + j.name + "'", j.loc);
      }
      out.junction_types.push_back(j.type);
    }
    auto junction_of = [&](const std::string& name, const SourceLoc& loc) {
      auto it = junction.find(name);
      if (it == junction.end()) fail(ErrorKind::unknown_reference, "unknown junction '" + name + "'", loc);
      return it->second;
    };
    for (const auto& b : d.boxes) {
      Interface iface = interface(b.interface, b.loc);
      iface.label = b.label;
      if (!out.boxes.emplace(b.label, iface).second) {
        fail(ErrorKind::duplicate_name, "duplicate box '" + b.label + "'", b.loc);
      }
    }
    for (const auto& b : d.bonds) {
      auto box = out.boxes.find(b.box);
      if (box == out.boxes.end()) fail(ErrorKind::unknown_reference, "unknown box '" + b.box + "'", b.loc);
      if (!box->second.find(b.port)) {
        fail(ErrorKind::unknown_reference, "box '" + b.box + "' has no port '" + b.port + "'", b.loc);
      }
      if (!out.port_junction.emplace(PortRef{b.box, b.port}, junction_of(b.junction, b.loc)).second) {
        fail(ErrorKind::duplicate_name, "port " + b.box + "." + b.port + " is bonded twice", b.loc);
      }
    }
    for (const auto& b : d.boundary) {
      require_type(b.type, b.loc);
      if (out.find_boundary(b.name)) fail(ErrorKind::duplicate_name, "duplicate boundary port '" + b.name + "'", b.loc);
      out.boundary.push_back(BoundaryPort{b.name, b.type, junction_of(b.junction, b.loc)});
    }
    at(d.loc, [&] { require_valid(out, "diagram '" + d.name + "'"); });
    model_.diagrams[d.name] = std::move(out);
    model_.diagram_decls[d.name] = d;
  }

  void forbid(bool present, const ComponentDecl& d, const std::string& field) {
    if (present) {
      fail(ErrorKind::syntax, std::string(to_string(d.kind)) + " component '" + d.name + "' cannot declare " + field,
           d.loc);
    }
  }

  void declare(const ComponentDecl& d) {
    if (model_.components.count(d.name) || model_.systems.count(d.name)) {
      fail(ErrorKind::duplicate_name, "duplicate component '" + d.name + "'", d.loc);
    }
    Interface iface = interface(d.interface, d.loc);
    Params params;
    for (const auto& p : d.params) {
      if (params.count(p.name)) fail(ErrorKind::duplicate_name, "duplicate parameter '" + p.name + "'", p.loc);
      Env env(params.begin(), params.end());
      params[p.name] = constant_value(p.value, env, p.loc);
    }
    Env env(params.begin(), params.end());
    Component body{d.name, StorageComponent{}, false};
    switch (d.kind) {
      case ComponentKind::storage: {
        forbid(!d.causality.empty(), d, "causality");
        forbid(d.matrix.has_value(), d, "a matrix");
        forbid(d.kernel.has_value(), d, "a kernel");
        if (!d.hamiltonian) fail(ErrorKind::syntax, "storage component '" + d.name + "' needs a hamiltonian", d.loc);
        StorageComponent s{iface, {}, *d.hamiltonian, params};
        for (const auto& st : d.states) {
          if (!st.port) fail(ErrorKind::bad_port_binding, "state '" + st.name + "' must name its port", st.loc);
          s.states.push_back(StateVar{st.name, *st.port, constant_value(st.initial, env, st.loc)});
        }
        body.body = std::move(s);
        break;
      }
      case ComponentKind::dirac: {
        forbid(!d.states.empty(), d, "states");
        forbid(d.hamiltonian.has_value(), d, "a hamiltonian");
        forbid(d.kernel.has_value(), d, "a kernel");
        if (!d.matrix) fail(ErrorKind::syntax, "dirac component '" + d.name + "' needs a matrix", d.loc);
        DiracComponent dc{iface, std::vector<Causality>(iface.ports.size(), Causality::effort_in), *d.matrix, params};
        std::vector<bool> given(iface.ports.size(), false);
        for (const auto& c : d.causality) {
          std::size_t i = 0;
          while (i < iface.ports.size() && iface.ports[i].name != c.port) ++i;
          if (i == iface.ports.size()) fail(ErrorKind::bad_port_binding, "unknown port '" + c.port + "'", c.loc);
          if (given[i]) fail(ErrorKind::bad_port_binding, "port '" + c.port + "' has two causalities", c.loc);
          given[i] = true;
          dc.causality[i] = c.causality;
        }
        for (std::size_t i = 0; i < given.size(); ++i) {
          if (!given[i]) {
            fail(ErrorKind::bad_port_binding, "port '" + iface.ports[i].name + "' of '" + d.name + "' has no causality",
                 d.loc);
          }
        }
        body.body = std::move(dc);
        break;
      }
      case ComponentKind::resistive: {
        forbid(!d.states.empty(), d, "states");
        forbid(d.hamiltonian.has_value(), d, "a hamiltonian");
        forbid(!d.causality.empty(), d, "causality");
        if (!d.matrix) fail(ErrorKind::syntax, "resistive component '" + d.name + "' needs a matrix", d.loc);
        body.body = ResistiveComponent{iface, *d.matrix, d.kernel, params};
        break;
      }
      case ComponentKind::environment: {
        forbid(d.hamiltonian.has_value(), d, "a hamiltonian");
        forbid(!d.causality.empty(), d, "causality");
        forbid(d.matrix.has_value(), d, "a matrix");
        forbid(d.kernel.has_value(), d, "a kernel");
        EnvironmentComponent e{iface, 0.0, params};
        if (d.states.size() > 1) fail(ErrorKind::bad_port_binding, "an environment has one entropy state", d.loc);
        for (const auto& st : d.states) {
          if (st.name != "s_e" || st.port) {
            fail(ErrorKind::bad_port_binding, "the environment state is declared as 'state s_e = ...'", st.loc);
          }
          e.initial_entropy = constant_value(st.initial, env, st.loc);
        }
        body.body = std::move(e);
        break;
      }
      case ComponentKind::composite:
        break;
    }
    ComponentPtr c = at(d.loc, [&]() -> ComponentPtr {
      if (d.unchecked) return make_unchecked(d.name, std::move(body));
      return std::visit(
          [&](auto& b) -> ComponentPtr {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, StorageComponent>) return make_storage(d.name, std::move(b));
            else if constexpr (std::is_same_v<T, DiracComponent>) return make_dirac(d.name, std::move(b));
            else if constexpr (std::is_same_v<T, ResistiveComponent>) return make_resistive(d.name, std::move(b));
            else if constexpr (std::is_same_v<T, EnvironmentComponent>) return make_environment(d.name, std::move(b));
            else return nullptr;
          },
          body.body);
    });
    model_.components[d.name] = c;
    model_.component_decls[d.name] = d;
  }

  void declare(const SystemDecl& d) {
    if (model_.systems.count(d.name) || model_.components.count(d.name)) {
      fail(ErrorKind::duplicate_name, "duplicate system '" + d.name + "'", d.loc);
    }
    model_.systems[d.name] = d;
    model_.declaration_order.push_back(d.name);
  }

  Model model_;
};

// Copy-on-write update of one primitive field somewhere below `c`.
ComponentPtr override_value(const ComponentPtr& c, const std::vector<std::string>& path, std::size_t depth,
                            const std::string& key, double value, bool is_init, int& hits, const SourceLoc& loc) {
  if (const auto* comp = std::get_if<CompositeComponent>(&c->body)) {
    CompositeComponent copy = *comp;
    if (depth < path.size()) {
      auto it = copy.fillers.find(path[depth]);
      if (it == copy.fillers.end()) {
        fail(ErrorKind::unknown_reference, "'" + c->name + "' has no box '" + path[depth] + "'", loc);
      }
      it->second = override_value(it->second, path, depth + 1, key, value, is_init, hits, loc);
    } else {
      for (auto& [label, filler] : copy.fillers) {
        filler = override_value(filler, path, depth, key, value, is_init, hits, loc);
      }
    }
    auto out = std::make_shared<Component>(*c);
    out->body = std::move(copy);
    return out;
  }
  if (depth < path.size()) {
    fail(ErrorKind::unknown_reference, "'" + c->name + "' is primitive and has no box '" + path[depth] + "'", loc);
  }
  auto out = std::make_shared<Component>(*c);
  bool hit = false;
  std::visit(
      [&](auto& b) {
        using T = std::decay_t<decltype(b)>;
        if (!is_init) {
          if constexpr (requires { b.params; }) {
            auto it = b.params.find(key);
            if (it != b.params.end()) {
              it->second = value;
              hit = true;
            }
          }
        } else if constexpr (std::is_same_v<T, StorageComponent>) {
          for (auto& st : b.states) {
            if (st.name == key) {
              st.initial = value;
              hit = true;
            }
          }
        } else if constexpr (std::is_same_v<T, EnvironmentComponent>) {
          if (key == "s_e") {
            b.initial_entropy = value;
            hit = true;
          }
        }
      },
      out->body);
  if (!hit) return c;
  ++hits;
  return out;
}

}  // namespace

std::map<std::string, std::string> Model::filler_names(const std::string& name) const {
  auto it = systems.find(name);
  if (it == systems.end()) throw Error(ErrorKind::unknown_reference, "unknown system '" + name + "'");
  std::map<std::string, std::string> out;
  for (const auto& f : it->second.fills) out[f.label] = f.target;
  return out;
}

ResolvedSystem Model::system(const std::string& name) const {
  std::vector<std::string> stack;
  std::function<ComponentPtr(const std::string&, const SourceLoc&)> build = [&](const std::string& sys,
                                                                               const SourceLoc& use_loc) {
    auto it = systems.find(sys);
    if (it == systems.end()) throw Error(ErrorKind::unknown_reference, "unknown system '" + sys + "'", use_loc);
    const SystemDecl& d = it->second;
    if (std::find(stack.begin(), stack.end(), sys) != stack.end()) {
      std::string cycle;
      for (const auto& s : stack) cycle += s + " -> ";
      throw Error(ErrorKind::invalid_diagram, "cyclic system reference: " + cycle + sys, d.loc);
    }
    stack.push_back(sys);
    auto dg = diagrams.find(d.diagram);
    if (dg == diagrams.end()) throw Error(ErrorKind::unknown_reference, "unknown diagram '" + d.diagram + "'", d.loc);
    std::map<std::string, ComponentPtr> fillers;
    for (const auto& f : d.fills) {
      if (!dg->second.boxes.count(f.label)) {
        throw Error(ErrorKind::unknown_label, "diagram '" + d.diagram + "' has no box '" + f.label + "'", f.loc);
      }
      if (fillers.count(f.label)) throw Error(ErrorKind::duplicate_name, "box '" + f.label + "' filled twice", f.loc);
      auto comp = components.find(f.target);
      if (comp != components.end()) {
        fillers[f.label] = comp->second;
      } else if (systems.count(f.target)) {
        fillers[f.label] = build(f.target, f.loc);
      } else {
        throw Error(ErrorKind::unknown_reference, "unknown component or system '" + f.target + "'", f.loc);
      }
    }
    ComponentPtr c = at(d.loc, [&] { return fill(sys, dg->second, fillers); });
    auto apply = [&](const AssignDecl& a, bool is_init) {
      double v = constant_value(a.value, Env{}, a.loc);
      auto path = split_path(a.name);
      std::string key = path.back();
      path.pop_back();
      int hits = 0;
      c = override_value(c, path, 0, key, v, is_init, hits, a.loc);
      if (hits == 0) {
        throw Error(ErrorKind::unknown_reference,
                    std::string(is_init ? "no state" : "no parameter") + " matches '" + a.name + "'", a.loc);
      }
    };
    for (const auto& p : d.params) apply(p, false);
    for (const auto& p : d.inits) apply(p, true);
    at(d.loc, [&] { check_structure(*c); });
    stack.pop_back();
    return c;
  };

  ResolvedSystem out;
  out.component = build(name, SourceLoc{});
  const SystemDecl& d = systems.at(name);
  const Diagram& dg = diagrams.at(d.diagram);
  for (const auto& b : d.binds) {
    if (!dg.find_boundary(b.port)) {
      throw Error(ErrorKind::unknown_reference, "system '" + name + "' has no boundary port '" + b.port + "'", b.loc);
    }
    if (out.bindings.count(b.port)) throw Error(ErrorKind::duplicate_name, "boundary port bound twice", b.loc);
    out.bindings[b.port] = BoundaryBinding{b.kind, b.value};
  }
  return out;
}

Model resolve(const ModelDoc& doc) { return Resolver().run(doc); }

Model load_model_file(const std::filesystem::path& path) {
  std::string text = read_file(path, SourceLoc{});
  return resolve(parse_model(text, path.string()));
}

ModelDoc compose(const Model& model, const std::string& name) {
  ResolvedSystem rs = model.system(name);
  const SystemDecl& sys = model.systems.at(name);
  InlinedSystem inl = inline_composite(*rs.component);

  auto label_of = [](std::string s) {
    std::replace(s.begin(), s.end(), '.', '_');
    return s;
  };

  ModelDoc doc;
  doc.file = "<compose>";
  std::set<std::string> types(inl.diagram.junction_types.begin(), inl.diagram.junction_types.end());
  std::set<std::string> interfaces;
  std::vector<std::string> components;
  for (const auto& p : inl.primitives) {
    const ComponentDecl& cd = model.component_decls.at(p.component->name);
    interfaces.insert(cd.interface);
    if (std::find(components.begin(), components.end(), cd.name) == components.end()) components.push_back(cd.name);
  }
  std::sort(components.begin(), components.end());
  for (const auto& i : interfaces) {
    for (const auto& port : model.interfaces.at(i).ports) types.insert(port.type);
  }
  for (const auto& b : inl.diagram.boundary) types.insert(b.type);
  for (const auto& t : types) {
    const PortType& pt = model.port_types.at(t);
    doc.decls.push_back(PortTypeDecl{pt.name, pt.flow_dimension, pt.effort_dimension, {}});
  }
  for (const auto& i : interfaces) {
    InterfaceDecl d{i, {}, {}};
    for (const auto& port : model.interfaces.at(i).ports) d.ports.push_back(PortDecl{port.name, port.type, {}});
    doc.decls.push_back(d);
  }
  for (const auto& c : components) doc.decls.push_back(model.component_decls.at(c));

  const std::string flat_name = name + "_flat";
  DiagramDecl dd;
  dd.name = flat_name;
  auto order = canonical_junction_order(inl.diagram);
  std::vector<std::string> jname(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) jname[order[k]] = "j" + std::to_string(k);
  for (const auto& p : inl.primitives) {
    dd.boxes.push_back(BoxDecl{label_of(p.name), model.component_decls.at(p.component->name).interface, {}});
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    dd.junctions.push_back(JunctionDecl{jname[order[k]], inl.diagram.junction_types[order[k]], {}});
  }
  for (const auto& [ref, j] : inl.diagram.port_junction) {
    dd.bonds.push_back(BondDecl{label_of(ref.box), ref.port, jname[j], {}});
  }
  for (const auto& b : inl.diagram.boundary) dd.boundary.push_back(BoundaryDecl{b.name, b.type, jname[b.junction], {}});
  doc.decls.push_back(dd);

  SystemDecl sd;
  sd.name = flat_name;
  sd.diagram = flat_name;
  for (const auto& p : inl.primitives) {
    const std::string label = label_of(p.name);
    sd.fills.push_back(FillDecl{label, p.component->name, {}});
    if (const Params* ps = p.component->params()) {
      for (const auto& [k, v] : *ps) sd.params.push_back(AssignDecl{label + "." + k, Expr::constant(v), {}});
    }
    if (const auto* s = std::get_if<StorageComponent>(&p.component->body)) {
      for (const auto& st : s->states) {
        sd.inits.push_back(AssignDecl{label + "." + st.name, Expr::constant(st.initial), {}});
      }
    } else if (const auto* e = std::get_if<EnvironmentComponent>(&p.component->body)) {
      sd.inits.push_back(AssignDecl{label + ".s_e", Expr::constant(e->initial_entropy), {}});
    }
  }
  sd.binds = sys.binds;
  for (auto& b : sd.binds) b.loc = {};
  doc.decls.push_back(sd);
  return doc;
}

}  // namespace ephs
