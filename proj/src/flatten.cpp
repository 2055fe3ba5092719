#include "ephs/flatten.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "ephs/error.hpp"
#include "ephs/operad.hpp"

namespace ephs {

std::string_view to_string(MonitorKind k) {
  switch (k) {
    case MonitorKind::power_balance: return "power_balance";
    case MonitorKind::dirac_power: return "dirac_power";
    case MonitorKind::dissipation: return "dissipation";
    case MonitorKind::junction_balance: return "junction_balance";
    case MonitorKind::exergy: return "exergy";
    case MonitorKind::entropy: return "entropy";
    case MonitorKind::energy: return "energy";
  }
  return "?";
}

const Primitive* InlinedSystem::find(const std::string& name) const {
  for (const auto& p : primitives) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Inlining

namespace {

struct PathedDiagram {
  Diagram diagram;  // box labels are dotted paths
  std::vector<std::pair<std::string, ComponentPtr>> leaves;
};

PathedDiagram inline_paths(const Component& c) {
  const auto* comp = std::get_if<CompositeComponent>(&c.body);
  PathedDiagram out;
  if (comp == nullptr) {
    Interface i = component_interface(c);
    out.diagram = identity(i);
    out.leaves.emplace_back(c.name, std::make_shared<Component>(c));
    return out;
  }
  out.diagram = comp->diagram;
  for (const auto& [label, filler] : comp->fillers) {
    if (filler->is_primitive()) {
      out.leaves.emplace_back(label, filler);
      continue;
    }
    PathedDiagram sub = inline_paths(*filler);
    std::map<std::string, std::string> renames;
    for (const auto& [l, iface] : sub.diagram.boxes) renames[l] = label + "." + l;
    out.diagram = substitute(out.diagram, label, relabel_boxes(sub.diagram, renames));
    for (auto& [path, leaf] : sub.leaves) out.leaves.emplace_back(label + "." + path, std::move(leaf));
  }
  return out;
}

std::string leaf_of(const std::string& path) {
  auto dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

}  // namespace

InlinedSystem inline_composite(const Component& c) {
  PathedDiagram pd = inline_paths(c);
  std::map<std::string, int> leaf_count;
  for (const auto& [path, leaf] : pd.leaves) ++leaf_count[leaf_of(path)];

  InlinedSystem out;
  std::map<std::string, std::string> renames;
  for (auto& [path, leaf] : pd.leaves) {
    std::string name = leaf_count[leaf_of(path)] == 1 ? leaf_of(path) : path;
    renames[path] = name;
    out.primitives.push_back(Primitive{name, path, leaf});
  }
  out.diagram = relabel_boxes(pd.diagram, renames);
  for (auto& [label, iface] : out.diagram.boxes) iface.label = label;
  std::sort(out.primitives.begin(), out.primitives.end(),
            [](const Primitive& a, const Primitive& b) { return a.name < b.name; });
  return out;
}

// ---------------------------------------------------------------------------
// Compiled form

class FlatProgram {
 public:
  std::vector<std::string> param_names;
  std::size_t state_offset = 0;
  std::size_t signal_offset = 0;
  std::vector<CompiledExpr> schedule;
  std::vector<std::size_t> derivative_slots;
  std::vector<std::vector<CompiledExpr>> monitors;
};

namespace {

std::string effort_signal(const std::string& determiner) { return "e[" + determiner + "]"; }
std::string flow_signal(const std::string& member) { return "f[" + member + "]"; }

Expr sum_of(const std::vector<Expr>& terms) {
  if (terms.empty()) return Expr::constant(0.0);
  Expr out = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) out = out + terms[i];
  return out;
}

struct Member {
  bool boundary = false;
  std::string name;  // "box.port" or the boundary port name
  std::string box;
  std::string port;
};

class Builder {
 public:
  Builder(const InlinedSystem& sys, const Bindings& bindings) : sys_(sys), bindings_(bindings) {}

  FlatSystem run() {
    collect_parameters();
    collect_states();
    check_bindings();
    find_determiners();
    define_signals();
    FlatSystem out;
    out.states = state_names_;
    out.initial = initial_;
    out.parameters = params_;
    out.has_environment = has_env_;
    for (std::size_t j = 0; j < junction_effort_.size(); ++j) out.junction_efforts.push_back(junction_effort_[j]);
    out.schedule = schedule();
    out.derivatives = derivatives_;
    out.monitors = monitors();
    compile(out);
    return out;
  }

 private:
  const Component& component_of(const std::string& box) const { return *sys_.find(box)->component; }

  void collect_parameters() {
    std::optional<double> theta0;
    std::string theta0_owner;
    for (const auto& p : sys_.primitives) {
      const Params* ps = p.component->params();
      if (ps == nullptr) continue;
      for (const auto& [k, v] : *ps) {
        if (k == kTheta0) {
          if (theta0 && *theta0 != v) {
            throw Error(ErrorKind::parameter_mismatch, "components '" + theta0_owner + "' and '" + p.name +
                                                           "' disagree on theta0 (" + format_number(*theta0) +
                                                           " vs " + format_number(v) + ")");
          }
          theta0 = v;
          theta0_owner = p.name;
        } else {
          params_[p.name + "." + k] = v;
        }
      }
    }
    if (theta0) params_[kTheta0] = *theta0;
  }

  void collect_states() {
    std::optional<double> s_e0;
    std::string env_owner;
    for (const auto& p : sys_.primitives) {
      if (const auto* s = std::get_if<StorageComponent>(&p.component->body)) {
        for (const auto& st : s->states) {
          state_names_.push_back(p.name + "." + st.name);
          initial_.push_back(st.initial);
        }
      } else if (const auto* e = std::get_if<EnvironmentComponent>(&p.component->body)) {
        if (s_e0 && *s_e0 != e->initial_entropy) {
          throw Error(ErrorKind::parameter_mismatch, "environments '" + env_owner + "' and '" + p.name +
                                                         "' disagree on the initial entropy");
        }
        if (has_env_ && e->iface.ports.front().type != thermal_type_) {
          throw Error(ErrorKind::parameter_mismatch, "environments '" + env_owner + "' and '" + p.name +
                                                         "' have different port types");
        }
        s_e0 = e->initial_entropy;
        env_owner = p.name;
        has_env_ = true;
        thermal_type_ = e->iface.ports.front().type;
      }
    }
    if (has_env_) {
      state_names_.push_back("s_e");
      initial_.push_back(*s_e0);
    }
  }

  void check_bindings() {
    for (const auto& [name, b] : bindings_) {
      if (sys_.diagram.find_boundary(name) == nullptr) {
        throw Error(ErrorKind::unknown_reference, "binding for unknown boundary port '" + name + "'");
      }
      for (const auto& s : free_symbols(b.value)) {
        if (s != "t" && !params_.count(s)) {
          throw Error(ErrorKind::unbound_symbol, "binding of '" + name + "' uses unbound symbol '" + s + "'");
        }
      }
    }
    for (const auto& b : sys_.diagram.boundary) {
      if (!bindings_.count(b.name)) {
        throw Error(ErrorKind::unbound_boundary, "boundary port '" + b.name + "' is not bound");
      }
    }
  }

  // Effort producers: storage ports, environment ports, Dirac flow_in ports
  // and boundary effort sources.
  bool produces_effort(const Member& m) const {
    if (m.boundary) return bindings_.at(m.name).kind == BindingKind::effort_source;
    const Component& c = component_of(m.box);
    switch (c.kind()) {
      case ComponentKind::storage:
      case ComponentKind::environment:
        return true;
      case ComponentKind::dirac: {
        const auto& d = std::get<DiracComponent>(c.body);
        for (std::size_t i = 0; i < d.iface.ports.size(); ++i) {
          if (d.iface.ports[i].name == m.port) return d.causality[i] == Causality::flow_in;
        }
        return false;
      }
      default:
        return false;
    }
  }

  void find_determiners() {
    const auto inner = sys_.diagram.inner_members();
    const auto outer = sys_.diagram.boundary_members();
    const std::size_t n = sys_.diagram.junction_count();
    members_.resize(n);
    determiner_.resize(n);
    junction_effort_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (const auto& ref : inner[j]) members_[j].push_back(Member{false, ref.str(), ref.box, ref.port});
      for (const auto& b : outer[j]) members_[j].push_back(Member{true, b, {}, {}});
      std::vector<std::size_t> producers;
      for (std::size_t k = 0; k < members_[j].size(); ++k) {
        if (produces_effort(members_[j][k])) producers.push_back(k);
      }
      std::string listing;
      for (std::size_t k = 0; k < members_[j].size(); ++k) listing += (k ? ", " : "") + members_[j][k].name;
      if (producers.empty()) {
        throw Error(ErrorKind::underdetermined_junction,
                    "junction {" + listing + "} has no effort-determining port");
      }
      if (producers.size() > 1) {
        std::string who;
        for (std::size_t k = 0; k < producers.size(); ++k) who += (k ? ", " : "") + members_[j][producers[k]].name;
        throw Error(ErrorKind::overdetermined_junction,
                    "junction {" + listing + "} has several effort-determining ports: " + who);
      }
      determiner_[j] = producers.front();
      junction_effort_[j] = effort_signal(members_[j][determiner_[j]].name);
      for (const auto& m : members_[j]) junction_of_[m.name] = j;
    }
  }

  Expr effort_of(const std::string& box, const std::string& port) const {
    return Expr::symbol(junction_effort_[junction_of_.at(box + "." + port)]);
  }

  // Local symbols: port names are efforts, state names and parameters are
  // qualified by the primitive name, theta0 is shared.
  Expr localize(const Primitive& p, const Interface& iface, const Expr& e) const {
    std::map<std::string, Expr, std::less<>> bind;
    for (const auto& s : free_symbols(e)) {
      if (iface.find(s) != nullptr) {
        bind[s] = effort_of(p.name, s);
      } else if (s == kTheta0) {
        bind[s] = Expr::symbol(kTheta0);
      } else {
        bind[s] = Expr::symbol(p.name + "." + s);
      }
    }
    return substitute(e, bind);
  }

  void define(const std::string& signal, Expr value) {
    defs_.push_back(Assignment{signal, simplify(value)});
  }

  // The causal relation of each primitive port as one expression per
  // produced signal.
  void define_signals() {
    std::map<std::string, Expr> effort_defs;  // by determiner member name
    std::map<std::string, Expr> flow_defs;    // flow producers by member name

    for (const auto& p : sys_.primitives) {
      const Component& c = *p.component;
      if (const auto* s = std::get_if<StorageComponent>(&c.body)) {
        for (const auto& st : s->states) {
          effort_defs[p.name + "." + st.port] = localize(p, s->iface, differentiate(s->hamiltonian, st.name));
        }
      } else if (const auto* e = std::get_if<EnvironmentComponent>(&c.body)) {
        effort_defs[p.name + "." + e->iface.ports.front().name] = Expr::constant(0.0);
      } else if (const auto* d = std::get_if<DiracComponent>(&c.body)) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < d->iface.ports.size(); ++i) {
          if (d->causality[i] == Causality::effort_in) order.push_back(i);
        }
        for (std::size_t i = 0; i < d->iface.ports.size(); ++i) {
          if (d->causality[i] == Causality::flow_in) order.push_back(i);
        }
        std::vector<Expr> inputs;
        for (std::size_t i : order) {
          const std::string& port = d->iface.ports[i].name;
          inputs.push_back(d->causality[i] == Causality::effort_in ? effort_of(p.name, port)
                                                                    : Expr::symbol(flow_signal(p.name + "." + port)));
        }
        for (std::size_t r = 0; r < order.size(); ++r) {
          std::vector<Expr> terms;
          for (std::size_t k = 0; k < order.size(); ++k) {
            Expr entry = simplify(localize(p, d->iface, d->matrix[r][k]));
            if (entry.is_constant(0.0)) continue;
            terms.push_back(entry * inputs[k]);
          }
          const std::size_t i = order[r];
          const std::string member = p.name + "." + d->iface.ports[i].name;
          if (d->causality[i] == Causality::effort_in) {
            flow_defs[member] = sum_of(terms);
          } else {
            effort_defs[member] = sum_of(terms);
          }
        }
      } else if (const auto* r = std::get_if<ResistiveComponent>(&c.body)) {
        for (std::size_t i = 0; i < r->iface.ports.size(); ++i) {
          std::vector<Expr> terms;
          for (std::size_t k = 0; k < r->iface.ports.size(); ++k) {
            Expr entry = simplify(localize(p, r->iface, r->matrix[i][k]));
            if (entry.is_constant(0.0)) continue;
            terms.push_back(entry * effort_of(p.name, r->iface.ports[k].name));
          }
          flow_defs[p.name + "." + r->iface.ports[i].name] = sum_of(terms);
        }
      }
    }
    for (const auto& [name, b] : bindings_) {
      (b.kind == BindingKind::effort_source ? effort_defs : flow_defs)[name] = b.value;
    }

    // Junction efforts first, in junction order.
    for (std::size_t j = 0; j < members_.size(); ++j) {
      define(junction_effort_[j], effort_defs.at(members_[j][determiner_[j]].name));
    }
    // Flows, in junction order; the determiner's flow closes the balance
    //   sum(inner flows) = sum(boundary flows).
    for (std::size_t j = 0; j < members_.size(); ++j) {
      const Member& det = members_[j][determiner_[j]];
      std::vector<Expr> plus, minus;
      for (std::size_t k = 0; k < members_[j].size(); ++k) {
        const Member& m = members_[j][k];
        if (k == determiner_[j]) continue;
        define(flow_signal(m.name), flow_defs.at(m.name));
        Expr f = Expr::symbol(flow_signal(m.name));
        // Inner and boundary flows sit on opposite sides of the balance.
        (m.boundary == det.boundary ? minus : plus).push_back(f);
      }
      Expr solved = plus.empty() ? Expr::constant(0.0) : sum_of(plus);
      for (const auto& m : minus) solved = solved - m;
      define(flow_signal(det.name), solved);
    }

    // Derivatives.
    std::vector<Expr> env_flows;
    for (const auto& p : sys_.primitives) {
      if (const auto* s = std::get_if<StorageComponent>(&p.component->body)) {
        for (const auto& st : s->states) derivatives_.push_back(flow_signal(p.name + "." + st.port));
      } else if (const auto* e = std::get_if<EnvironmentComponent>(&p.component->body)) {
        env_flows.push_back(Expr::symbol(flow_signal(p.name + "." + e->iface.ports.front().name)));
      }
    }
    if (has_env_) {
      if (env_flows.size() == 1) {
        derivatives_.push_back(env_flows.front().name());
      } else {
        define("f[s_e]", sum_of(env_flows));
        derivatives_.push_back("f[s_e]");
      }
    }
  }

  // Kahn's algorithm; ties broken by definition order.
  std::vector<Assignment> schedule() const {
    const std::size_t n = defs_.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[defs_[i].signal] = i;
    std::vector<std::vector<std::size_t>> deps(n), users(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& s : free_symbols(defs_[i].value)) {
        auto it = index.find(s);
        if (it == index.end()) continue;
        deps[i].push_back(it->second);
        users[it->second].push_back(i);
      }
    }
    std::vector<std::size_t> pending(n);
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
      pending[i] = deps[i].size();
      if (pending[i] == 0) ready.insert(i);
    }
    std::vector<Assignment> out;
    while (!ready.empty()) {
      std::size_t i = *ready.begin();
      ready.erase(ready.begin());
      out.push_back(defs_[i]);
      for (std::size_t u : users[i]) {
        if (--pending[u] == 0) ready.insert(u);
      }
    }
    if (out.size() == n) return out;

    // Walk backwards along unresolved dependencies until a node repeats.
    std::size_t start = 0;
    while (pending[start] == 0) ++start;
    std::vector<std::size_t> path;
    std::map<std::size_t, std::size_t> pos;
    std::size_t cur = start;
    while (!pos.count(cur)) {
      pos[cur] = path.size();
      path.push_back(cur);
      for (std::size_t d : deps[cur]) {
        if (pending[d] != 0) {
          cur = d;
          break;
        }
      }
    }
    std::vector<std::string> cycle;
    for (std::size_t k = pos[cur]; k < path.size(); ++k) cycle.push_back(defs_[path[k]].signal);
    std::reverse(cycle.begin(), cycle.end());
    std::string msg = "algebraic loop: ";
    for (const auto& s : cycle) msg += s + " -> ";
    msg += cycle.front();
    throw Error(ErrorKind::algebraic_loop, msg);
  }

  std::vector<Monitor> monitors() const {
    std::vector<Monitor> out;
    auto e_of = [&](const std::string& member) { return Expr::symbol(junction_effort_[junction_of_.at(member)]); };
    auto f_of = [&](const std::string& member) { return Expr::symbol(flow_signal(member)); };

    std::vector<Expr> balance;
    std::vector<Monitor> per_component;
    std::vector<Expr> hamiltonians;
    std::vector<Expr> entropies;
    for (const auto& p : sys_.primitives) {
      const Component& c = *p.component;
      Interface iface = component_interface(c);
      std::vector<Expr> power;
      for (const auto& port : iface.ports) {
        std::string m = p.name + "." + port.name;
        power.push_back(e_of(m) * f_of(m));
      }
      switch (c.kind()) {
        case ComponentKind::dirac:
          per_component.push_back(Monitor{"power[" + p.name + "]", MonitorKind::dirac_power, {sum_of(power)}});
          break;
        case ComponentKind::resistive:
          per_component.push_back(Monitor{"dissipation[" + p.name + "]", MonitorKind::dissipation, {sum_of(power)}});
          balance.insert(balance.end(), power.begin(), power.end());
          break;
        case ComponentKind::storage: {
          balance.insert(balance.end(), power.begin(), power.end());
          const auto& s = std::get<StorageComponent>(c.body);
          hamiltonians.push_back(localize(p, s.iface, s.hamiltonian));
          for (const auto& st : s.states) {
            if (has_env_ && s.iface.find(st.port)->type == thermal_type_) {
              entropies.push_back(Expr::symbol(p.name + "." + st.name));
            }
          }
          break;
        }
        default:
          balance.insert(balance.end(), power.begin(), power.end());
          break;
      }
    }
    Expr residual = sum_of(balance);
    for (const auto& b : sys_.diagram.boundary) residual = residual - e_of(b.name) * f_of(b.name);
    out.push_back(Monitor{"power_balance", MonitorKind::power_balance, {simplify(residual)}});

    Monitor junctions{"junction_balance", MonitorKind::junction_balance, {}};
    for (std::size_t j = 0; j < members_.size(); ++j) {
      Expr r = Expr::constant(0.0);
      for (const auto& m : members_[j]) r = m.boundary ? r - f_of(m.name) : r + f_of(m.name);
      junctions.terms.push_back(simplify(r));
    }
    if (junctions.terms.empty()) junctions.terms.push_back(Expr::constant(0.0));
    out.push_back(junctions);
    for (auto& m : per_component) {
      m.terms.front() = simplify(m.terms.front());
      out.push_back(m);
    }

    Expr exergy = simplify(sum_of(hamiltonians));
    out.push_back(Monitor{"exergy", MonitorKind::exergy, {exergy}});
    if (has_env_) {
      entropies.push_back(Expr::symbol("s_e"));
      Expr entropy = sum_of(entropies);
      out.push_back(Monitor{"entropy", MonitorKind::entropy, {entropy}});
      if (params_.count(kTheta0)) {
        out.push_back(
            Monitor{"energy", MonitorKind::energy, {simplify(exergy + Expr::symbol(kTheta0) * entropy)}});
      }
    }
    return out;
  }

  void compile(FlatSystem& sys) const {
    auto prog = std::make_shared<FlatProgram>();
    std::map<std::string, int, std::less<>> slot;
    int next = 0;
    slot["t"] = next++;
    for (const auto& [k, v] : sys.parameters) {
      prog->param_names.push_back(k);
      slot[k] = next++;
    }
    prog->state_offset = static_cast<std::size_t>(next);
    for (const auto& s : sys.states) slot[s] = next++;
    prog->signal_offset = static_cast<std::size_t>(next);
    for (const auto& a : sys.schedule) slot[a.signal] = next++;
    auto slot_of = [&](const std::string& s) {
      auto it = slot.find(s);
      return it == slot.end() ? -1 : it->second;
    };
    for (const auto& a : sys.schedule) {
      for (const auto& s : free_symbols(a.value)) {
        if (slot_of(s) < 0) throw Error(ErrorKind::unbound_symbol, "signal " + a.signal + " uses unbound symbol '" + s + "'");
      }
      prog->schedule.emplace_back(a.value, slot_of);
    }
    for (const auto& d : sys.derivatives) prog->derivative_slots.push_back(static_cast<std::size_t>(slot_of(d)));
    for (const auto& m : sys.monitors) {
      std::vector<CompiledExpr> terms;
      for (const auto& t : m.terms) terms.emplace_back(t, slot_of);
      prog->monitors.push_back(std::move(terms));
    }
    sys.program = std::move(prog);
  }

  const InlinedSystem& sys_;
  const Bindings& bindings_;
  Params params_;
  std::vector<std::string> state_names_;
  std::vector<double> initial_;
  bool has_env_ = false;
  std::string thermal_type_;
  std::vector<std::vector<Member>> members_;
  std::vector<std::size_t> determiner_;
  std::vector<std::string> junction_effort_;
  std::map<std::string, std::size_t> junction_of_;
  std::vector<Assignment> defs_;
  std::vector<std::string> derivatives_;
};

}  // namespace

FlatSystem assign_causality(const InlinedSystem& sys, const Bindings& bindings) {
  return Builder(sys, bindings).run();
}

FlatSystem flatten(const Component& c, const Bindings& bindings) {
  return assign_causality(inline_composite(c), bindings);
}

std::size_t FlatSystem::state_index(const std::string& name) const {
  auto it = std::find(states.begin(), states.end(), name);
  if (it == states.end()) throw Error(ErrorKind::unknown_reference, "no state named '" + name + "'");
  return static_cast<std::size_t>(it - states.begin());
}

std::size_t FlatSystem::monitor_index(const std::string& name) const {
  for (std::size_t i = 0; i < monitors.size(); ++i) {
    if (monitors[i].name == name) return i;
  }
  throw Error(ErrorKind::unknown_reference, "no monitor named '" + name + "'");
}

void FlatSystem::set_parameter(const std::string& name, double value) {
  auto it = parameters.find(name);
  if (it == parameters.end()) throw Error(ErrorKind::unknown_reference, "no parameter named '" + name + "'");
  it->second = value;
}

// ---------------------------------------------------------------------------
// Evaluation

Evaluator::Evaluator(const FlatSystem& sys) : sys_(&sys) {
  const FlatProgram& p = *sys.program;
  slots_.assign(p.signal_offset + p.schedule.size(), 0.0);
  for (std::size_t i = 0; i < p.param_names.size(); ++i) slots_[1 + i] = sys.parameters.at(p.param_names[i]);
}

void Evaluator::run_schedule(std::span<const double> state, double t) {
  const FlatProgram& p = *sys_->program;
  if (state.size() != sys_->states.size()) {
    throw Error(ErrorKind::invalid_config, "state vector has length " + std::to_string(state.size()) + ", expected " +
                                               std::to_string(sys_->states.size()));
  }
  slots_[0] = t;
  std::copy(state.begin(), state.end(), slots_.begin() + static_cast<std::ptrdiff_t>(p.state_offset));
  for (std::size_t i = 0; i < p.schedule.size(); ++i) {
    try {
      slots_[p.signal_offset + i] = p.schedule[i](slots_, stack_);
    } catch (const Error& e) {
      throw Error(e.kind(), "while computing " + sys_->schedule[i].signal + ": " + e.message());
    }
  }
}

void Evaluator::derivative(std::span<const double> state, double t, std::span<double> out) {
  run_schedule(state, t);
  const FlatProgram& p = *sys_->program;
  for (std::size_t i = 0; i < p.derivative_slots.size(); ++i) out[i] = slots_[p.derivative_slots[i]];
}

void Evaluator::monitors(std::span<const double> state, double t, std::span<double> out) {
  run_schedule(state, t);
  const FlatProgram& p = *sys_->program;
  for (std::size_t i = 0; i < p.monitors.size(); ++i) {
    const auto& terms = p.monitors[i];
    if (terms.size() == 1) {
      out[i] = terms.front()(slots_, stack_);
      continue;
    }
    double worst = 0.0;
    for (const auto& term : terms) worst = std::max(worst, std::abs(term(slots_, stack_)));
    out[i] = worst;
  }
}

RhsValue rhs(const FlatSystem& sys, std::span<const double> state, double t) {
  Evaluator ev(sys);
  RhsValue out;
  out.derivative.resize(sys.states.size());
  out.monitors.resize(sys.monitors.size());
  ev.derivative(state, t, out.derivative);
  ev.monitors(state, t, out.monitors);
  return out;
}

// ---------------------------------------------------------------------------
// Listings

std::vector<std::pair<std::string, Expr>> eliminated_derivatives(const FlatSystem& sys) {
  std::map<std::string, Expr, std::less<>> expanded;
  for (const auto& a : sys.schedule) expanded[a.signal] = simplify(substitute(a.value, expanded));
  std::vector<std::pair<std::string, Expr>> out;
  for (std::size_t i = 0; i < sys.states.size(); ++i) out.emplace_back(sys.states[i], expanded.at(sys.derivatives[i]));
  return out;
}

std::string equation_listing(const FlatSystem& sys) {
  std::ostringstream os;
  os << "# states\n";
  for (std::size_t i = 0; i < sys.states.size(); ++i) {
    os << sys.states[i] << "(0) = " << format_number(sys.initial[i]) << "\n";
  }
  os << "# parameters\n";
  for (const auto& [k, v] : sys.parameters) os << k << " = " << format_number(v) << "\n";
  os << "# schedule\n";
  for (const auto& a : sys.schedule) os << a.signal << " := " << to_string(a.value) << "\n";
  os << "# derivatives\n";
  for (const auto& [state, e] : eliminated_derivatives(sys)) os << "d(" << state << ")/dt = " << to_string(e) << "\n";
  return os.str();
}

std::string csv_header(const FlatSystem& sys) {
  std::string out = "t";
  for (const auto& s : sys.states) out += "," + s;
  for (const auto& m : sys.monitors) out += "," + m.name;
  return out;
}

std::vector<std::string> normalized_form(const FlatSystem& sys) {
  std::vector<std::string> out;
  for (const auto& a : sys.schedule) out.push_back(a.signal + " := " + to_string(a.value));
  for (const auto& [state, e] : eliminated_derivatives(sys)) out.push_back("d(" + state + ")/dt = " + to_string(e));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ephs
