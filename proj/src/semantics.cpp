#include "ephs/semantics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ephs/operad.hpp"

namespace ephs {

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::storage: return "storage";
    case ComponentKind::dirac: return "dirac";
    case ComponentKind::resistive: return "resistive";
    case ComponentKind::environment: return "environment";
    case ComponentKind::composite: return "composite";
  }
  return "?";
}

std::string_view to_string(Causality c) { return c == Causality::effort_in ? "effort_in" : "flow_in"; }

const Params* Component::params() const {
  return std::visit(
      [](const auto& b) -> const Params* {
        if constexpr (requires { b.params; }) {
          return &b.params;
        } else {
          return nullptr;
        }
      },
      body);
}

Interface component_interface(const Component& c) {
  if (const auto* comp = std::get_if<CompositeComponent>(&c.body)) return boundary_interface(comp->diagram, c.name);
  Interface i = std::visit(
      [](const auto& b) -> Interface {
        if constexpr (requires { b.iface; }) {
          return b.iface;
        } else {
          return {};
        }
      },
      c.body);
  i.label = c.name;
  return i;
}

std::vector<std::vector<double>> eval_matrix(const Matrix& m, const Env& env) {
  std::vector<std::vector<double>> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i].reserve(m[i].size());
    for (const auto& entry : m[i]) out[i].push_back(eval(entry, env));
  }
  return out;
}

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& component, const std::string& msg) {
  throw Error(kind, "component '" + component + "': " + msg);
}

void check_ports(const std::string& name, const Interface& iface, const Params& params) {
  std::set<std::string> seen;
  for (const auto& p : iface.ports) {
    if (!seen.insert(p.name).second) fail(ErrorKind::duplicate_name, name, "duplicate port '" + p.name + "'");
    if (params.count(p.name)) {
      fail(ErrorKind::duplicate_name, name, "parameter '" + p.name + "' shadows a port of the same name");
    }
  }
}

void check_symbols(const std::string& name, const Expr& e, const std::set<std::string>& allowed,
                   const std::string& where) {
  for (const auto& s : free_symbols(e)) {
    if (!allowed.count(s)) fail(ErrorKind::unbound_symbol, name, "unbound symbol '" + s + "' in " + where);
  }
}

void check_square(const std::string& name, const Matrix& m, std::size_t n) {
  bool ok = m.size() == n;
  for (const auto& row : m) ok = ok && row.size() == n;
  if (!ok) {
    fail(ErrorKind::bad_port_binding, name,
         "matrix must be " + std::to_string(n) + "x" + std::to_string(n) + " to match the port count");
  }
}

std::set<std::string> port_and_param_names(const Interface& iface, const Params& params) {
  std::set<std::string> out;
  for (const auto& p : iface.ports) out.insert(p.name);
  for (const auto& [k, v] : params) out.insert(k);
  return out;
}

// Port names referenced by any of the expressions; these are sampled.
std::vector<std::string> referenced_ports(const Interface& iface, const std::vector<const Expr*>& exprs) {
  std::set<std::string> used;
  for (const Expr* e : exprs) {
    auto s = free_symbols(*e);
    used.insert(s.begin(), s.end());
  }
  std::vector<std::string> out;
  for (const auto& p : iface.ports) {
    if (used.count(p.name)) out.push_back(p.name);
  }
  return out;
}

std::string describe_point(const Env& env) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [k, v] : env) {
    os << (first ? "" : ", ") << k << "=" << format_number(v);
    first = false;
  }
  os << "}";
  return os.str();
}

// Calls `check(env, M)` at `opt.samples` points where the matrix evaluates.
template <typename Check>
void for_each_sample(const std::string& name, const Interface& iface, const Params& params, const Matrix& m,
                     const std::vector<const Expr*>& extra, const CheckOptions& opt, Check&& check) {
  std::vector<const Expr*> exprs = extra;
  for (const auto& row : m) {
    for (const auto& e : row) exprs.push_back(&e);
  }
  auto sampled = referenced_ports(iface, exprs);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-opt.effort_range, opt.effort_range);
  int accepted = 0;
  const int max_attempts = 20 * opt.samples;
  for (int attempt = 0; attempt < max_attempts && accepted < opt.samples; ++attempt) {
    Env env(params.begin(), params.end());
    for (const auto& p : sampled) env[p] = dist(rng);
    std::vector<std::vector<double>> values;
    try {
      values = eval_matrix(m, env);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::division_by_zero || e.kind() == ErrorKind::domain_error) continue;
      throw;
    }
    check(env, values);
    ++accepted;
  }
  if (accepted < opt.samples) {
    fail(ErrorKind::domain_error, name,
         "matrix is undefined at too many sample points (" + std::to_string(accepted) + " of " +
             std::to_string(opt.samples) + " usable)");
  }
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& v) {
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v[i][j];
  }
  return m;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void verify_storage(const std::string& name, const StorageComponent& s) {
  check_ports(name, s.iface, s.params);
  std::set<std::string> bound_ports, state_names;
  std::set<std::string> allowed;
  for (const auto& [k, v] : s.params) allowed.insert(k);
  for (const auto& st : s.states) {
    if (s.iface.find(st.port) == nullptr) {
      fail(ErrorKind::bad_port_binding, name, "state '" + st.name + "' is bound to unknown port '" + st.port + "'");
    }
    if (!bound_ports.insert(st.port).second) {
      fail(ErrorKind::bad_port_binding, name, "port '" + st.port + "' is bound to more than one state");
    }
    if (!state_names.insert(st.name).second || s.params.count(st.name) || s.iface.find(st.name)) {
      fail(ErrorKind::duplicate_name, name, "duplicate state name '" + st.name + "'");
    }
    allowed.insert(st.name);
  }
  for (const auto& p : s.iface.ports) {
    if (!bound_ports.count(p.name)) fail(ErrorKind::bad_port_binding, name, "port '" + p.name + "' has no state");
  }
  check_symbols(name, s.hamiltonian, allowed, "hamiltonian");
}

void verify_dirac(const std::string& name, const DiracComponent& d, const CheckOptions& opt) {
  check_ports(name, d.iface, d.params);
  if (d.causality.size() != d.iface.ports.size()) {
    fail(ErrorKind::bad_port_binding, name, "every port needs exactly one causality");
  }
  const std::size_t n = d.iface.ports.size();
  check_square(name, d.matrix, n);
  auto allowed = port_and_param_names(d.iface, d.params);
  for (const auto& row : d.matrix) {
    for (const auto& e : row) check_symbols(name, e, allowed, "matrix");
  }
  for_each_sample(name, d.iface, d.params, d.matrix, {}, opt, [&](const Env& env, const auto& values) {
    Eigen::MatrixXd m = to_eigen(values);
    double scale = std::max(1.0, max_abs(m));
    double defect = max_abs(m + m.transpose());
    if (!(defect <= opt.symmetry_tol * scale)) {
      fail(ErrorKind::skew_violation, name,
           "matrix is not skew-symmetric (|M^T + M| = " + format_number(defect) + ") at " + describe_point(env));
    }
  });
}

void verify_resistive(const std::string& name, const ResistiveComponent& r, const CheckOptions& opt) {
  check_ports(name, r.iface, r.params);
  const std::size_t n = r.iface.ports.size();
  check_square(name, r.matrix, n);
  auto allowed = port_and_param_names(r.iface, r.params);
  for (const auto& row : r.matrix) {
    for (const auto& e : row) check_symbols(name, e, allowed, "matrix");
  }
  std::vector<const Expr*> extra;
  if (r.kernel) {
    if (r.kernel->size() != n) fail(ErrorKind::bad_port_binding, name, "kernel witness length must equal the port count");
    for (const auto& e : *r.kernel) {
      check_symbols(name, e, allowed, "kernel");
      extra.push_back(&e);
    }
  }
  for_each_sample(name, r.iface, r.params, r.matrix, extra, opt, [&](const Env& env, const auto& values) {
    Eigen::MatrixXd m = to_eigen(values);
    double scale = max_abs(m);
    double defect = max_abs(m - m.transpose());
    if (!(defect <= opt.symmetry_tol * std::max(1.0, scale))) {
      fail(ErrorKind::symmetry_violation, name,
           "matrix is not symmetric (|M^T - M| = " + format_number(defect) + ") at " + describe_point(env));
    }
    if (n == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    double lowest = eig.eigenvalues().minCoeff();
    if (!(lowest >= -opt.psd_tol * norm)) {
      fail(ErrorKind::not_psd, name,
           "matrix has negative eigenvalue " + format_number(lowest) + " at " + describe_point(env));
    }
    if (r.kernel) {
      Eigen::VectorXd w(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = eval((*r.kernel)[i], env);
      double residual = (m * w).norm();
      if (!(residual <= opt.kernel_tol * norm * w.norm())) {
        fail(ErrorKind::kernel_violation, name,
             "kernel witness is not annihilated (|M w| = " + format_number(residual) + ") at " + describe_point(env));
      }
    }
  });
}

void verify_environment(const std::string& name, const EnvironmentComponent& e) {
  check_ports(name, e.iface, e.params);
  if (e.iface.ports.size() != 1) fail(ErrorKind::bad_port_binding, name, "an environment has exactly one port");
}

void verify(const Component& c, const CheckOptions& opt) {
  if (c.unchecked) return;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, StorageComponent>) {
          verify_storage(c.name, b);
        } else if constexpr (std::is_same_v<T, DiracComponent>) {
          verify_dirac(c.name, b, opt);
        } else if constexpr (std::is_same_v<T, ResistiveComponent>) {
          verify_resistive(c.name, b, opt);
        } else if constexpr (std::is_same_v<T, EnvironmentComponent>) {
          verify_environment(c.name, b);
        } else {
          for (const auto& [label, filler] : b.fillers) verify(*filler, opt);
        }
      },
      c.body);
}

template <typename T>
ComponentPtr make_checked(std::string name, T body, const CheckOptions& opt) {
  auto c = std::make_shared<Component>(Component{std::move(name), std::move(body), false});
  verify(*c, opt);
  return c;
}

}  // namespace

ComponentPtr make_storage(std::string name, StorageComponent s, const CheckOptions& opt) {
  return make_checked(std::move(name), std::move(s), opt);
}
ComponentPtr make_dirac(std::string name, DiracComponent d, const CheckOptions& opt) {
  return make_checked(std::move(name), std::move(d), opt);
}
ComponentPtr make_resistive(std::string name, ResistiveComponent r, const CheckOptions& opt) {
  return make_checked(std::move(name), std::move(r), opt);
}
ComponentPtr make_environment(std::string name, EnvironmentComponent e, const CheckOptions& opt) {
  return make_checked(std::move(name), std::move(e), opt);
}

ComponentPtr make_unchecked(std::string name, Component body) {
  body.name = std::move(name);
  body.unchecked = true;
  return std::make_shared<Component>(std::move(body));
}

void check_structure(const Component& c, const CheckOptions& opt) { verify(c, opt); }

ComponentPtr fill(std::string name, const Diagram& diagram, std::map<std::string, ComponentPtr> fillers) {
  require_valid(diagram, "diagram of '" + name + "'");
  for (const auto& [label, filler] : fillers) {
    if (!diagram.boxes.count(label)) {
      throw Error(ErrorKind::unknown_label, "'" + name + "' fills unknown box '" + label + "'");
    }
  }
  for (const auto& [label, box] : diagram.boxes) {
    auto it = fillers.find(label);
    if (it == fillers.end() || !it->second) {
      throw Error(ErrorKind::missing_filler, "box '" + label + "' of '" + name + "' has no filler");
    }
    InterfaceMatch m = check_interface_match(box, component_interface(*it->second));
    if (!m.ok()) {
      throw Error(ErrorKind::interface_mismatch,
                  "filler '" + it->second->name + "' does not fit box '" + label + "': " + m.str());
    }
  }
  return std::make_shared<Component>(
      Component{std::move(name), CompositeComponent{diagram, std::move(fillers)}, false});
}

}  // namespace ephs
