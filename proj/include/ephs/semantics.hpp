#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ephs/diagram.hpp"
#include "ephs/error.hpp"
#include "ephs/expr.hpp"

namespace ephs {

using Params = std::map<std::string, double, std::less<>>;
using Matrix = std::vector<std::vector<Expr>>;

// Name of the reference temperature shared by every component of a model.
inline constexpr const char* kTheta0 = "theta0";

enum class Causality { effort_in, flow_in };

enum class ComponentKind { storage, dirac, resistive, environment, composite };

std::string_view to_string(ComponentKind kind);
std::string_view to_string(Causality c);

struct StateVar {
  std::string name;
  std::string port;
  double initial = 0.0;

  friend bool operator==(const StateVar&, const StateVar&) = default;
};

// effort(port) = dH/d(state), flow into port = d(state)/dt.
struct StorageComponent {
  Interface iface;
  std::vector<StateVar> states;
  Expr hamiltonian;
  Params params;
};

// Inputs u: efforts of effort_in ports, then flows of flow_in ports, each in
// declared port order. Outputs y = M u: flows of effort_in ports, then
// efforts of flow_in ports, in the same order. Entries may reference port
// efforts by port name and parameters by name.
struct DiracComponent {
  Interface iface;
  std::vector<Causality> causality;  // parallel to iface.ports
  Matrix matrix;
  Params params;
};

// f = M(e) e with every port effort_in.
struct ResistiveComponent {
  Interface iface;
  Matrix matrix;
  std::optional<std::vector<Expr>> kernel;
  Params params;
};

// One port with constant zero effort; flow into the port accumulates into the
// model's single environment entropy.
struct EnvironmentComponent {
  Interface iface;
  double initial_entropy = 0.0;
  Params params;
};

struct Component;
using ComponentPtr = std::shared_ptr<const Component>;

struct CompositeComponent {
  Diagram diagram;
  std::map<std::string, ComponentPtr> fillers;
};

struct Component {
  std::string name;
  std::variant<StorageComponent, DiracComponent, ResistiveComponent, EnvironmentComponent, CompositeComponent> body;
  // Skips the structural checks; only meant for fault-injection fixtures.
  bool unchecked = false;

  ComponentKind kind() const { return static_cast<ComponentKind>(body.index()); }
  bool is_primitive() const { return kind() != ComponentKind::composite; }
  const Params* params() const;
};

// Interface presented to a host box: primitives expose their declared ports,
// composites their diagram boundary.
Interface component_interface(const Component& c);

struct CheckOptions {
  int samples = 64;
  unsigned long long seed = 0x5eed;
  double effort_range = 10.0;
  double symmetry_tol = 1e-12;
  double psd_tol = 1e-10;
  double kernel_tol = 1e-10;
};

// Each constructor verifies the per-kind invariants and throws
// ephs::Error(skew_violation | symmetry_violation | not_psd | kernel_violation
// | bad_port_binding | unbound_symbol | duplicate_name) naming the sample point.
ComponentPtr make_storage(std::string name, StorageComponent s, const CheckOptions& opt = {});
ComponentPtr make_dirac(std::string name, DiracComponent d, const CheckOptions& opt = {});
ComponentPtr make_resistive(std::string name, ResistiveComponent r, const CheckOptions& opt = {});
ComponentPtr make_environment(std::string name, EnvironmentComponent e, const CheckOptions& opt = {});

// Wraps a primitive body without any checks.
ComponentPtr make_unchecked(std::string name, Component body);

// Throws missing_filler, unknown_label or interface_mismatch.
ComponentPtr fill(std::string name, const Diagram& diagram, std::map<std::string, ComponentPtr> fillers);

// Re-runs the checks of a primitive component, or of every primitive below a
// composite.
void check_structure(const Component& c, const CheckOptions& opt = {});

// Dirac matrix and resistive matrix evaluated at one point. `env` binds port
// names to efforts and parameter names to values.
std::vector<std::vector<double>> eval_matrix(const Matrix& m, const Env& env);

}  // namespace ephs
