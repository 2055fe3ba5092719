#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ephs/diagram.hpp"
#include "ephs/expr.hpp"
#include "ephs/semantics.hpp"

namespace ephs {

enum class BindingKind { effort_source, flow_source };

// Boundary ports of an open system are driven by an expression over `t`,
// `theta0` and the flattened parameters. Flows of boundary ports are measured
// into the composite.
struct BoundaryBinding {
  BindingKind kind = BindingKind::effort_source;
  Expr value;
};
using Bindings = std::map<std::string, BoundaryBinding>;

struct Primitive {
  std::string name;  // leaf label when unique among all primitives, else `path`
  std::string path;  // dotted box labels from the root
  ComponentPtr component;
};

// A hierarchy with every composite substituted away. Box labels of `diagram`
// are primitive names.
struct InlinedSystem {
  Diagram diagram;
  std::vector<Primitive> primitives;  // sorted by name

  const Primitive* find(const std::string& name) const;
};

InlinedSystem inline_composite(const Component& c);

enum class MonitorKind { power_balance, dirac_power, dissipation, junction_balance, exergy, entropy, energy };

std::string_view to_string(MonitorKind k);

// A scalar observed along trajectories. With one term the value is that term;
// with several (junction balance) it is the largest absolute term.
struct Monitor {
  std::string name;
  MonitorKind kind;
  std::vector<Expr> terms;
};

struct Assignment {
  std::string signal;
  Expr value;
};

class FlatProgram;

// Explicit ODE: the schedule assigns signals in dependency order from t,
// parameters, states and earlier signals; each state's derivative is a
// signal.
struct FlatSystem {
  std::vector<std::string> states;
  std::vector<double> initial;
  Params parameters;
  std::vector<std::string> junction_efforts;
  std::vector<Assignment> schedule;
  std::vector<std::string> derivatives;  // parallel to states
  std::vector<Monitor> monitors;
  bool has_environment = false;

  std::shared_ptr<const FlatProgram> program;

  std::size_t state_index(const std::string& name) const;
  std::size_t monitor_index(const std::string& name) const;
  // Changes a parameter value; the structure is unaffected.
  void set_parameter(const std::string& name, double value);
};

// Scheduling step on an inlined system. Throws overdetermined_junction,
// underdetermined_junction, algebraic_loop, unbound_boundary,
// parameter_mismatch, unbound_symbol.
FlatSystem assign_causality(const InlinedSystem& sys, const Bindings& bindings = {});

FlatSystem flatten(const Component& c, const Bindings& bindings = {});

struct RhsValue {
  std::vector<double> derivative;
  std::vector<double> monitors;
};

// Reusable evaluator holding its scratch space; not thread-safe, but cheap to
// create one per thread.
class Evaluator {
 public:
  explicit Evaluator(const FlatSystem& sys);

  void derivative(std::span<const double> state, double t, std::span<double> out);
  void monitors(std::span<const double> state, double t, std::span<double> out);

 private:
  void run_schedule(std::span<const double> state, double t);

  const FlatSystem* sys_;
  std::vector<double> slots_;
  std::vector<double> stack_;
};

RhsValue rhs(const FlatSystem& sys, std::span<const double> state, double t);

// Every derivative with all signals substituted and simplified.
std::vector<std::pair<std::string, Expr>> eliminated_derivatives(const FlatSystem& sys);

// Human-readable listing: states, parameters, schedule, eliminated
// derivatives.
std::string equation_listing(const FlatSystem& sys);

std::string csv_header(const FlatSystem& sys);

// Sorted lines of the schedule and the eliminated derivatives. Systems with
// equal normal forms compute the same right-hand side.
std::vector<std::string> normalized_form(const FlatSystem& sys);

}  // namespace ephs
