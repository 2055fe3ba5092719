#include <functional>

#include "doctest.h"
#include "ephs/error.hpp"
#include "ephs/semantics.hpp"

using namespace ephs;

namespace {

Matrix matrix(std::initializer_list<std::initializer_list<const char*>> rows) {
  Matrix m;
  for (const auto& row : rows) {
    m.emplace_back();
    for (const char* cell : row) m.back().push_back(parse_expr(cell));
  }
  return m;
}

Interface pair(const std::string& a = "a", const std::string& b = "b") {
  return Interface{"Pair", {{a, "mom"}, {b, "mom"}}};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ephs::Error");
  return ErrorKind::io;
}

ResistiveComponent damper(const char* kernel_second = "theta0") {
  ResistiveComponent r;
  r.iface = Interface{"Damper", {{"mech", "mom"}, {"thermal", "ent"}}};
  r.matrix = matrix({{"d", "-(d*mech/theta0)"}, {"-(d*mech/theta0)", "d*mech^2/theta0^2"}});
  r.kernel = std::vector<Expr>{parse_expr("mech"), parse_expr(kernel_second)};
  r.params = {{"d", 0.5}, {"theta0", 300}};
  return r;
}

}  // namespace

TEST_CASE("skew Dirac structures are accepted, symmetric ones rejected") {
  DiracComponent ok{pair(), {Causality::effort_in, Causality::flow_in}, matrix({{"0", "k"}, {"-k", "0"}}), {{"k", 2}}};
  CHECK(make_dirac("gyr", ok)->kind() == ComponentKind::dirac);

  DiracComponent bad = ok;
  bad.matrix = matrix({{"0", "1"}, {"1", "0"}});
  CHECK(kind_of([&] { make_dirac("swap", bad); }) == ErrorKind::skew_violation);

  DiracComponent diag = ok;
  diag.matrix = matrix({{"1e-3", "1"}, {"-1", "0"}});
  CHECK(kind_of([&] { make_dirac("leak", diag); }) == ErrorKind::skew_violation);

  DiracComponent state_dependent = ok;
  state_dependent.matrix = matrix({{"0", "a*b"}, {"-(a*b)", "0"}});
  CHECK_NOTHROW(make_dirac("modulated", state_dependent));

  DiracComponent ragged = ok;
  ragged.matrix = matrix({{"0", "1"}});
  CHECK(kind_of([&] { make_dirac("ragged", ragged); }) == ErrorKind::bad_port_binding);
}

TEST_CASE("resistive structures must be symmetric, PSD and annihilate the witness") {
  CHECK_NOTHROW(make_resistive("damping", damper()));

  ResistiveComponent wrong_kernel = damper("1");
  CHECK(kind_of([&] { make_resistive("damping", wrong_kernel); }) == ErrorKind::kernel_violation);

  ResistiveComponent asym = damper();
  asym.matrix[0][1] = parse_expr("0");
  CHECK(kind_of([&] { make_resistive("damping", asym); }) == ErrorKind::symmetry_violation);

  ResistiveComponent indefinite;
  indefinite.iface = pair();
  indefinite.matrix = matrix({{"1", "0"}, {"0", "-r"}});
  indefinite.params = {{"r", 0.25}};
  CHECK(kind_of([&] { make_resistive("pump", indefinite); }) == ErrorKind::not_psd);

  ResistiveComponent semidefinite;
  semidefinite.iface = pair();
  semidefinite.matrix = matrix({{"1", "1"}, {"1", "1"}});
  CHECK_NOTHROW(make_resistive("coupling", semidefinite));

  ResistiveComponent negative_param = damper();
  negative_param.params["d"] = -0.5;
  CHECK(kind_of([&] { make_resistive("damping", negative_param); }) == ErrorKind::not_psd);
}

TEST_CASE("storage components bind every port to exactly one state") {
  StorageComponent s;
  s.iface = Interface{"Spring", {{"pot", "disp"}}};
  s.states = {StateVar{"q", "pot", 1.0}};
  s.hamiltonian = parse_expr("q^2/(2*c)");
  s.params = {{"c", 1}};
  CHECK_NOTHROW(make_storage("spring", s));

  StorageComponent missing = s;
  missing.states.clear();
  CHECK(kind_of([&] { make_storage("spring", missing); }) == ErrorKind::bad_port_binding);

  StorageComponent unknown = s;
  unknown.states[0].port = "kin";
  CHECK(kind_of([&] { make_storage("spring", unknown); }) == ErrorKind::bad_port_binding);

  StorageComponent unbound = s;
  unbound.hamiltonian = parse_expr("q^2/(2*k)");
  CHECK(kind_of([&] { make_storage("spring", unbound); }) == ErrorKind::unbound_symbol);

  StorageComponent shadow = s;
  shadow.params["pot"] = 1;
  CHECK(kind_of([&] { make_storage("spring", shadow); }) == ErrorKind::duplicate_name);
}

TEST_CASE("environments have a single port") {
  EnvironmentComponent e{Interface{"Env", {{"heat", "ent"}}}, 0.0, {{"theta0", 300}}};
  CHECK(make_environment("env", e)->kind() == ComponentKind::environment);
  e.iface.ports.push_back({"extra", "ent"});
  CHECK(kind_of([&] { make_environment("env", e); }) == ErrorKind::bad_port_binding);
}

TEST_CASE("unchecked components skip the structural checks") {
  DiracComponent bad{pair(), {Causality::flow_in, Causality::flow_in}, matrix({{"0", "1"}, {"1", "0"}}), {}};
  Component c{"swap", bad, false};
  ComponentPtr p = make_unchecked("swap", c);
  CHECK(p->unchecked);
  CHECK_NOTHROW(check_structure(*p));
}

TEST_CASE("fill checks labels, coverage and interfaces") {
  StorageComponent s;
  s.iface = Interface{"Spring", {{"pot", "disp"}}};
  s.states = {StateVar{"q", "pot", 1.0}};
  s.hamiltonian = parse_expr("q^2/2");
  ComponentPtr spring = make_storage("spring", s);

  Diagram d;
  d.boxes["k"] = Interface{"Spring", {{"pot", "disp"}}};
  d.junction_types = {"disp"};
  d.port_junction[{"k", "pot"}] = 0;
  d.boundary = {BoundaryPort{"x", "disp", 0}};

  ComponentPtr c = fill("wrapped", d, {{"k", spring}});
  CHECK(c->kind() == ComponentKind::composite);
  CHECK(component_interface(*c).ports == std::vector<Port>{{"x", "disp"}});

  CHECK(kind_of([&] { fill("w", d, {}); }) == ErrorKind::missing_filler);
  CHECK(kind_of([&] { fill("w", d, {{"k", spring}, {"z", spring}}); }) == ErrorKind::unknown_label);

  d.boxes["k"].ports[0].type = "mom";
  d.junction_types = {"mom"};
  d.boundary[0].type = "mom";
  CHECK(kind_of([&] { fill("w", d, {{"k", spring}}); }) == ErrorKind::interface_mismatch);
}

TEST_CASE("eval_matrix evaluates every entry") {
  auto m = eval_matrix(matrix({{"a", "2*a"}, {"0", "a^2"}}), {{"a", 3}});
  CHECK(m == std::vector<std::vector<double>>{{3, 6}, {0, 9}});
}
