#include <cmath>
#include <filesystem>
#include <functional>
#include <random>

#include "doctest.h"
#include "ephs/dsl.hpp"
#include "ephs/error.hpp"
#include "ephs/flatten.hpp"

using namespace ephs;

namespace {

const std::filesystem::path kModels = EPHS_MODELS_DIR;
const std::filesystem::path kFixtures = EPHS_FIXTURES_DIR;

FlatSystem flat(const std::filesystem::path& file, const std::string& system) {
  Model m = load_model_file(file);
  ResolvedSystem rs = m.system(system);
  return flatten(*rs.component, rs.bindings);
}

Model inline_model(const std::string& text) { return resolve(parse_model(text, (kModels / "inline.ephs").string())); }

std::vector<double> state_of(const FlatSystem& sys, std::map<std::string, double> values) {
  std::vector<double> x(sys.states.size(), 0.0);
  for (const auto& [name, v] : values) x[sys.state_index(name)] = v;
  return x;
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

const char* kTwoStorages = R"(
use "common.ephs"
diagram clash {
  box a : Mass
  box b : Mass
  junction k : momentum
  bond a.kin -- k
  bond b.kin -- k
}
component m : storage for Mass {
  state p : kin = 0
  hamiltonian p^2/2
}
system clash {
  diagram clash
  fill a = m
  fill b = m
}
)";

}  // namespace

TEST_CASE("oscillator right-hand side at hand-computed states") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  REQUIRE(sys.states == std::vector<std::string>{"mass.p", "spring.q", "s_e"});

  // q = 1, p = 0: the spring pushes, nothing dissipates.
  auto r = rhs(sys, state_of(sys, {{"spring.q", 1}}), 0);
  CHECK(r.derivative[sys.state_index("spring.q")] == 0);
  CHECK(r.derivative[sys.state_index("mass.p")] == -1);
  CHECK(r.derivative[sys.state_index("s_e")] == 0);

  // q = 0, p = 1: v = 1, damping force 0.5, entropy rate d v^2 / theta0.
  r = rhs(sys, state_of(sys, {{"mass.p", 1}}), 0);
  CHECK(r.derivative[sys.state_index("spring.q")] == 1);
  CHECK(r.derivative[sys.state_index("mass.p")] == -0.5);
  CHECK(r.derivative[sys.state_index("s_e")] == doctest::Approx(1.0 / 600).epsilon(1e-14));
}

TEST_CASE("monitors at a single state") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  auto r = rhs(sys, state_of(sys, {{"mass.p", 2}, {"spring.q", 3}, {"s_e", 0.1}}), 0);
  CHECK(r.monitors[sys.monitor_index("exergy")] == doctest::Approx(2.0 + 4.5));
  CHECK(r.monitors[sys.monitor_index("entropy")] == doctest::Approx(0.1));
  CHECK(r.monitors[sys.monitor_index("energy")] == doctest::Approx(6.5 + 300 * 0.1));
  CHECK(r.monitors[sys.monitor_index("dissipation[damping]")] == doctest::Approx(0.5 * 4));
  CHECK(std::abs(r.monitors[sys.monitor_index("power_balance")]) < 1e-12);
  CHECK(std::abs(r.monitors[sys.monitor_index("junction_balance")]) < 1e-12);
}

TEST_CASE("old and new isothermal oscillators give the same dynamics") {
  FlatSystem a = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  FlatSystem b = flat(kModels / "oscillator_isothermal_old.ephs", "oscillator_old");
  REQUIRE(a.states == b.states);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x = {u(rng), u(rng), u(rng)};
    auto ra = rhs(a, x, 0).derivative;
    auto rb = rhs(b, x, 0).derivative;
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(ra[k] == doctest::Approx(rb[k]).epsilon(1e-14));
  }
}

TEST_CASE("equation listing shows the eliminated derivatives") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  std::string text = equation_listing(sys);
  CHECK(text.find("d(spring.q)/dt = mass.p/mass.m") != std::string::npos);
  CHECK(text.find("d(mass.p)/dt = -(spring.q/spring.c + damping.d*(mass.p/mass.m))") != std::string::npos);
  CHECK(text.find("# schedule") != std::string::npos);
  CHECK(csv_header(sys) ==
        "t,mass.p,spring.q,s_e,power_balance,junction_balance,power[D_m],dissipation[damping],exergy,entropy,energy");
}

TEST_CASE("every junction effort is assigned once, before use") {
  for (const auto& [file, system] : std::vector<std::pair<std::string, std::string>>{
           {"oscillator_isothermal.ephs", "oscillator"},
           {"oscillator_nonisothermal.ephs", "oscillator_nonisothermal"},
           {"piston_device.ephs", "piston_device"},
           {"piston_device_heated.ephs", "piston_device_heated"}}) {
    FlatSystem sys = flat(kModels / file, system);
    std::set<std::string> defined;
    for (const auto& s : sys.states) defined.insert(s);
    for (const auto& [name, v] : sys.parameters) defined.insert(name);
    defined.insert("t");
    for (const auto& a : sys.schedule) {
      for (const auto& s : free_symbols(a.value)) {
        CAPTURE(a.signal);
        CHECK(defined.count(s) == 1);
      }
      CHECK(defined.insert(a.signal).second);
    }
    for (const auto& e : sys.junction_efforts) CHECK(defined.count(e) == 1);
  }
}

TEST_CASE("causality errors") {
  try {
    flat(kFixtures / "algebraic_loop.ephs", "looped");
    FAIL("expected an algebraic loop");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::algebraic_loop);
    CHECK(std::string(e.what()).find("f[R1.p] -> ") != std::string::npos);
  }

  Model m = inline_model(kTwoStorages);
  CHECK(kind_of([&] { flatten(*m.system("clash").component); }) == ErrorKind::overdetermined_junction);
}

TEST_CASE("open systems need their boundary bound") {
  Model m = load_model_file(kModels / "damper_nonisothermal.ephs");
  ComponentPtr damper = m.system("damper").component;
  CHECK(kind_of([&] { flatten(*damper); }) == ErrorKind::unbound_boundary);

  Bindings b;
  b["mech"] = BoundaryBinding{BindingKind::effort_source, parse_expr("sin(t)")};
  b["thermal"] = BoundaryBinding{BindingKind::effort_source, parse_expr("0")};
  FlatSystem sys = flatten(*damper, b);
  CHECK(sys.states == std::vector<std::string>{"thermal_capacity.s"});
  auto r = rhs(sys, std::vector<double>{0.0}, 1.0);
  CHECK(r.derivative[0] > 0);
  CHECK(std::abs(r.monitors[sys.monitor_index("power_balance")]) < 1e-12);

  b["nope"] = b["mech"];
  CHECK(kind_of([&] { flatten(*damper, b); }) == ErrorKind::unknown_reference);
}

TEST_CASE("parameters can be changed after flattening") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  sys.set_parameter("damping.d", 0.0);
  auto r = rhs(sys, state_of(sys, {{"mass.p", 1}}), 0);
  CHECK(r.derivative[sys.state_index("mass.p")] == 0);
  CHECK(r.derivative[sys.state_index("s_e")] == 0);
  CHECK(kind_of([&] { sys.set_parameter("nope", 1); }) == ErrorKind::unknown_reference);
}

TEST_CASE("theta0 must agree across components") {
  std::string text = R"(
use "oscillator_isothermal.ephs"
system hot {
  diagram oscillator_isothermal
  fill spring = spring
  fill mass = mass
  fill D_m = D_m
  fill damping = damping
  fill environment = environment
  param damping.theta0 = 310
}
)";
  Model m = inline_model(text);
  CHECK(kind_of([&] { flatten(*m.system("hot").component); }) == ErrorKind::parameter_mismatch);
}

TEST_CASE("the eight-primitive piston device inlines with unique names") {
  Model m = load_model_file(kModels / "piston_device.ephs");
  InlinedSystem sys = inline_composite(*m.system("piston_device").component);
  std::vector<std::string> names;
  for (const auto& p : sys.primitives) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"D_minus", "D_plus", "friction", "gas1", "gas2", "heat_conduction", "mass",
                                          "thermal"});
  CHECK(sys.find("mass")->path == "piston.mass");
  CHECK(sys.find("gas1")->path == "gas1");
}
