#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "ephs/dsl.hpp"
#include "ephs/error.hpp"

using namespace ephs;

namespace {

const std::filesystem::path kModels = EPHS_MODELS_DIR;
const std::filesystem::path kFixtures = EPHS_FIXTURES_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an ephs::Error");
  return Error(ErrorKind::io, "");
}

Model inline_model(const std::string& text) { return resolve(parse_model(text, (kModels / "inline.ephs").string())); }

}  // namespace

TEST_CASE("every bundled model survives print and reparse") {
  for (const auto& entry : std::filesystem::directory_iterator(kModels)) {
    if (entry.path().extension() != ".ephs") continue;
    CAPTURE(entry.path().string());
    ModelDoc doc = parse_model(slurp(entry.path()), entry.path().string());
    std::string printed = print_model(doc);
    CHECK(parse_model(printed, entry.path().string()) == doc);
    CHECK(print_model(parse_model(printed)) == printed);
    CHECK_NOTHROW(load_model_file(entry.path()));
  }
}

TEST_CASE("syntax errors point at the offending token") {
  Error e = error_of([] { load_model_file(kFixtures / "syntax_error.ephs"); });
  CHECK(e.kind() == ErrorKind::syntax);
  CHECK(e.loc().line == 4);
  CHECK(e.loc().col == 12);
  CHECK(e.diagnostic().find("syntax_error.ephs:4:12: error: SyntaxError: expected ':'") != std::string::npos);

  e = error_of([] { parse_model("component x : gadget for Y {}"); });
  CHECK(e.kind() == ErrorKind::syntax);
  e = error_of([] { parse_model("diagram d { box a : A"); });
  CHECK(e.kind() == ErrorKind::syntax);
  e = error_of([] { parse_model("component c : storage for S { hamiltonian q^ }"); });
  CHECK(e.kind() == ErrorKind::syntax);
}

TEST_CASE("resolution errors carry declaration locations") {
  Error e = error_of([] { load_model_file(kFixtures / "unknown_junction.ephs"); });
  CHECK(e.kind() == ErrorKind::unknown_reference);
  CHECK(e.loc().line == 6);
  CHECK(std::string(e.what()).find("'j9'") != std::string::npos);

  e = error_of([] { load_model_file(kFixtures / "type_mismatch.ephs"); });
  CHECK(e.kind() == ErrorKind::interface_mismatch);
  CHECK(std::string(e.what()).find("type of pot") != std::string::npos);

  e = error_of([] { load_model_file(kFixtures / "skew_violation.ephs"); });
  CHECK(e.kind() == ErrorKind::skew_violation);
  CHECK(e.loc().line == 9);

  e = error_of([] { inline_model("porttype a { flow \"x\" effort \"y\" }\nporttype a { flow \"x\" effort \"y\" }"); });
  CHECK(e.kind() == ErrorKind::duplicate_name);
  CHECK(e.loc().line == 2);

  e = error_of([] { load_model_file(kModels / "no_such_file.ephs"); });
  CHECK(e.kind() == ErrorKind::io);
}

TEST_CASE("use is resolved relative to the including file and merged once") {
  // piston_device_heated reaches common.ephs along two paths.
  Model m = load_model_file(kModels / "piston_device_heated.ephs");
  CHECK(m.port_types.count("volume") == 1);
  CHECK(m.systems.count("piston_device_heated") == 1);
  CHECK(m.systems.count("piston") == 1);
}

TEST_CASE("system overrides broadcast or target a path") {
  Model m = inline_model(R"(
use "damper_nonisothermal.ephs"
system stiff {
  diagram oscillator_isothermal
  fill spring = spring
  fill mass = mass
  fill D_m = D_m
  fill damping = damper
  fill environment = environment
  param d = 0.25
  param damping.heat_transfer.alpha = 3
  init spring.q = 2
}
)");
  ResolvedSystem rs = m.system("stiff");
  FlatSystem sys = flatten(*rs.component, rs.bindings);
  CHECK(sys.parameters.at("friction.d") == 0.25);
  CHECK(sys.parameters.at("heat_transfer.alpha") == 3);
  CHECK(sys.initial[sys.state_index("spring.q")] == 2);

  Error e = error_of([] {
    inline_model(R"(
use "oscillator_isothermal.ephs"
system bad {
  diagram oscillator_isothermal
  fill spring = spring
  fill mass = mass
  fill D_m = D_m
  fill damping = damping
  fill environment = environment
  param spring.k = 2
}
)");
  });
  CHECK(e.kind() == ErrorKind::unknown_reference);
}

TEST_CASE("systems may not fill themselves") {
  Error e = error_of([] {
    inline_model(R"(
use "common.ephs"
diagram solo {
  box s : Spring
  junction j : displacement
  bond s.pot -- j
}
system a {
  diagram solo
  fill s = b
}
system b {
  diagram solo
  fill s = a
}
)");
  });
  CHECK(e.kind() == ErrorKind::invalid_diagram);
  CHECK(std::string(e.what()).find("a -> b -> a") != std::string::npos);
}

TEST_CASE("compose emits a single-level document with the same dynamics") {
  Model m = load_model_file(kModels / "damper_nonisothermal.ephs");
  ModelDoc doc = compose(m, "oscillator_nested");
  std::string text = print_model(doc);
  CHECK(text.find("use ") == std::string::npos);
  CHECK(text.find("oscillator_nested_flat") != std::string::npos);

  Model flat_model = resolve(parse_model(text));
  ResolvedSystem a = m.system("oscillator_nested");
  ResolvedSystem b = flat_model.system("oscillator_nested_flat");
  CHECK(b.component->kind() == ComponentKind::composite);
  CHECK(normalized_form(flatten(*a.component, a.bindings)) == normalized_form(flatten(*b.component, b.bindings)));
}
