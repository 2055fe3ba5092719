#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "ephs/dsl.hpp"
#include "ephs/error.hpp"
#include "ephs/simulate.hpp"

using namespace ephs;

namespace {

const std::filesystem::path kModels = EPHS_MODELS_DIR;
const std::filesystem::path kFixtures = EPHS_FIXTURES_DIR;

FlatSystem flat(const std::filesystem::path& file, const std::string& system) {
  Model m = load_model_file(file);
  ResolvedSystem rs = m.system(system);
  return flatten(*rs.component, rs.bindings);
}

SimConfig config(double t_end, double dt) {
  SimConfig c;
  c.t_end = t_end;
  c.dt = dt;
  return c;
}

bool has_failed_check(const MonitorReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return !c.ok;
  }
  return false;
}

}  // namespace

TEST_CASE("undamped oscillator follows cos t") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  sys.set_parameter("damping.d", 0.0);
  Trajectory tr = integrate_rk4(sys, config(2.0, 1e-3));
  std::size_t q = sys.state_index("spring.q");
  std::size_t p = sys.state_index("mass.p");
  double worst = 0;
  for (std::size_t i = 0; i < tr.rows(); ++i) {
    worst = std::max(worst, std::abs(tr.states[i][q] - std::cos(tr.times[i])));
    worst = std::max(worst, std::abs(tr.states[i][p] + std::sin(tr.times[i])));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("the step grid ends exactly at t_end") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  Trajectory tr = integrate_rk4(sys, config(1.0, 0.3));
  REQUIRE(tr.rows() == 5);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 1.0);
  CHECK(tr.times[3] == doctest::Approx(0.9));

  CHECK(integrate_rk4(sys, config(0.0, 0.1)).rows() == 0);
}

TEST_CASE("runs are bit-for-bit reproducible") {
  FlatSystem sys = flat(kModels / "oscillator_nonisothermal.ephs", "oscillator_nonisothermal");
  Trajectory a = integrate_rk4(sys, config(1.0, 1e-2));
  Trajectory b = integrate_rk4(sys, config(1.0, 1e-2));
  CHECK(a.states == b.states);
  CHECK(a.monitors == b.monitors);
}

TEST_CASE("configuration is validated") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  CHECK_THROWS_AS(integrate_rk4(sys, config(1.0, 0.0)), Error);
  CHECK_THROWS_AS(integrate_rk4(sys, config(-1.0, 0.1)), Error);
  CHECK_THROWS_AS(integrate_rk4(sys, config(1.0, 0.1), {1.0}), Error);
  SimConfig c = config(1.0, 0.1);
  c.output_stride = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("the damped oscillator satisfies every invariant") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  SimConfig cfg = config(5.0, 1e-3);
  MonitorReport r = monitor_report(integrate_rk4(sys, cfg), cfg);
  CAPTURE(r.str());
  CHECK(r.ok());
  CHECK(r.closed_passive);
  CHECK(r.min_entropy_increment >= 0);
}

TEST_CASE("a leaky interconnection is flagged") {
  FlatSystem sys = flat(kFixtures / "corrupted_oscillator.ephs", "corrupted");
  SimConfig cfg = config(1.0, 1e-3);
  Trajectory tr = integrate_rk4(sys, cfg);
  MonitorReport r = monitor_report(tr, cfg);
  CHECK_FALSE(r.ok());
  CHECK(has_failed_check(r, "power balance"));
  CHECK_FALSE(tr.flagged_steps.empty());
  CHECK(r.str().find("invariant violations detected") != std::string::npos);
}

TEST_CASE("CSV output honours the stride and keeps the last row") {
  FlatSystem sys = flat(kModels / "oscillator_isothermal.ephs", "oscillator");
  Trajectory tr = integrate_rk4(sys, config(1.0, 0.1));
  std::ostringstream os;
  write_csv(os, tr, 4);
  std::vector<std::string> lines;
  std::istringstream is(os.str());
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 4);  // rows 0, 4, 8 and the final row 10
  CHECK(lines[0] == csv_header(sys));
  CHECK(lines[1].rfind("0,", 0) == 0);
  CHECK(lines.back().rfind("1,", 0) == 0);

  std::ostringstream empty;
  write_csv(empty, integrate_rk4(sys, config(0.0, 0.1)));
  CHECK(empty.str() == csv_header(sys) + "\n");
}
