#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ephs/flatten.hpp"

namespace ephs {

struct Tolerances {
  double power_balance = 1e-10;  // absolute, per step
  double energy_drift = 1e-9;    // relative to the initial exergy
  double dissipation = 1e-10;    // lower bound on every resistive monitor
  double junction_balance = 1e-10;
};

struct SimConfig {
  double t_end = 0.0;
  double dt = 1e-3;
  int output_stride = 1;
  Tolerances tolerances;

  // Throws ephs::Error(invalid_config).
  void validate() const;
};

// Rows are accepted steps; the first row is the initial state. A run with
// t_end = 0 has no rows.
struct Trajectory {
  std::vector<std::string> state_names;
  std::vector<std::string> monitor_names;
  std::vector<MonitorKind> monitor_kinds;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> monitors;
  // Steps where any monitor left its tolerance band.
  std::vector<std::size_t> flagged_steps;

  std::size_t rows() const { return times.size(); }
};

// Classical four-stage Runge-Kutta with a fixed step. The final step is
// shortened to land exactly on t_end. Throws the evaluation error of the
// failing step, prefixed by the step index.
Trajectory integrate_rk4(const FlatSystem& sys, const SimConfig& cfg);

// Same, from a given initial state.
Trajectory integrate_rk4(const FlatSystem& sys, const SimConfig& cfg, std::vector<double> x0);

struct MonitorReport {
  std::size_t rows = 0;
  double max_power_residual = 0.0;
  double max_junction_residual = 0.0;
  double max_energy_drift = 0.0;  // absolute |E(t) - E(0)|
  double energy_scale = 0.0;      // |H(0)|, the drift budget reference
  double min_entropy_increment = 0.0;
  double min_dissipation = 0.0;
  double max_exergy_increase = 0.0;
  bool has_energy = false;
  bool has_entropy = false;
  bool closed_passive = false;  // exergy monotonicity is checked

  struct Check {
    std::string name;
    bool ok;
    std::string detail;
  };
  std::vector<Check> checks;

  bool ok() const;
  std::string str() const;
};

// `closed` enables the exergy monotonicity check; callers pass true for
// systems without boundary ports.
MonitorReport monitor_report(const Trajectory& traj, const SimConfig& cfg, bool closed = true);

// Header row then one row per output_stride steps (the last row is always
// written); numbers use the shortest round-trip form.
void write_csv(std::ostream& os, const Trajectory& traj, int output_stride = 1);

}  // namespace ephs
