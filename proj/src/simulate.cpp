#include "ephs/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ephs/error.hpp"

namespace ephs {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::invalid_config, "dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::invalid_config, "t_end must be non-negative");
  if (output_stride < 1) throw Error(ErrorKind::invalid_config, "output stride must be at least 1");
}

namespace {

void axpy(std::vector<double>& out, const std::vector<double>& x, double a, const std::vector<double>& k) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
}

std::vector<bool> flags_for(const FlatSystem& sys, const Tolerances& tol, const std::vector<double>& m) {
  std::vector<bool> out(m.size(), false);
  for (std::size_t i = 0; i < m.size(); ++i) {
    switch (sys.monitors[i].kind) {
      case MonitorKind::power_balance: out[i] = !(std::abs(m[i]) <= tol.power_balance); break;
      case MonitorKind::junction_balance: out[i] = !(m[i] <= tol.junction_balance); break;
      case MonitorKind::dissipation: out[i] = !(m[i] >= -tol.dissipation); break;
      default: break;
    }
  }
  return out;
}

}  // namespace

Trajectory integrate_rk4(const FlatSystem& sys, const SimConfig& cfg) { return integrate_rk4(sys, cfg, sys.initial); }

Trajectory integrate_rk4(const FlatSystem& sys, const SimConfig& cfg, std::vector<double> x) {
  cfg.validate();
  Trajectory traj;
  traj.state_names = sys.states;
  for (const auto& m : sys.monitors) {
    traj.monitor_names.push_back(m.name);
    traj.monitor_kinds.push_back(m.kind);
  }
  if (cfg.t_end == 0.0) return traj;

  const std::size_t n = x.size();
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt * (1.0 - 1e-12)));
  Evaluator ev(sys);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), mon(sys.monitors.size());

  auto record = [&](std::size_t step, double t) {
    ev.monitors(x, t, mon);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.monitors.push_back(mon);
    auto f = flags_for(sys, cfg.tolerances, mon);
    if (std::find(f.begin(), f.end(), true) != f.end()) traj.flagged_steps.push_back(step);
  };

  record(0, 0.0);
  double t = 0.0;
  for (std::size_t step = 1; step <= steps; ++step) {
    const double t_next = step == steps ? cfg.t_end : static_cast<double>(step) * cfg.dt;
    const double h = t_next - t;
    try {
      ev.derivative(x, t, k1);
      axpy(tmp, x, h / 2, k1);
      ev.derivative(tmp, t + h / 2, k2);
      axpy(tmp, x, h / 2, k2);
      ev.derivative(tmp, t + h / 2, k3);
      axpy(tmp, x, h, k3);
      ev.derivative(tmp, t + h, k4);
      for (std::size_t i = 0; i < n; ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      record(step, t_next);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(step) + " (t = " + format_number(t) + "): " + e.message());
    }
    t = t_next;
  }
  return traj;
}

bool MonitorReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

std::string MonitorReport::str() const {
  std::ostringstream os;
  os << "invariant report (" << rows << " rows)\n";
  for (const auto& c : checks) os << "  " << (c.ok ? "ok   " : "FAIL ") << c.name << ": " << c.detail << "\n";
  os << (ok() ? "all invariants satisfied" : "invariant violations detected") << "\n";
  return os.str();
}

MonitorReport monitor_report(const Trajectory& traj, const SimConfig& cfg, bool closed) {
  MonitorReport r;
  r.rows = traj.rows();
  const auto& tol = cfg.tolerances;
  auto column = [&](MonitorKind kind) -> std::vector<std::size_t> {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < traj.monitor_kinds.size(); ++i) {
      if (traj.monitor_kinds[i] == kind) out.push_back(i);
    }
    return out;
  };
  auto fmt = [](double v) { return format_number(v); };

  for (std::size_t i : column(MonitorKind::power_balance)) {
    for (const auto& row : traj.monitors) r.max_power_residual = std::max(r.max_power_residual, std::abs(row[i]));
  }
  r.checks.push_back({"power balance", r.max_power_residual <= tol.power_balance,
                      "max |residual| = " + fmt(r.max_power_residual) + " (tolerance " + fmt(tol.power_balance) + ")"});

  for (std::size_t i : column(MonitorKind::junction_balance)) {
    for (const auto& row : traj.monitors) r.max_junction_residual = std::max(r.max_junction_residual, row[i]);
  }
  r.checks.push_back({"junction balance", r.max_junction_residual <= tol.junction_balance,
                      "max |sum of flows| = " + fmt(r.max_junction_residual)});

  bool dissipation_ok = true;
  auto diss = column(MonitorKind::dissipation);
  if (!diss.empty() && r.rows > 0) {
    r.min_dissipation = std::numeric_limits<double>::infinity();
    for (std::size_t i : diss) {
      for (const auto& row : traj.monitors) r.min_dissipation = std::min(r.min_dissipation, row[i]);
    }
    dissipation_ok = r.min_dissipation >= -tol.dissipation;
    r.checks.push_back({"dissipation", dissipation_ok, "min exergy destruction rate = " + fmt(r.min_dissipation)});
  }

  auto exergy = column(MonitorKind::exergy);
  auto energy = column(MonitorKind::energy);
  auto entropy = column(MonitorKind::entropy);
  if (r.rows > 0 && !energy.empty()) {
    r.has_energy = true;
    const double e0 = traj.monitors.front()[energy.front()];
    const double h0 = exergy.empty() ? 0.0 : traj.monitors.front()[exergy.front()];
    r.energy_scale = std::abs(h0) > 0.0 ? std::abs(h0) : (std::abs(e0) > 0.0 ? std::abs(e0) : 1.0);
    for (const auto& row : traj.monitors) {
      r.max_energy_drift = std::max(r.max_energy_drift, std::abs(row[energy.front()] - e0));
    }
    r.checks.push_back({"energy conservation", r.max_energy_drift <= tol.energy_drift * r.energy_scale,
                        "max |E(t) - E(0)| = " + fmt(r.max_energy_drift) + " (budget " +
                            fmt(tol.energy_drift * r.energy_scale) + ")"});
  }
  if (r.rows > 1 && !entropy.empty()) {
    r.has_entropy = true;
    r.min_entropy_increment = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < r.rows; ++k) {
      r.min_entropy_increment = std::min(
          r.min_entropy_increment, traj.monitors[k][entropy.front()] - traj.monitors[k - 1][entropy.front()]);
    }
    r.checks.push_back({"entropy production", r.min_entropy_increment >= 0.0,
                        "min entropy increment per step = " + fmt(r.min_entropy_increment)});
  }
  if (closed && dissipation_ok && r.rows > 1 && !exergy.empty()) {
    r.closed_passive = true;
    // Consecutive exergy values may differ by rounding of their own size.
    double scale = 0.0;
    for (const auto& row : traj.monitors) scale = std::max(scale, std::abs(row[exergy.front()]));
    const double slack = 64 * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t k = 1; k < r.rows; ++k) {
      r.max_exergy_increase = std::max(r.max_exergy_increase,
                                       traj.monitors[k][exergy.front()] - traj.monitors[k - 1][exergy.front()]);
    }
    r.checks.push_back({"passivity", r.max_exergy_increase <= slack,
                        "max exergy increase per step = " + fmt(r.max_exergy_increase)});
  }
  return r;
}

void write_csv(std::ostream& os, const Trajectory& traj, int output_stride) {
  std::string line = "t";
  for (const auto& s : traj.state_names) line += "," + s;
  for (const auto& m : traj.monitor_names) line += "," + m;
  os << line << "\n";
  const auto stride = static_cast<std::size_t>(std::max(1, output_stride));
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    if (k % stride != 0 && k + 1 != traj.rows()) continue;
    line = format_number(traj.times[k]);
    for (double v : traj.states[k]) line += "," + format_number(v);
    for (double v : traj.monitors[k]) line += "," + format_number(v);
    os << line << "\n";
  }
}

}  // namespace ephs
