// ephs: check, flatten, simulate, compose and render .ephs models.
//
// Exit codes: 0 success, 1 model or invariant failure, 2 I/O or usage error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ephs/dsl.hpp"
#include "ephs/flatten.hpp"
#include "ephs/render.hpp"
#include "ephs/simulate.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

int report(const ephs::Error& e) {
  std::cerr << e.diagnostic() << "\n";
  return e.kind() == ephs::ErrorKind::io || e.kind() == ephs::ErrorKind::invalid_config ? kUsage : kFailure;
}

// Writes to `path`, or to stdout when empty.
bool emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << path << ": error: IOError: cannot write file\n";
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

ephs::SourceLoc system_loc(const ephs::Model& m, const std::string& name) {
  auto it = m.systems.find(name);
  return it == m.systems.end() ? ephs::SourceLoc{} : it->second.loc;
}

ephs::FlatSystem flatten_system(const ephs::Model& m, const std::string& name) {
  auto rs = m.system(name);
  try {
    return ephs::flatten(*rs.component, rs.bindings);
  } catch (const ephs::Error& e) {
    throw e.located(system_loc(m, name));
  }
}

bool is_flattenable(const ephs::Model& m, const std::string& name) {
  const auto& decl = m.systems.at(name);
  return m.diagrams.at(decl.diagram).boundary.size() == decl.binds.size();
}

int cmd_check(const std::string& file) {
  ephs::Model m = ephs::load_model_file(file);
  int status = kOk;
  std::size_t flattened = 0;
  for (const auto& name : m.declaration_order) {
    if (!is_flattenable(m, name)) continue;
    try {
      flatten_system(m, name);
      ++flattened;
    } catch (const ephs::Error& e) {
      status = report(e);
    }
  }
  if (status == kOk) {
    std::cerr << file << ": ok (" << m.systems.size() << " systems, " << flattened << " flattened)\n";
  }
  return status;
}

int cmd_flatten(const std::string& file, const std::string& system, const std::string& what) {
  ephs::Model m = ephs::load_model_file(file);
  ephs::FlatSystem sys = flatten_system(m, system);
  if (what == "csv-schema") {
    std::cout << ephs::csv_header(sys) << "\n";
  } else {
    std::cout << ephs::equation_listing(sys);
  }
  return kOk;
}

int cmd_simulate(const std::string& file, const std::string& system, double t_end, double dt,
                 const std::string& out, int stride) {
  ephs::Model m = ephs::load_model_file(file);
  ephs::FlatSystem sys = flatten_system(m, system);
  ephs::SimConfig cfg;
  cfg.t_end = t_end;
  cfg.dt = dt;
  cfg.output_stride = stride;
  ephs::Trajectory traj;
  try {
    traj = ephs::integrate_rk4(sys, cfg);
  } catch (const ephs::Error& e) {
    throw e.located(system_loc(m, system));
  }
  std::ostringstream csv;
  ephs::write_csv(csv, traj, stride);
  if (!emit(out, csv.str())) return kUsage;
  auto closed = m.diagrams.at(m.systems.at(system).diagram).boundary.empty();
  auto rep = ephs::monitor_report(traj, cfg, closed);
  (out.empty() ? std::cerr : std::cout) << rep.str();
  return rep.ok() ? kOk : kFailure;
}

int cmd_compose(const std::string& file, const std::string& system, const std::string& out) {
  ephs::Model m = ephs::load_model_file(file);
  ephs::ModelDoc doc = ephs::compose(m, system);
  return emit(out, ephs::print_model(doc)) ? kOk : kUsage;
}

int cmd_render(const std::string& file, const std::string& system, const std::string& diagram,
               const std::string& out) {
  ephs::Model m = ephs::load_model_file(file);
  std::string text;
  if (!system.empty()) {
    auto rs = m.system(system);
    const auto& comp = std::get<ephs::CompositeComponent>(rs.component->body);
    text = ephs::to_dot(comp.diagram, ephs::filler_kinds(*rs.component), system);
  } else {
    auto it = m.diagrams.find(diagram);
    if (it == m.diagrams.end()) {
      throw ephs::Error(ephs::ErrorKind::unknown_reference, "unknown diagram '" + diagram + "'");
    }
    text = ephs::to_dot(it->second, std::nullopt, diagram);
  }
  return emit(out, text) ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile, check and simulate exergetic port-Hamiltonian models"};
  app.require_subcommand(1);

  std::string file, system, diagram, out, emit_what = "equations";
  double t_end = 0.0, dt = 1e-3;
  int stride = 1;

  auto* check = app.add_subcommand("check", "Parse, resolve and validate a model file");
  check->add_option("file", file, "Model file")->required();

  auto* flat = app.add_subcommand("flatten", "Print the flattened equations of a system");
  flat->add_option("file", file, "Model file")->required();
  flat->add_option("--system", system, "System name")->required();
  flat->add_option("--emit", emit_what, "equations | csv-schema")
      ->check(CLI::IsMember({"equations", "csv-schema"}));

  auto* sim = app.add_subcommand("simulate", "Integrate a system and report invariants");
  sim->add_option("file", file, "Model file")->required();
  sim->add_option("--system", system, "System name")->required();
  sim->add_option("--t-end", t_end, "Final time")->required();
  sim->add_option("--dt", dt, "Step size")->required();
  sim->add_option("--out", out, "CSV output path (default: stdout)");
  sim->add_option("--stride", stride, "Write every Nth step")->check(CLI::PositiveNumber);

  auto* comp = app.add_subcommand("compose", "Emit a system as a single-level model document");
  comp->add_option("file", file, "Model file")->required();
  comp->add_option("--system", system, "System name")->required();
  std::string compose_emit = "ephs";
  comp->add_option("--emit", compose_emit, "Output format")->check(CLI::IsMember({"ephs"}));
  comp->add_option("--out", out, "Output path (default: stdout)");

  auto* render = app.add_subcommand("render", "Emit Graphviz text for a system or diagram");
  render->add_option("file", file, "Model file")->required();
  auto* sys_opt = render->add_option("--system", system, "System name");
  auto* dia_opt = render->add_option("--diagram", diagram, "Diagram name");
  sys_opt->excludes(dia_opt);
  render->add_option("--out", out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(file);
    if (*flat) return cmd_flatten(file, system, emit_what);
    if (*sim) return cmd_simulate(file, system, t_end, dt, out, stride);
    if (*comp) return cmd_compose(file, system, out);
    if (*render) {
      if (system.empty() == diagram.empty()) {
        std::cerr << "error: render needs exactly one of --system or --diagram\n";
        return kUsage;
      }
      return cmd_render(file, system, diagram, out);
    }
  } catch (const ephs::Error& e) {
    return report(e);
  }
  return kUsage;
}
