#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ephs/diagram.hpp"
#include "ephs/error.hpp"
#include "ephs/expr.hpp"
#include "ephs/flatten.hpp"
#include "ephs/semantics.hpp"

namespace ephs {

// ---------------------------------------------------------------------------
// Syntax tree. Source locations never take part in equality.

struct UseDecl {
  std::string path;
  SourceLoc loc;
  friend bool operator==(const UseDecl&, const UseDecl&) = default;
};

struct PortTypeDecl {
  std::string name;
  std::string flow_unit;
  std::string effort_unit;
  SourceLoc loc;
  friend bool operator==(const PortTypeDecl&, const PortTypeDecl&) = default;
};

struct PortDecl {
  std::string name;
  std::string type;
  SourceLoc loc;
  friend bool operator==(const PortDecl&, const PortDecl&) = default;
};

struct InterfaceDecl {
  std::string name;
  std::vector<PortDecl> ports;
  SourceLoc loc;
  friend bool operator==(const InterfaceDecl&, const InterfaceDecl&) = default;
};

struct BoxDecl {
  std::string label;
  std::string interface;
  SourceLoc loc;
  friend bool operator==(const BoxDecl&, const BoxDecl&) = default;
};

struct JunctionDecl {
  std::string name;
  std::string type;
  SourceLoc loc;
  friend bool operator==(const JunctionDecl&, const JunctionDecl&) = default;
};

struct BondDecl {
  std::string box;
  std::string port;
  std::string junction;
  SourceLoc loc;
  friend bool operator==(const BondDecl&, const BondDecl&) = default;
};

struct BoundaryDecl {
  std::string name;
  std::string type;
  std::string junction;
  SourceLoc loc;
  friend bool operator==(const BoundaryDecl&, const BoundaryDecl&) = default;
};

struct DiagramDecl {
  std::string name;
  std::vector<BoxDecl> boxes;
  std::vector<JunctionDecl> junctions;
  std::vector<BondDecl> bonds;
  std::vector<BoundaryDecl> boundary;
  SourceLoc loc;
  friend bool operator==(const DiagramDecl&, const DiagramDecl&) = default;
};

struct StateDecl {
  std::string name;
  std::optional<std::string> port;  // absent for the environment entropy
  Expr initial;
  SourceLoc loc;
  friend bool operator==(const StateDecl&, const StateDecl&) = default;
};

struct CausalityDecl {
  std::string port;
  Causality causality = Causality::effort_in;
  SourceLoc loc;
  friend bool operator==(const CausalityDecl&, const CausalityDecl&) = default;
};

// `name` is a dotted path inside systems.
struct AssignDecl {
  std::string name;
  Expr value;
  SourceLoc loc;
  friend bool operator==(const AssignDecl&, const AssignDecl&) = default;
};

struct ComponentDecl {
  std::string name;
  ComponentKind kind = ComponentKind::storage;
  std::string interface;
  bool unchecked = false;
  std::vector<StateDecl> states;
  std::optional<Expr> hamiltonian;
  std::vector<CausalityDecl> causality;
  std::optional<Matrix> matrix;
  std::optional<std::vector<Expr>> kernel;
  std::vector<AssignDecl> params;
  SourceLoc loc;
  friend bool operator==(const ComponentDecl&, const ComponentDecl&) = default;
};

struct FillDecl {
  std::string label;
  std::string target;  // component or system
  SourceLoc loc;
  friend bool operator==(const FillDecl&, const FillDecl&) = default;
};

struct BindDecl {
  std::string port;
  BindingKind kind = BindingKind::effort_source;
  Expr value;
  SourceLoc loc;
  friend bool operator==(const BindDecl&, const BindDecl&) = default;
};

struct SystemDecl {
  std::string name;
  std::string diagram;
  std::vector<FillDecl> fills;
  std::vector<AssignDecl> params;
  std::vector<AssignDecl> inits;
  std::vector<BindDecl> binds;
  SourceLoc loc;
  friend bool operator==(const SystemDecl&, const SystemDecl&) = default;
};

using Decl = std::variant<UseDecl, PortTypeDecl, InterfaceDecl, DiagramDecl, ComponentDecl, SystemDecl>;

struct ModelDoc {
  std::string file;  // used for diagnostics and to resolve `use` paths
  std::vector<Decl> decls;
  friend bool operator==(const ModelDoc& a, const ModelDoc& b) { return a.decls == b.decls; }
};

// Throws ephs::Error(syntax) with the location of the offending token.
ModelDoc parse_model(std::string_view text, const std::string& file = "<input>");

// Canonical text; parse_model(print_model(d)) == d.
std::string print_model(const ModelDoc& doc);

// ---------------------------------------------------------------------------
// Resolved model

struct ResolvedSystem {
  ComponentPtr component;
  Bindings bindings;
};

struct Model {
  std::map<std::string, PortType> port_types;
  std::map<std::string, Interface> interfaces;
  std::map<std::string, Diagram> diagrams;
  std::map<std::string, ComponentPtr> components;
  std::map<std::string, ComponentDecl> component_decls;
  std::map<std::string, SystemDecl> systems;
  std::map<std::string, DiagramDecl> diagram_decls;
  std::map<std::string, ComponentPtr> system_components;
  std::vector<std::string> declaration_order;  // systems, as declared

  // Builds the component hierarchy of a system with parameter and initial
  // value overrides applied. Throws unknown_reference.
  ResolvedSystem system(const std::string& name) const;

  // Box label to component name, for systems and their diagram.
  std::map<std::string, std::string> filler_names(const std::string& system) const;
};

// Resolves every declaration; `use` paths are read relative to the
// directory of doc.file and merged once per canonical path. Errors carry the
// location of the offending declaration.
Model resolve(const ModelDoc& doc);

// Reads, parses and resolves a file. Throws ephs::Error(io) when unreadable.
Model load_model_file(const std::filesystem::path& path);

// Single-level document for a system: one diagram with every composite box
// substituted away, junctions named j0, j1, ... in canonical order, and a
// system that fills each box with its primitive and pins every parameter and
// initial value by qualified path.
ModelDoc compose(const Model& model, const std::string& system);

}  // namespace ephs
