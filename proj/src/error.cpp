#include "ephs/error.hpp"

namespace ephs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax: return "SyntaxError";
    case ErrorKind::duplicate_name: return "DuplicateName";
    case ErrorKind::unknown_reference: return "UnknownReference";
    case ErrorKind::invalid_diagram: return "InvalidDiagram";
    case ErrorKind::unknown_label: return "UnknownLabel";
    case ErrorKind::interface_mismatch: return "InterfaceMismatch";
    case ErrorKind::label_collision: return "LabelCollision";
    case ErrorKind::missing_filler: return "MissingFiller";
    case ErrorKind::skew_violation: return "SkewViolation";
    case ErrorKind::symmetry_violation: return "SymmetryViolation";
    case ErrorKind::not_psd: return "NotPSD";
    case ErrorKind::kernel_violation: return "KernelViolation";
    case ErrorKind::bad_port_binding: return "BadPortBinding";
    case ErrorKind::parameter_mismatch: return "ParameterMismatch";
    case ErrorKind::overdetermined_junction: return "OverdeterminedJunction";
    case ErrorKind::underdetermined_junction: return "UnderdeterminedJunction";
    case ErrorKind::algebraic_loop: return "AlgebraicLoop";
    case ErrorKind::unbound_boundary: return "UnboundBoundary";
    case ErrorKind::unbound_symbol: return "UnboundSymbol";
    case ErrorKind::division_by_zero: return "DivisionByZero";
    case ErrorKind::domain_error: return "DomainError";
    case ErrorKind::invalid_config: return "InvalidConfig";
    case ErrorKind::io: return "IOError";
  }
  return "Error";
}

std::string SourceLoc::str() const {
  std::string out = file.empty() ? std::string("<input>") : file;
  if (known()) out += ":" + std::to_string(line) + ":" + std::to_string(col);
  return out;
}

namespace {

std::string compose_what(ErrorKind kind, const std::string& message, const SourceLoc& loc) {
  std::string out;
  if (loc.known()) out += loc.str() + ": ";
  out += std::string(to_string(kind)) + ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string message, SourceLoc loc)
    : std::runtime_error(compose_what(kind, message, loc)),
      kind_(kind),
      message_(std::move(message)),
      loc_(std::move(loc)) {}

Error Error::located(const SourceLoc& loc) const {
  if (loc_.known() || !loc.known()) return *this;
  return Error(kind_, message_, loc);
}

std::string Error::diagnostic() const {
  std::string out;
  if (loc_.known()) {
    out += loc_.str() + ": ";
  } else if (!loc_.file.empty()) {
    out += loc_.file + ": ";
  }
  out += "error: ";
  out += std::string(to_string(kind_)) + ": " + message_;
  return out;
}

}  // namespace ephs
