#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ephs {

enum class ErrorKind {
  syntax,
  duplicate_name,
  unknown_reference,
  invalid_diagram,
  unknown_label,
  interface_mismatch,
  label_collision,
  missing_filler,
  skew_violation,
  symmetry_violation,
  not_psd,
  kernel_violation,
  bad_port_binding,
  parameter_mismatch,
  overdetermined_junction,
  underdetermined_junction,
  algebraic_loop,
  unbound_boundary,
  unbound_symbol,
  division_by_zero,
  domain_error,
  invalid_config,
  io,
};

std::string_view to_string(ErrorKind kind);

struct SourceLoc {
  std::string file;
  int line = 0;
  int col = 0;

  bool known() const { return line > 0; }
  std::string str() const;

  // Locations are not part of a declaration's identity; documents that differ
  // only in layout compare equal.
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceLoc loc = {});

  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }
  const SourceLoc& loc() const { return loc_; }

  // Returns a copy carrying `loc` unless a location is already attached.
  Error located(const SourceLoc& loc) const;

  // "file:line:col: error: message" (location omitted when unknown).
  std::string diagnostic() const;

 private:
  ErrorKind kind_;
  std::string message_;
  SourceLoc loc_;
};

}  // namespace ephs
