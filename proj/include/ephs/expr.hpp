#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ephs {

enum class Op { constant, symbol, add, sub, mul, div, pow, neg, call };
enum class Func { exp, log, sin, cos, sqrt };

std::string_view to_string(Func f);

// Immutable arithmetic expression tree. Copies share structure.
//
// Symbols are untyped: whether a name denotes a state, a port effort or a
// parameter is decided by whoever binds it.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr symbol(std::string name);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr negate(Expr operand);
  static Expr call(Func f, Expr operand);

  Op op() const;
  double value() const;             // constant
  const std::string& name() const;  // symbol
  Func func() const;                // call
  const Expr& lhs() const;          // binary; operand of neg/call
  const Expr& rhs() const;          // binary

  bool is_constant() const { return op() == Op::constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  // Structural equality.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr pow(Expr base, Expr exponent);

using Env = std::map<std::string, double, std::less<>>;

// Throws ephs::Error (unbound_symbol, division_by_zero, domain_error) naming
// the offending subexpression.
double eval(const Expr& e, const Env& env);

Expr differentiate(const Expr& e, std::string_view var);

// Constant folding plus identity/annihilator elimination. Never changes the
// value of an expression wherever the original is defined.
Expr simplify(const Expr& e);

// Infix grammar: ^ (right assoc) > unary - > * / > + -, parentheses,
// identifiers, decimal/scientific literals and calls exp/log/sin/cos/sqrt.
Expr parse_expr(std::string_view text);

// Minimal-parenthesis rendering that parse_expr reads back to an equal tree.
std::string to_string(const Expr& e);

std::set<std::string> free_symbols(const Expr& e);
bool depends_on(const Expr& e, std::string_view name);

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& bindings);
Expr rename_symbols(const Expr& e, const std::function<std::string(const std::string&)>& f);

std::string format_number(double v);

// Expression compiled against a slot table; evaluation is allocation-free
// apart from the scratch stack held by the caller.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  // `slot_of` returns the slot index of a symbol or -1 when it is unbound.
  CompiledExpr(const Expr& e, const std::function<int(const std::string&)>& slot_of);

  double operator()(std::span<const double> slots, std::vector<double>& stack) const;

  const Expr& source() const { return source_; }

 private:
  enum class Code : unsigned char { konst, load, add, sub, mul, div, pow, neg, exp, log, sin, cos, sqrt };
  struct Instr {
    Code code;
    int arg;
  };
  void emit(const Expr& e, const std::function<int(const std::string&)>& slot_of);
  [[noreturn]] void report_failure(std::span<const double> slots) const;

  std::vector<Instr> code_;
  std::vector<double> constants_;
  std::vector<std::pair<std::string, int>> symbols_;
  Expr source_;
};

}  // namespace ephs
