#include "ephs/expr.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include "ephs/error.hpp"

namespace ephs {

struct Expr::Node {
  Op op = Op::constant;
  double value = 0.0;
  std::string name;
  Func func = Func::exp;
  Expr lhs;
  Expr rhs;
};

// Every default-constructed expression shares one zero leaf; its own child
// slots stay null and are never read.
Expr::Expr() {
  static const std::shared_ptr<const Node> zero(
      new Node{Op::constant, 0.0, {}, Func::exp, Expr(nullptr), Expr(nullptr)});
  node_ = zero;
}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::symbol(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::symbol;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->op = Op::neg;
  n->lhs = std::move(operand);
  return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr operand) {
  auto n = std::make_shared<Node>();
  n->op = Op::call;
  n->func = f;
  n->lhs = std::move(operand);
  return Expr(std::move(n));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Func Expr::func() const { return node_->func; }
const Expr& Expr::lhs() const { return node_->lhs; }
const Expr& Expr::rhs() const { return node_->rhs; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::constant:
      return a.value() == b.value() && std::signbit(a.value()) == std::signbit(b.value());
    case Op::symbol:
      return a.name() == b.name();
    case Op::neg:
      return a.lhs() == b.lhs();
    case Op::call:
      return a.func() == b.func() && a.lhs() == b.lhs();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

Expr operator+(Expr a, Expr b) { return Expr::binary(Op::add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::binary(Op::sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::binary(Op::mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(Op::div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return Expr::negate(std::move(a)); }
Expr pow(Expr base, Expr exponent) { return Expr::binary(Op::pow, std::move(base), std::move(exponent)); }

std::string_view to_string(Func f) {
  switch (f) {
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::sqrt: return "sqrt";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength of the printed form; a child is parenthesized when it binds
// more loosely than its position requires.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::constant: return (e.value() < 0 || std::signbit(e.value())) ? 3 : 5;
    case Op::symbol:
    case Op::call: return 5;
  }
  return 5;
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::constant:
      out += format_number(e.value());
      return;
    case Op::symbol:
      out += e.name();
      return;
    case Op::add:
    case Op::sub:
      print_at(e.lhs(), 1, out);
      out += e.op() == Op::add ? " + " : " - ";
      print_at(e.rhs(), 2, out);
      return;
    case Op::mul:
    case Op::div:
      print_at(e.lhs(), 2, out);
      out += e.op() == Op::mul ? "*" : "/";
      print_at(e.rhs(), 3, out);
      return;
    case Op::pow:
      print_at(e.lhs(), 5, out);
      out += '^';
      print_at(e.rhs(), 3, out);
      return;
    case Op::neg:
      out += '-';
      // A bare literal after '-' would read back as a negative constant.
      if (e.lhs().is_constant()) {
        out += '(';
        print(e.lhs(), out);
        out += ')';
      } else {
        print_at(e.lhs(), 4, out);
      }
      return;
    case Op::call:
      out += to_string(e.func());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain_failure(ErrorKind kind, const std::string& what, const Expr& at) {
  throw Error(kind, what + " in '" + to_string(at) + "'");
}

double apply_binary(Op op, double a, double b, const Expr& at) {
  switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div:
      if (b == 0.0) domain_failure(ErrorKind::division_by_zero, "division by zero", at);
      return a / b;
    case Op::pow: {
      if (a < 0.0 && std::trunc(b) != b) {
        domain_failure(ErrorKind::domain_error, "negative base with non-integer exponent", at);
      }
      if (a == 0.0 && b < 0.0) domain_failure(ErrorKind::division_by_zero, "zero to a negative power", at);
      return std::pow(a, b);
    }
    default: break;
  }
  return 0.0;
}

double apply_func(Func f, double x, const Expr& at) {
  switch (f) {
    case Func::exp: return std::exp(x);
    case Func::log:
      if (!(x > 0.0)) domain_failure(ErrorKind::domain_error, "log of non-positive argument", at);
      return std::log(x);
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::sqrt:
      if (x < 0.0) domain_failure(ErrorKind::domain_error, "sqrt of negative argument", at);
      return std::sqrt(x);
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, const Env& env) {
  switch (e.op()) {
    case Op::constant:
      return e.value();
    case Op::symbol: {
      auto it = env.find(e.name());
      if (it == env.end()) throw Error(ErrorKind::unbound_symbol, "unbound symbol '" + e.name() + "'");
      return it->second;
    }
    case Op::neg:
      return -eval(e.lhs(), env);
    case Op::call:
      return apply_func(e.func(), eval(e.lhs(), env), e);
    default:
      return apply_binary(e.op(), eval(e.lhs(), env), eval(e.rhs(), env), e);
  }
}

// ---------------------------------------------------------------------------
// Symbols

namespace {

void collect(const Expr& e, std::set<std::string>& out) {
  switch (e.op()) {
    case Op::constant: return;
    case Op::symbol: out.insert(e.name()); return;
    case Op::neg:
    case Op::call: collect(e.lhs(), out); return;
    default:
      collect(e.lhs(), out);
      collect(e.rhs(), out);
  }
}

}  // namespace

std::set<std::string> free_symbols(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

bool depends_on(const Expr& e, std::string_view name) {
  switch (e.op()) {
    case Op::constant: return false;
    case Op::symbol: return e.name() == name;
    case Op::neg:
    case Op::call: return depends_on(e.lhs(), name);
    default: return depends_on(e.lhs(), name) || depends_on(e.rhs(), name);
  }
}

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& bindings) {
  switch (e.op()) {
    case Op::constant: return e;
    case Op::symbol: {
      auto it = bindings.find(e.name());
      return it == bindings.end() ? e : it->second;
    }
    case Op::neg: return Expr::negate(substitute(e.lhs(), bindings));
    case Op::call: return Expr::call(e.func(), substitute(e.lhs(), bindings));
    default: return Expr::binary(e.op(), substitute(e.lhs(), bindings), substitute(e.rhs(), bindings));
  }
}

Expr rename_symbols(const Expr& e, const std::function<std::string(const std::string&)>& f) {
  switch (e.op()) {
    case Op::constant: return e;
    case Op::symbol: return Expr::symbol(f(e.name()));
    case Op::neg: return Expr::negate(rename_symbols(e.lhs(), f));
    case Op::call: return Expr::call(e.func(), rename_symbols(e.lhs(), f));
    default: return Expr::binary(e.op(), rename_symbols(e.lhs(), f), rename_symbols(e.rhs(), f));
  }
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

Expr k(double v) { return Expr::constant(v); }

bool is_negative_constant(const Expr& e) { return e.is_constant() && e.value() < 0.0; }

// Folds an operation on constants when the result is a finite number and the
// operation is defined there.
bool try_fold(const Expr& e, double& out) {
  try {
    out = eval(e, Env{});
  } catch (const Error&) {
    return false;
  }
  return std::isfinite(out);
}

Expr simplify_node(const Expr& e) {
  switch (e.op()) {
    case Op::constant:
    case Op::symbol:
      return e;
    case Op::neg: {
      const Expr& a = e.lhs();
      if (a.is_constant()) return k(-a.value());
      if (a.op() == Op::neg) return a.lhs();
      return e;
    }
    case Op::call: {
      double v;
      if (e.lhs().is_constant() && try_fold(e, v)) return k(v);
      return e;
    }
    default:
      break;
  }

  const Expr& a = e.lhs();
  const Expr& b = e.rhs();
  if (a.is_constant() && b.is_constant()) {
    double v;
    if (try_fold(e, v)) return k(v);
    return e;
  }

  switch (e.op()) {
    case Op::add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      if (b.op() == Op::neg) return simplify_node(a - b.lhs());
      if (is_negative_constant(b)) return a - k(-b.value());
      if (a.op() == Op::neg) return simplify_node(b - a.lhs());
      return e;
    case Op::sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return simplify_node(-b);
      if (b.op() == Op::neg) return simplify_node(a + b.lhs());
      if (is_negative_constant(b)) return a + k(-b.value());
      if (a == b) return k(0.0);
      return e;
    case Op::mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return k(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(-1.0)) return simplify_node(-b);
      if (b.is_constant(-1.0)) return simplify_node(-a);
      if (b.is_constant()) return simplify_node(b * a);
      if (a.op() == Op::neg) return simplify_node(-simplify_node(a.lhs() * b));
      if (b.op() == Op::neg) return simplify_node(-simplify_node(a * b.lhs()));
      if (a.is_constant() && b.op() == Op::mul && b.lhs().is_constant()) {
        return simplify_node(k(a.value() * b.lhs().value()) * b.rhs());
      }
      return e;
    case Op::div:
      if (a.is_constant(0.0)) return k(0.0);
      if (b.is_constant(1.0)) return a;
      if (b.is_constant(-1.0)) return simplify_node(-a);
      if (a.op() == Op::neg) return simplify_node(-simplify_node(a.lhs() / b));
      if (b.op() == Op::neg) return simplify_node(-simplify_node(a / b.lhs()));
      if (a.op() == Op::mul && b.op() == Op::mul && a.lhs().is_constant() && b.lhs().is_constant() &&
          a.lhs().value() == b.lhs().value()) {
        return simplify_node(a.rhs() / b.rhs());
      }
      if (a == b && !b.is_constant()) return e;  // x/x is undefined at 0; keep it
      return e;
    case Op::pow:
      if (b.is_constant(1.0)) return a;
      if (b.is_constant(0.0)) return k(1.0);
      if (a.is_constant(1.0)) return k(1.0);
      return e;
    default:
      return e;
  }
}

}  // namespace

Expr simplify(const Expr& e) {
  switch (e.op()) {
    case Op::constant:
    case Op::symbol:
      return e;
    case Op::neg:
      return simplify_node(Expr::negate(simplify(e.lhs())));
    case Op::call:
      return simplify_node(Expr::call(e.func(), simplify(e.lhs())));
    default:
      return simplify_node(Expr::binary(e.op(), simplify(e.lhs()), simplify(e.rhs())));
  }
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr diff(const Expr& e, std::string_view v) {
  switch (e.op()) {
    case Op::constant:
      return k(0.0);
    case Op::symbol:
      return k(e.name() == v ? 1.0 : 0.0);
    case Op::add:
      return simplify(diff(e.lhs(), v) + diff(e.rhs(), v));
    case Op::sub:
      return simplify(diff(e.lhs(), v) - diff(e.rhs(), v));
    case Op::neg:
      return simplify(-diff(e.lhs(), v));
    case Op::mul: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      return simplify(diff(a, v) * b + a * diff(b, v));
    }
    case Op::div: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      if (!depends_on(b, v)) return simplify(diff(a, v) / b);
      return simplify((diff(a, v) * b - a * diff(b, v)) / pow(b, k(2.0)));
    }
    case Op::pow: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      bool base_varies = depends_on(a, v);
      bool exp_varies = depends_on(b, v);
      if (!base_varies && !exp_varies) return k(0.0);
      if (!exp_varies) return simplify(b * pow(a, simplify(b - k(1.0))) * diff(a, v));
      if (!base_varies) return simplify(e * Expr::call(Func::log, a) * diff(b, v));
      return simplify(e * (diff(b, v) * Expr::call(Func::log, a) + b * diff(a, v) / a));
    }
    case Op::call: {
      const Expr& a = e.lhs();
      Expr inner = diff(a, v);
      switch (e.func()) {
        case Func::exp: return simplify(e * inner);
        case Func::log: return simplify(inner / a);
        case Func::sin: return simplify(Expr::call(Func::cos, a) * inner);
        case Func::cos: return simplify(-(Expr::call(Func::sin, a) * inner));
        case Func::sqrt: return simplify(inner / (k(2.0) * e));
      }
      break;
    }
  }
  return k(0.0);
}

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) { return simplify(diff(e, var)); }

// ---------------------------------------------------------------------------
// Compiled evaluation

CompiledExpr::CompiledExpr(const Expr& e, const std::function<int(const std::string&)>& slot_of) : source_(e) {
  emit(e, slot_of);
}

void CompiledExpr::emit(const Expr& e, const std::function<int(const std::string&)>& slot_of) {
  switch (e.op()) {
    case Op::constant:
      constants_.push_back(e.value());
      code_.push_back({Code::konst, static_cast<int>(constants_.size() - 1)});
      return;
    case Op::symbol: {
      int slot = slot_of(e.name());
      if (slot < 0) throw Error(ErrorKind::unbound_symbol, "unbound symbol '" + e.name() + "'");
      symbols_.emplace_back(e.name(), slot);
      code_.push_back({Code::load, slot});
      return;
    }
    case Op::neg:
      emit(e.lhs(), slot_of);
      code_.push_back({Code::neg, 0});
      return;
    case Op::call: {
      emit(e.lhs(), slot_of);
      Code c = Code::exp;
      switch (e.func()) {
        case Func::exp: c = Code::exp; break;
        case Func::log: c = Code::log; break;
        case Func::sin: c = Code::sin; break;
        case Func::cos: c = Code::cos; break;
        case Func::sqrt: c = Code::sqrt; break;
      }
      code_.push_back({c, 0});
      return;
    }
    default:
      break;
  }
  emit(e.lhs(), slot_of);
  emit(e.rhs(), slot_of);
  Code c = Code::add;
  switch (e.op()) {
    case Op::add: c = Code::add; break;
    case Op::sub: c = Code::sub; break;
    case Op::mul: c = Code::mul; break;
    case Op::div: c = Code::div; break;
    case Op::pow: c = Code::pow; break;
    default: break;
  }
  code_.push_back({c, 0});
}

double CompiledExpr::operator()(std::span<const double> slots, std::vector<double>& stack) const {
  stack.clear();
  bool ok = true;
  for (const Instr& in : code_) {
    switch (in.code) {
      case Code::konst: stack.push_back(constants_[in.arg]); break;
      case Code::load: stack.push_back(slots[in.arg]); break;
      case Code::neg: stack.back() = -stack.back(); break;
      case Code::exp: stack.back() = std::exp(stack.back()); break;
      case Code::log:
        ok = ok && stack.back() > 0.0;
        stack.back() = std::log(stack.back());
        break;
      case Code::sin: stack.back() = std::sin(stack.back()); break;
      case Code::cos: stack.back() = std::cos(stack.back()); break;
      case Code::sqrt:
        ok = ok && stack.back() >= 0.0;
        stack.back() = std::sqrt(stack.back());
        break;
      default: {
        double b = stack.back();
        stack.pop_back();
        double& a = stack.back();
        switch (in.code) {
          case Code::add: a += b; break;
          case Code::sub: a -= b; break;
          case Code::mul: a *= b; break;
          case Code::div:
            ok = ok && b != 0.0;
            a /= b;
            break;
          case Code::pow:
            ok = ok && !(a < 0.0 && std::trunc(b) != b) && !(a == 0.0 && b < 0.0);
            a = std::pow(a, b);
            break;
          default: break;
        }
      }
    }
  }
  if (!ok) report_failure(slots);
  return stack.empty() ? 0.0 : stack.back();
}

void CompiledExpr::report_failure(std::span<const double> slots) const {
  Env env;
  for (const auto& [name, slot] : symbols_) env[name] = slots[slot];
  eval(source_, env);  // throws with the failing subexpression
  throw Error(ErrorKind::domain_error, "evaluation failed in '" + to_string(source_) + "'");
}

}  // namespace ephs
