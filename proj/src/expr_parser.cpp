#include "expr_parser.hpp"

namespace ephs {
namespace detail {

namespace {

Expr parse_sum(TokenStream& ts);

bool lookup_function(const std::string& name, Func& out) {
  static const std::pair<const char*, Func> kFuncs[] = {
      {"exp", Func::exp}, {"log", Func::log}, {"sin", Func::sin}, {"cos", Func::cos}, {"sqrt", Func::sqrt}};
  for (const auto& [n, f] : kFuncs) {
    if (name == n) {
      out = f;
      return true;
    }
  }
  return false;
}

Expr parse_unary(TokenStream& ts);

Expr parse_primary(TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.kind == TokenKind::number) {
    ts.next();
    return Expr::constant(t.number);
  }
  if (t.kind == TokenKind::identifier) {
    Token id = ts.next();
    if (ts.is_punct("(")) {
      Func f;
      if (!lookup_function(id.text, f)) ts.fail_at(id, "unknown function '" + id.text + "'");
      ts.next();
      Expr arg = parse_sum(ts);
      ts.expect_punct(")");
      return Expr::call(f, std::move(arg));
    }
    return Expr::symbol(id.text);
  }
  if (t.kind == TokenKind::punct && t.text == "(") {
    ts.next();
    Expr inner = parse_sum(ts);
    ts.expect_punct(")");
    return inner;
  }
  ts.fail("expected an expression, found " + describe(t));
}

Expr parse_power(TokenStream& ts) {
  Expr base = parse_primary(ts);
  if (ts.accept_punct("^")) {
    Expr exponent = parse_unary(ts);
    return pow(std::move(base), std::move(exponent));
  }
  return base;
}

Expr parse_unary(TokenStream& ts) {
  if (ts.is_punct("-")) {
    // A minus directly on a literal is a negative constant, unless the literal
    // is the base of a power (-2^2 is -(2^2)).
    if (ts.peek(1).kind == TokenKind::number && !ts.is_punct("^", 2)) {
      ts.next();
      double v = ts.next().number;
      return Expr::constant(-v);
    }
    ts.next();
    return Expr::negate(parse_unary(ts));
  }
  return parse_power(ts);
}

Expr parse_product(TokenStream& ts) {
  Expr lhs = parse_unary(ts);
  while (ts.is_punct("*") || ts.is_punct("/")) {
    bool mul = ts.next().text == "*";
    if (ts.is_punct("*")) ts.fail("unexpected '*' ('**' is not an operator; use '^')");
    Expr rhs = parse_unary(ts);
    lhs = mul ? std::move(lhs) * std::move(rhs) : std::move(lhs) / std::move(rhs);
  }
  return lhs;
}

Expr parse_sum(TokenStream& ts) {
  Expr lhs = parse_product(ts);
  while (ts.is_punct("+") || ts.is_punct("-")) {
    bool add = ts.next().text == "+";
    Expr rhs = parse_product(ts);
    lhs = add ? std::move(lhs) + std::move(rhs) : std::move(lhs) - std::move(rhs);
  }
  return lhs;
}

}  // namespace

Expr parse_expression(TokenStream& ts) { return parse_sum(ts); }

}  // namespace detail

Expr parse_expr(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text, "<expr>"), "<expr>");
  Expr e = detail::parse_expression(ts);
  if (!ts.at_end()) ts.fail("unexpected " + detail::describe(ts.peek()) + " after expression");
  return e;
}

}  // namespace ephs
