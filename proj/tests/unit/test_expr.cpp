#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "ephs/error.hpp"
#include "ephs/expr.hpp"
#include "support/generators.hpp"

using namespace ephs;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ephs::Error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("parse and evaluate respect precedence") {
  Env env{{"a", 2}, {"b", 3}};
  CHECK(eval(parse_expr("a + b*2"), env) == 8);
  CHECK(eval(parse_expr("-a^2"), env) == -4);
  CHECK(eval(parse_expr("2^3^2"), env) == 512);
  CHECK(eval(parse_expr("a - b - 1"), env) == -2);
  CHECK(eval(parse_expr("a / b / 2"), env) == doctest::Approx(1.0 / 3));
  CHECK(eval(parse_expr("1.5e2 + exp(0)"), env) == 151);
}

TEST_CASE("printing round-trips through the parser") {
  for (const char* text : {"a + b*c", "(a + b)*c", "a - (b - c)", "a/(b*c)", "-(a + b)", "(-a)^2", "a^(b^c)",
                           "(a^b)^c", "exp(-x)/2", "-(-x)", "2.5e-07*x", "sqrt(x^2 + 1)"}) {
    Expr e = parse_expr(text);
    CAPTURE(text);
    CHECK(parse_expr(to_string(e)) == e);
  }

  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Expr e = testing::random_expr(rng, 5);
    CHECK(parse_expr(to_string(e)) == e);
  }
}

TEST_CASE("symbolic derivatives match central differences") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Expr e = testing::random_expr(rng, 4);
    Env env{{"x", testing::uniform(rng, -1.5, 1.5)}, {"y", testing::uniform(rng, -1.5, 1.5)},
            {"z", testing::uniform(rng, -1.5, 1.5)}};
    for (const char* var : {"x", "y"}) {
      double symbolic = eval(differentiate(e, var), env);
      double numeric = testing::central_derivative(e, env, var);
      CAPTURE(to_string(e));
      CHECK(std::abs(symbolic - numeric) <= 1e-6 * std::max(1.0, std::abs(symbolic)));
    }
  }
}

TEST_CASE("derivatives of elementary functions") {
  Env env{{"x", 0.7}};
  CHECK(eval(differentiate(parse_expr("x^3"), "x"), env) == doctest::Approx(3 * 0.49));
  CHECK(eval(differentiate(parse_expr("log(x)"), "x"), env) == doctest::Approx(1 / 0.7));
  CHECK(eval(differentiate(parse_expr("2^x"), "x"), env) == doctest::Approx(std::log(2.0) * std::pow(2.0, 0.7)));
  CHECK(eval(differentiate(parse_expr("sqrt(x)"), "x"), env) == doctest::Approx(0.5 / std::sqrt(0.7)));
  CHECK(differentiate(parse_expr("y*y"), "x") == Expr::constant(0));
}

TEST_CASE("simplify folds constants and drops identities") {
  CHECK(to_string(simplify(parse_expr("0*x + 1*y"))) == "y");
  CHECK(to_string(simplify(parse_expr("2*3 + x^1"))) == "6 + x");
  CHECK(to_string(simplify(parse_expr("x - 0"))) == "x");
  CHECK(simplify(parse_expr("x/1")) == Expr::symbol("x"));
  CHECK(simplify(parse_expr("-(-x)")) == Expr::symbol("x"));
}

TEST_CASE("simplify never changes values") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    Expr e = testing::random_expr(rng, 5);
    Env env{{"x", testing::uniform(rng, -1.5, 1.5)}, {"y", testing::uniform(rng, -1.5, 1.5)},
            {"z", testing::uniform(rng, -1.5, 1.5)}};
    double a = eval(e, env);
    double b = eval(simplify(e), env);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("evaluation errors carry a kind") {
  CHECK(kind_of([] { eval(parse_expr("x + 1"), {}); }) == ErrorKind::unbound_symbol);
  CHECK(kind_of([] { eval(parse_expr("1/(x - x)"), {{"x", 2}}); }) == ErrorKind::division_by_zero);
  CHECK(kind_of([] { eval(parse_expr("log(x)"), {{"x", -1}}); }) == ErrorKind::domain_error);
  CHECK(kind_of([] { eval(parse_expr("sqrt(x)"), {{"x", -1}}); }) == ErrorKind::domain_error);
  CHECK(kind_of([] { parse_expr("a + * b"); }) == ErrorKind::syntax);
  CHECK(kind_of([] { parse_expr("f(x)"); }) == ErrorKind::syntax);
}

TEST_CASE("compiled expressions agree with the tree walker") {
  std::mt19937_64 rng(5);
  std::vector<double> stack;
  for (int i = 0; i < 200; ++i) {
    Expr e = testing::random_expr(rng, 5);
    std::vector<double> slots = {testing::uniform(rng, -1.5, 1.5), testing::uniform(rng, -1.5, 1.5),
                                 testing::uniform(rng, -1.5, 1.5)};
    CompiledExpr c(e, [](const std::string& s) { return s == "x" ? 0 : s == "y" ? 1 : s == "z" ? 2 : -1; });
    Env env{{"x", slots[0]}, {"y", slots[1]}, {"z", slots[2]}};
    CHECK(c(slots, stack) == eval(e, env));
  }
}

TEST_CASE("symbol utilities") {
  Expr e = parse_expr("a*x + exp(b)");
  CHECK(free_symbols(e) == std::set<std::string>{"a", "b", "x"});
  CHECK(depends_on(e, "b"));
  CHECK_FALSE(depends_on(e, "c"));
  Expr s = substitute(e, {{"x", parse_expr("y + 1")}});
  CHECK(to_string(s) == "a*(y + 1) + exp(b)");
  Expr r = rename_symbols(e, [](const std::string& n) { return "k." + n; });
  CHECK(free_symbols(r) == std::set<std::string>{"k.a", "k.b", "k.x"});
}
