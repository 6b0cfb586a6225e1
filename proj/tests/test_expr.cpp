#include <doctest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "subfinsler/expr.hpp"

using namespace subfinsler;

namespace {
double eval_at(const std::string& src, std::initializer_list<double> point) {
  std::vector<double> b(point);
  return eval_expr(*parse_expr(src), b);
}
}  // namespace

TEST_CASE("parse and evaluate basic expressions") {
  CHECK(eval_at("-y/2", {0.0, 2.0}) == doctest::Approx(-1.0));
  CHECK(eval_at("x*x + 3", {2.0}) == doctest::Approx(7.0));
  CHECK(eval_at("sin(x)", {0.0}) == doctest::Approx(0.0));
  CHECK(eval_at("x^2", {-3.0}) == doctest::Approx(9.0));
  CHECK(eval_at("2*x1 + x2^3", {1.0, 2.0}) == doctest::Approx(10.0));
  CHECK(eval_at("sqrt(x)", {9.0}) == doctest::Approx(3.0));
  CHECK(eval_at("exp(0)", {1.0}) == doctest::Approx(1.0));
  CHECK(eval_at("x^-2", {2.0}) == doctest::Approx(0.25));
  CHECK(eval_at("1.5e2", {0.0}) == doctest::Approx(150.0));
}

TEST_CASE("precedence: unary minus binds tighter than power") {
  CHECK(eval_at("-2^2", {}) == doctest::Approx(4.0));
  CHECK(eval_at("-(2^2)", {}) == doctest::Approx(-4.0));
  CHECK(eval_at("2+3*4", {}) == doctest::Approx(14.0));
  CHECK(eval_at("(2+3)*4", {}) == doctest::Approx(20.0));
  CHECK(eval_at("2-3-4", {}) == doctest::Approx(-5.0));
  CHECK(eval_at("12/3/2", {}) == doctest::Approx(2.0));
}

TEST_CASE("syntax errors carry byte offsets") {
  CHECK_THROWS_AS(parse_expr(""), SyntaxError);
  CHECK_THROWS_AS(parse_expr("  "), SyntaxError);
  try {
    parse_expr("x +");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse_expr("x ) y"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("sin x"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("x^y"), SyntaxError);   // exponent must be an integer
  CHECK_THROWS_AS(parse_expr("x^1.5"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("(x"), SyntaxError);
}

TEST_CASE("unknown identifiers are rejected") {
  CHECK_THROWS_AS(parse_expr("foo"), UnknownIdentifier);
  CHECK_THROWS_AS(parse_expr("w + 1"), UnknownIdentifier);
  CHECK_THROWS_AS(parse_expr("x0"), UnknownIdentifier);
  CHECK_THROWS_AS(parse_expr("tan(x)"), UnknownIdentifier);
  CHECK_NOTHROW(parse_expr("x12"));
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(eval_at("x/ y", {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(eval_at("sqrt(0-x)", {4.0}), DomainError);
  CHECK_THROWS_AS(eval_at("x^-1", {0.0}), DomainError);
  // x3 unbound when only two coordinates are supplied
  CHECK_THROWS_AS(eval_at("x3", {1.0, 2.0}), UnboundVariable);
}

TEST_CASE("symbolic derivatives of common expressions") {
  auto d = [](const std::string& src, int var, std::initializer_list<double> point) {
    std::vector<double> b(point);
    return eval_expr(*diff_expr(parse_expr(src), var), b);
  };
  CHECK(d("x*x", 0, {3.0}) == doctest::Approx(6.0));
  CHECK(d("y", 0, {5.0, 7.0}) == doctest::Approx(0.0));
  CHECK(d("sin(x)", 0, {0.0}) == doctest::Approx(1.0));
  CHECK(d("x^3", 0, {2.0}) == doctest::Approx(12.0));
  CHECK(d("1/x", 0, {2.0}) == doctest::Approx(-0.25));
  CHECK(d("sqrt(x)", 0, {4.0}) == doctest::Approx(0.25));
  CHECK(d("exp(2*x)", 0, {0.0}) == doctest::Approx(2.0));
  CHECK(d("cos(x)", 0, {M_PI / 2}) == doctest::Approx(-1.0));
}

TEST_CASE("derivatives match central finite differences on random trees") {
  DetRng rng(42);
  const int n_vars = 3;
  int accepted = 0, attempts = 0;
  while (accepted < 200 && attempts < 20000) {
    ++attempts;
    ExprPtr e = oracle::random_expr(rng, 6, n_vars);
    std::array<double, 3> pt{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                             rng.uniform(-1.0, 1.0)};
    int var = static_cast<int>(rng.next_u64() % n_vars);
    ExprPtr de = diff_expr(e, var);

    auto line = [&](double t) {
      std::array<double, 3> q = pt;
      q[static_cast<std::size_t>(var)] = t;
      return eval_expr(*e, q);
    };
    double t0 = pt[static_cast<std::size_t>(var)];
    double h = 1e-6 * (1.0 + std::abs(t0));
    double f0, analytic, fd, fd2;
    try {
      f0 = eval_expr(*e, pt);
      analytic = eval_expr(*de, pt);
      fd = oracle::central_diff(line, t0, h);
      fd2 = oracle::central_diff(line, t0, h / 2);
    } catch (const Error&) {
      continue;  // pole or sqrt boundary hit by this draw
    }
    if (!std::isfinite(analytic) || !std::isfinite(fd) || !std::isfinite(fd2)) continue;
    // Keep only draws where the difference quotient itself is trustworthy:
    // moderate magnitudes and a settled Richardson pair, i.e. not next to a
    // pole or a blown-up exponential where no step size is adequate.
    if (std::abs(f0) > 1e3 || std::abs(fd) > 1e3) continue;
    if (std::abs(fd - fd2) > 1e-7 * (1.0 + std::abs(fd2))) continue;
    ++accepted;
    CHECK(std::abs(analytic - fd) <= 1e-6 * (1.0 + std::abs(fd)));
  }
  CHECK(accepted == 200);
}

TEST_CASE("print then parse round-trips structurally") {
  DetRng rng(7);
  for (int i = 0; i < 200; ++i) {
    ExprPtr e = oracle::random_expr(rng, 5, 3);
    ExprPtr reparsed = parse_expr(to_string(*e));
    CHECK(structurally_equal(*e, *reparsed));
  }
  // Literal negatives normalize through Negate, so they survive printing.
  ExprPtr lit = Expr::literal(-3.0);
  CHECK(structurally_equal(*lit, *parse_expr(to_string(*lit))));
}

TEST_CASE("compiled expressions agree with tree evaluation") {
  DetRng rng(11);
  for (int i = 0; i < 100; ++i) {
    ExprPtr e = oracle::random_expr(rng, 6, 3);
    std::array<double, 3> pt{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                             rng.uniform(-1.0, 1.0)};
    CompiledExpr ce(*e);
    double tree, flat;
    try {
      tree = eval_expr(*e, pt);
    } catch (const Error&) {
      CHECK_THROWS_AS(ce.eval(pt), Error);
      continue;
    }
    flat = ce.eval(pt);
    CHECK(tree == flat);  // same operations in the same order
  }
}
