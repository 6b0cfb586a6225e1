#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subfinsler/errors.hpp"

namespace subfinsler {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
  Literal,   // nonnegative constant (negatives are Negate(Literal))
  Variable,  // chart coordinate, 0-based index
  Negate,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent
  Sin,
  Cos,
  Exp,
  Sqrt,
};

/// Immutable arithmetic expression over chart coordinates x1..xn
/// (x, y, z are accepted as aliases of x1, x2, x3). Trees are shared via
/// shared_ptr and never mutated after construction, so evaluation is
/// reentrant and safe across threads.
struct Expr {
  ExprKind kind = ExprKind::Literal;
  double value = 0.0;  // Literal
  int var = -1;        // Variable
  long exponent = 0;   // Pow
  ExprPtr a, b;        // children; unary nodes use `a` only

  static ExprPtr literal(double v);
  static ExprPtr variable(int index);
  static ExprPtr negate(ExprPtr e);
  static ExprPtr add(ExprPtr lhs, ExprPtr rhs);
  static ExprPtr sub(ExprPtr lhs, ExprPtr rhs);
  static ExprPtr mul(ExprPtr lhs, ExprPtr rhs);
  static ExprPtr div(ExprPtr lhs, ExprPtr rhs);
  static ExprPtr pow(ExprPtr base, long exponent);
  static ExprPtr call(ExprKind fn, ExprPtr arg);
};

/// Parse `src` with precedence unary minus > integer power > * / > + -.
/// Throws SyntaxError (with byte offset) or UnknownIdentifier.
ExprPtr parse_expr(std::string_view src);

/// IEEE double value of `e` with coordinate i bound to bindings[i].
/// Throws DomainError (division by zero, sqrt of a negative) or
/// UnboundVariable.
double eval_expr(const Expr& e, std::span<const double> bindings);

/// Exact symbolic derivative with respect to coordinate `var` (0-based).
/// No simplification beyond correctness.
ExprPtr diff_expr(const ExprPtr& e, int var);

/// Fully parenthesized text; parse_expr(to_string(e)) is structurally
/// equal to e.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& lhs, const Expr& rhs);

/// Largest 0-based variable index appearing in e, or -1 if none.
int max_variable(const Expr& e);

/// Flat postfix program compiled from an Expr. Same values and same error
/// behavior as eval_expr, without recursion; used in integration loops.
class CompiledExpr {
public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  double eval(std::span<const double> bindings) const;

private:
  struct Op {
    ExprKind kind;
    double value;    // Literal
    int var;         // Variable
    long exponent;   // Pow
  };
  std::vector<Op> ops_;
  int stack_size_ = 0;
};

}  // namespace subfinsler
