#include "subfinsler/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace subfinsler {

namespace {

// Integer power by squaring. Shared by eval_expr and CompiledExpr so the two
// paths are bit-identical.
double ipow(double base, long n) {
  if (n < 0) {
    if (base == 0.0) throw DomainError("zero raised to a negative power");
    return 1.0 / ipow(base, -n);
  }
  double acc = 1.0, cur = base;
  while (n > 0) {
    if (n & 1) acc *= cur;
    cur *= cur;
    n >>= 1;
  }
  return acc;
}

double apply_fn(ExprKind kind, double v) {
  switch (kind) {
    case ExprKind::Sin: return std::sin(v);
    case ExprKind::Cos: return std::cos(v);
    case ExprKind::Exp: return std::exp(v);
    case ExprKind::Sqrt:
      if (v < 0.0) throw DomainError("sqrt of a negative value");
      return std::sqrt(v);
    default: throw Error("not a function kind");
  }
}

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr Expr::literal(double v) {
  if (v < 0.0) return negate(literal(-v));
  if (v == 0.0) v = 0.0;  // normalize -0.0
  Expr e;
  e.kind = ExprKind::Literal;
  e.value = v;
  return make(std::move(e));
}

ExprPtr Expr::variable(int index) {
  Expr e;
  e.kind = ExprKind::Variable;
  e.var = index;
  return make(std::move(e));
}

ExprPtr Expr::negate(ExprPtr x) {
  Expr e;
  e.kind = ExprKind::Negate;
  e.a = std::move(x);
  return make(std::move(e));
}

ExprPtr Expr::add(ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = ExprKind::Add;
  e.a = std::move(lhs);
  e.b = std::move(rhs);
  return make(std::move(e));
}

ExprPtr Expr::sub(ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = ExprKind::Sub;
  e.a = std::move(lhs);
  e.b = std::move(rhs);
  return make(std::move(e));
}

ExprPtr Expr::mul(ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = ExprKind::Mul;
  e.a = std::move(lhs);
  e.b = std::move(rhs);
  return make(std::move(e));
}

ExprPtr Expr::div(ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = ExprKind::Div;
  e.a = std::move(lhs);
  e.b = std::move(rhs);
  return make(std::move(e));
}

ExprPtr Expr::pow(ExprPtr base, long exponent) {
  Expr e;
  e.kind = ExprKind::Pow;
  e.a = std::move(base);
  e.exponent = exponent;
  return make(std::move(e));
}

ExprPtr Expr::call(ExprKind fn, ExprPtr arg) {
  Expr e;
  e.kind = fn;
  e.a = std::move(arg);
  return make(std::move(e));
}

// ---------------------------------------------------------------------------
// Parser: recursive descent.
//
//   expression := term { ('+'|'-') term }
//   term       := factor { ('*'|'/') factor }
//   factor     := unary { '^' integer }
//   unary      := '-' unary | primary
//   primary    := number | ident | ident '(' expression ')' | '(' expression ')'
//
// Unary minus binds tighter than '^', so "-x^2" is (-x)^2.

namespace {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < src.size() && src[pos] == c;
  }

  bool eat(char c) {
    if (peek_is(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!eat(c)) throw SyntaxError(std::string("expected ") + what, pos);
  }

  ExprPtr parse_expression() {
    ExprPtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = Expr::add(std::move(lhs), parse_term());
      } else if (eat('-')) {
        lhs = Expr::sub(std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    for (;;) {
      if (eat('*')) {
        lhs = Expr::mul(std::move(lhs), parse_factor());
      } else if (eat('/')) {
        lhs = Expr::div(std::move(lhs), parse_factor());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_factor() {
    ExprPtr base = parse_unary();
    while (eat('^')) base = Expr::pow(std::move(base), parse_exponent());
    return base;
  }

  long parse_exponent() {
    skip_ws();
    std::size_t start = pos;
    if (pos < src.size() && (src[pos] == '-' || src[pos] == '+')) ++pos;
    std::size_t digits = pos;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
    if (pos == digits) throw SyntaxError("expected integer exponent", start);
    long value = 0;
    auto res = std::from_chars(src.data() + start, src.data() + pos, value);
    if (res.ec != std::errc{}) throw SyntaxError("integer exponent out of range", start);
    return value;
  }

  ExprPtr parse_unary() {
    if (eat('-')) return Expr::negate(parse_unary());
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos >= src.size()) throw SyntaxError("unexpected end of input", pos);
    char c = src[pos];
    if (c == '(') {
      ++pos;
      ExprPtr inner = parse_expression();
      expect(')', "')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
  }

  ExprPtr parse_number() {
    std::size_t start = pos;
    double value = 0.0;
    auto res = std::from_chars(src.data() + start, src.data() + src.size(), value);
    if (res.ec != std::errc{} || res.ptr == src.data() + start)
      throw SyntaxError("malformed number", start);
    pos = static_cast<std::size_t>(res.ptr - src.data());
    return Expr::literal(value);
  }

  ExprPtr parse_identifier() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name(src.substr(start, pos - start));

    if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt") {
      ExprKind fn = name == "sin"   ? ExprKind::Sin
                    : name == "cos" ? ExprKind::Cos
                    : name == "exp" ? ExprKind::Exp
                                    : ExprKind::Sqrt;
      expect('(', "'(' after function name");
      ExprPtr arg = parse_expression();
      expect(')', "')'");
      return Expr::call(fn, std::move(arg));
    }
    if (name == "x") return Expr::variable(0);
    if (name == "y") return Expr::variable(1);
    if (name == "z") return Expr::variable(2);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int index = 0;
        auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
        if (res.ec == std::errc{} && index >= 1) return Expr::variable(index - 1);
      }
    }
    throw UnknownIdentifier(name, start);
  }
};

}  // namespace

ExprPtr parse_expr(std::string_view src) {
  Parser parser{src};
  parser.skip_ws();
  if (parser.pos >= src.size()) throw SyntaxError("empty expression", 0);
  ExprPtr e = parser.parse_expression();
  parser.skip_ws();
  if (parser.pos != src.size())
    throw SyntaxError("trailing input after expression", parser.pos);
  return e;
}

double eval_expr(const Expr& e, std::span<const double> bindings) {
  switch (e.kind) {
    case ExprKind::Literal: return e.value;
    case ExprKind::Variable:
      if (e.var < 0 || static_cast<std::size_t>(e.var) >= bindings.size())
        throw UnboundVariable("variable x" + std::to_string(e.var + 1) + " is not bound");
      return bindings[static_cast<std::size_t>(e.var)];
    case ExprKind::Negate: return -eval_expr(*e.a, bindings);
    case ExprKind::Add: return eval_expr(*e.a, bindings) + eval_expr(*e.b, bindings);
    case ExprKind::Sub: return eval_expr(*e.a, bindings) - eval_expr(*e.b, bindings);
    case ExprKind::Mul: return eval_expr(*e.a, bindings) * eval_expr(*e.b, bindings);
    case ExprKind::Div: {
      double num = eval_expr(*e.a, bindings);
      double den = eval_expr(*e.b, bindings);
      if (den == 0.0) throw DomainError("division by zero");
      return num / den;
    }
    case ExprKind::Pow: return ipow(eval_expr(*e.a, bindings), e.exponent);
    default: return apply_fn(e.kind, eval_expr(*e.a, bindings));
  }
}

ExprPtr diff_expr(const ExprPtr& e, int var) {
  using E = Expr;
  switch (e->kind) {
    case ExprKind::Literal: return E::literal(0.0);
    case ExprKind::Variable: return E::literal(e->var == var ? 1.0 : 0.0);
    case ExprKind::Negate: return E::negate(diff_expr(e->a, var));
    case ExprKind::Add: return E::add(diff_expr(e->a, var), diff_expr(e->b, var));
    case ExprKind::Sub: return E::sub(diff_expr(e->a, var), diff_expr(e->b, var));
    case ExprKind::Mul:
      return E::add(E::mul(diff_expr(e->a, var), e->b), E::mul(e->a, diff_expr(e->b, var)));
    case ExprKind::Div:
      // (u/v)' = (u'v - uv') / v^2
      return E::div(E::sub(E::mul(diff_expr(e->a, var), e->b), E::mul(e->a, diff_expr(e->b, var))),
                    E::pow(e->b, 2));
    case ExprKind::Pow:
      if (e->exponent == 0) return E::literal(0.0);
      return E::mul(E::mul(E::literal(static_cast<double>(e->exponent)),
                           E::pow(e->a, e->exponent - 1)),
                    diff_expr(e->a, var));
    case ExprKind::Sin: return E::mul(E::call(ExprKind::Cos, e->a), diff_expr(e->a, var));
    case ExprKind::Cos:
      return E::negate(E::mul(E::call(ExprKind::Sin, e->a), diff_expr(e->a, var)));
    case ExprKind::Exp: return E::mul(E::call(ExprKind::Exp, e->a), diff_expr(e->a, var));
    case ExprKind::Sqrt:
      // (sqrt u)' = u' / (2 sqrt u)
      return E::div(diff_expr(e->a, var),
                    E::mul(E::literal(2.0), E::call(ExprKind::Sqrt, e->a)));
  }
  throw Error("unreachable expression kind");
}

namespace {

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Literal: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", e.value);
      out += buf;
      return;
    }
    case ExprKind::Variable:
      out += "x" + std::to_string(e.var + 1);
      return;
    case ExprKind::Negate:
      out += "(-";
      print(*e.a, out);
      out += ")";
      return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      const char* op = e.kind == ExprKind::Add   ? "+"
                       : e.kind == ExprKind::Sub ? "-"
                       : e.kind == ExprKind::Mul ? "*"
                                                 : "/";
      out += "(";
      print(*e.a, out);
      out += op;
      print(*e.b, out);
      out += ")";
      return;
    }
    case ExprKind::Pow:
      out += "(";
      print(*e.a, out);
      out += "^" + std::to_string(e.exponent) + ")";
      return;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Sqrt: {
      const char* fn = e.kind == ExprKind::Sin   ? "sin"
                       : e.kind == ExprKind::Cos ? "cos"
                       : e.kind == ExprKind::Exp ? "exp"
                                                 : "sqrt";
      out += fn;
      out += "(";
      print(*e.a, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool structurally_equal(const Expr& lhs, const Expr& rhs) {
  if (lhs.kind != rhs.kind) return false;
  switch (lhs.kind) {
    case ExprKind::Literal: return lhs.value == rhs.value;
    case ExprKind::Variable: return lhs.var == rhs.var;
    case ExprKind::Pow:
      return lhs.exponent == rhs.exponent && structurally_equal(*lhs.a, *rhs.a);
    case ExprKind::Negate:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Sqrt:
      return structurally_equal(*lhs.a, *rhs.a);
    default:
      return structurally_equal(*lhs.a, *rhs.a) && structurally_equal(*lhs.b, *rhs.b);
  }
}

int max_variable(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Literal: return -1;
    case ExprKind::Variable: return e.var;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return std::max(max_variable(*e.a), max_variable(*e.b));
    default: return max_variable(*e.a);
  }
}

// ---------------------------------------------------------------------------
// CompiledExpr

CompiledExpr::CompiledExpr(const Expr& e) {
  // Postorder flatten; track worst-case stack depth.
  int depth = 0;
  auto emit = [&](const Expr& node, auto&& self) -> void {
    switch (node.kind) {
      case ExprKind::Literal:
      case ExprKind::Variable:
        ++depth;
        stack_size_ = std::max(stack_size_, depth);
        break;
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
        self(*node.a, self);
        self(*node.b, self);
        --depth;
        break;
      default:
        self(*node.a, self);
        break;
    }
    ops_.push_back(Op{node.kind, node.value, node.var, node.exponent});
  };
  emit(e, emit);
}

double CompiledExpr::eval(std::span<const double> bindings) const {
  if (ops_.empty()) throw Error("evaluating an empty compiled expression");
  double local[64];
  std::vector<double> heap;
  double* stack = local;
  if (stack_size_ > 64) {
    heap.resize(static_cast<std::size_t>(stack_size_));
    stack = heap.data();
  }
  int top = 0;
  for (const Op& op : ops_) {
    switch (op.kind) {
      case ExprKind::Literal: stack[top++] = op.value; break;
      case ExprKind::Variable:
        if (op.var < 0 || static_cast<std::size_t>(op.var) >= bindings.size())
          throw UnboundVariable("variable x" + std::to_string(op.var + 1) + " is not bound");
        stack[top++] = bindings[static_cast<std::size_t>(op.var)];
        break;
      case ExprKind::Negate: stack[top - 1] = -stack[top - 1]; break;
      case ExprKind::Add:
        stack[top - 2] += stack[top - 1];
        --top;
        break;
      case ExprKind::Sub:
        stack[top - 2] -= stack[top - 1];
        --top;
        break;
      case ExprKind::Mul:
        stack[top - 2] *= stack[top - 1];
        --top;
        break;
      case ExprKind::Div:
        if (stack[top - 1] == 0.0) throw DomainError("division by zero");
        stack[top - 2] /= stack[top - 1];
        --top;
        break;
      case ExprKind::Pow: stack[top - 1] = ipow(stack[top - 1], op.exponent); break;
      default: stack[top - 1] = apply_fn(op.kind, stack[top - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace subfinsler
