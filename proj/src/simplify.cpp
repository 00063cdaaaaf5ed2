#include <cmath>
#include <optional>

#include "sympres/expr.hpp"

namespace sympres {

namespace {

// Normal form for literal values: nonnegative Constant, or Neg(Constant)
// for negative values, so printed trees reparse structurally.
Expr fold(double v) {
  if (v == 0.0) return Expr::constant(0.0);
  if (v < 0.0 || std::signbit(v)) return -Expr::constant(-v);
  return Expr::constant(v);
}

std::optional<double> as_const(const Expr& e) {
  if (e.is(ExprKind::Constant)) return e.value();
  if (e.is(ExprKind::Neg) && e.child().is(ExprKind::Constant)) {
    return -e.child().value();
  }
  return std::nullopt;
}

bool is_zero(const Expr& e) {
  auto c = as_const(e);
  return c && *c == 0.0;
}

bool is_const(const Expr& e, double v) {
  auto c = as_const(e);
  return c && *c == v;
}

double pow_int(double base, int n) {
  double result = 1.0, acc = base;
  bool invert = n < 0;
  for (unsigned k = invert ? -static_cast<unsigned>(n) : static_cast<unsigned>(n);
       k != 0; k >>= 1) {
    if (k & 1u) result *= acc;
    acc *= acc;
  }
  return invert ? 1.0 / result : result;
}

// Local rules at a node whose children are already simplified.
Expr rewrite(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return fold(e.value());
    case ExprKind::Variable:
      return e;
    case ExprKind::Add: {
      auto a = as_const(e.left()), b = as_const(e.right());
      if (a && b) return fold(*a + *b);
      if (is_zero(e.left())) return e.right();
      if (is_zero(e.right())) return e.left();
      return e;
    }
    case ExprKind::Sub: {
      auto a = as_const(e.left()), b = as_const(e.right());
      if (a && b) return fold(*a - *b);
      if (is_zero(e.right())) return e.left();
      if (is_zero(e.left())) return -e.right();
      return e;
    }
    case ExprKind::Mul: {
      auto a = as_const(e.left()), b = as_const(e.right());
      if (a && b) return fold(*a * *b);
      if (is_zero(e.left()) || is_zero(e.right())) return Expr::constant(0.0);
      if (is_const(e.left(), 1.0)) return e.right();
      if (is_const(e.right(), 1.0)) return e.left();
      return e;
    }
    case ExprKind::Div: {
      auto a = as_const(e.left()), b = as_const(e.right());
      if (a && b && *b != 0.0) return fold(*a / *b);
      if (is_zero(e.left())) return Expr::constant(0.0);
      if (is_const(e.right(), 1.0)) return e.left();
      return e;
    }
    case ExprKind::Neg: {
      if (e.child().is(ExprKind::Neg)) return e.child().child();
      if (is_zero(e.child())) return Expr::constant(0.0);
      return e;
    }
    case ExprKind::Pow: {
      if (e.exponent() == 0) return Expr::constant(1.0);
      if (e.exponent() == 1) return e.child();
      if (auto c = as_const(e.child())) {
        if (!(*c == 0.0 && e.exponent() < 0)) return fold(pow_int(*c, e.exponent()));
      }
      return e;
    }
    case ExprKind::Sin:
      if (auto c = as_const(e.child())) return fold(std::sin(*c));
      return e;
    case ExprKind::Cos:
      if (auto c = as_const(e.child())) return fold(std::cos(*c));
      return e;
    case ExprKind::Exp:
      if (auto c = as_const(e.child())) return fold(std::exp(*c));
      return e;
    case ExprKind::Log:
      if (auto c = as_const(e.child()); c && *c > 0.0) return fold(std::log(*c));
      return e;
    case ExprKind::Sqrt:
      if (auto c = as_const(e.child()); c && *c >= 0.0) return fold(std::sqrt(*c));
      return e;
  }
  return e;
}

Expr simplify_rec(const Expr& e) {
  Expr out = e;
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Variable:
      break;
    case ExprKind::Pow: {
      Expr c = simplify_rec(e.child());
      if (c != e.child()) out = pow(c, e.exponent());
      break;
    }
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt: {
      Expr c = simplify_rec(e.child());
      if (c != e.child()) out = make_unary(e.kind(), c);
      break;
    }
    default: {
      Expr l = simplify_rec(e.left());
      Expr r = simplify_rec(e.right());
      if (l != e.left() || r != e.right()) out = make_binary(e.kind(), l, r);
    }
  }
  // rules may expose new opportunities at this node (e.g. -(-x) after
  // children folded); iterate locally until stable
  while (true) {
    Expr next = rewrite(out);
    if (next == out) return out;
    // a rule that changed the node kind may need its new children revisited
    out = simplify_rec(next);
  }
}

}  // namespace

Expr simplify(const Expr& e) { return simplify_rec(e); }

}  // namespace sympres
