#include "sympres/compiled_expr.hpp"

#include <algorithm>
#include <cmath>

namespace sympres {

namespace {

int arity(ExprKind k) {
  switch (k) {
    case ExprKind::Constant:
    case ExprKind::Variable:
      return 0;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    default:
      return 1;
  }
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

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> vars) {
  // iterative postorder flatten
  struct Frame {
    Expr expr;
    int child = 0;
  };
  std::vector<Frame> stack{{e, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    int n = arity(f.expr.kind());
    if (f.child < n) {
      ++f.child;
      Expr next = (n == 2 && f.child == 2) ? f.expr.right()
                  : (n == 2)               ? f.expr.left()
                                           : f.expr.child();
      stack.push_back({next, 0});
      continue;
    }
    Op op{f.expr.kind()};
    switch (f.expr.kind()) {
      case ExprKind::Constant:
        op.value = f.expr.value();
        break;
      case ExprKind::Variable: {
        auto it = std::find(vars.begin(), vars.end(), f.expr.name());
        if (it == vars.end()) {
          throw ValidationError("unknown variable '" + f.expr.name() + "'");
        }
        op.slot = static_cast<int>(it - vars.begin());
        break;
      }
      case ExprKind::Pow:
        op.exponent = f.expr.exponent();
        break;
      default:
        break;
    }
    ops_.push_back(op);
    op_exprs_.push_back(f.expr);
    stack.pop_back();
  }

  int depth = 0;
  for (const Op& op : ops_) {
    depth += 1 - arity(op.kind);
    stack_depth_ = std::max(stack_depth_, depth);
  }
}

double CompiledExpr::operator()(std::span<const double> values) const {
  double stack[64];
  std::vector<double> big;
  double* sp = stack;
  if (stack_depth_ > 64) {
    big.resize(stack_depth_);
    sp = big.data();
  }
  int top = -1;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    switch (op.kind) {
      case ExprKind::Constant:
        sp[++top] = op.value;
        break;
      case ExprKind::Variable:
        sp[++top] = values[static_cast<std::size_t>(op.slot)];
        break;
      case ExprKind::Add:
        sp[top - 1] += sp[top];
        --top;
        break;
      case ExprKind::Sub:
        sp[top - 1] -= sp[top];
        --top;
        break;
      case ExprKind::Mul:
        sp[top - 1] *= sp[top];
        --top;
        break;
      case ExprKind::Div:
        if (sp[top] == 0.0) {
          throw DomainError("division by zero", to_string(op_exprs_[i]));
        }
        sp[top - 1] /= sp[top];
        --top;
        break;
      case ExprKind::Neg:
        sp[top] = -sp[top];
        break;
      case ExprKind::Pow:
        if (sp[top] == 0.0 && op.exponent < 0) {
          throw DomainError("zero raised to a negative power",
                            to_string(op_exprs_[i]));
        }
        sp[top] = pow_int(sp[top], op.exponent);
        break;
      case ExprKind::Sin:
        sp[top] = std::sin(sp[top]);
        break;
      case ExprKind::Cos:
        sp[top] = std::cos(sp[top]);
        break;
      case ExprKind::Exp:
        sp[top] = std::exp(sp[top]);
        break;
      case ExprKind::Log:
        if (sp[top] <= 0.0) {
          throw DomainError("log of a non-positive value",
                            to_string(op_exprs_[i]));
        }
        sp[top] = std::log(sp[top]);
        break;
      case ExprKind::Sqrt:
        if (sp[top] < 0.0) {
          throw DomainError("sqrt of a negative value",
                            to_string(op_exprs_[i]));
        }
        sp[top] = std::sqrt(sp[top]);
        break;
    }
  }
  return sp[top];
}

}  // namespace sympres
