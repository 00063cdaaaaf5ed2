#pragma once

#include <span>
#include <string>
#include <vector>

#include "sympres/expr.hpp"

namespace sympres {

/// Expression flattened to postfix ops with variables bound to slot
/// indices; evaluation is a tight stack loop with no name lookups.
/// Used on grid/sampling hot paths. Immutable after construction and
/// safe to evaluate concurrently.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  /// Binds each variable of `e` to its index in `vars`; unknown
  /// variables are a ValidationError.
  CompiledExpr(const Expr& e, std::span<const std::string> vars);

  /// Evaluates at `values` (aligned with the binding order). Throws
  /// DomainError exactly as tree evaluation does.
  double operator()(std::span<const double> values) const;

  int stack_depth() const { return stack_depth_; }

 private:
  struct Op {
    ExprKind kind;
    double value = 0.0;  // Constant
    int slot = 0;        // Variable
    int exponent = 0;    // Pow
  };
  std::vector<Op> ops_;
  std::vector<Expr> op_exprs_;  // for domain-error reporting only
  int stack_depth_ = 0;
};

}  // namespace sympres
