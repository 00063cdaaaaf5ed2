#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sympres {

enum class ExprKind {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,  // integer exponent only
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
};

/// Immutable symbolic expression tree over named real variables.
/// Value type: copies share structure, so copying is cheap and every
/// operation below is a pure function safe for concurrent use.
class Expr {
 public:
  /// Defaults to the constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::string name);

  ExprKind kind() const;
  bool is(ExprKind k) const;

  double value() const;             // Constant only
  const std::string& name() const;  // Variable only
  int exponent() const;             // Pow only
  Expr child() const;               // unary nodes and Pow base
  Expr left() const;                // binary nodes
  Expr right() const;               // binary nodes

  /// Structural equality (same tree shape, names, values, exponents).
  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  struct Node;
  const Node* node() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend Expr make_unary(ExprKind, Expr);
  friend Expr make_binary(ExprKind, Expr, Expr);
  friend Expr pow(Expr base, int exponent);
};

struct Expr::Node {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;      // Constant
  std::string name;        // Variable
  int exponent = 0;        // Pow
  std::shared_ptr<const Node> a;  // unary child / binary left / Pow base
  std::shared_ptr<const Node> b;  // binary right
};

inline ExprKind Expr::kind() const { return node_->kind; }
inline bool Expr::is(ExprKind k) const { return node_->kind == k; }

Expr make_unary(ExprKind kind, Expr child);
Expr make_binary(ExprKind kind, Expr left, Expr right);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr pow(Expr base, int exponent);
Expr sin(Expr a);
Expr cos(Expr a);
Expr exp(Expr a);
Expr log(Expr a);
Expr sqrt(Expr a);

/// Variable assignment used for evaluation; must cover the free variables
/// of any expression it is applied to.
using Env = std::map<std::string, double, std::less<>>;

/// Closed interval used as a per-variable sampling range.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Per-variable sampling box for randomized identity testing.
using Box = std::map<std::string, Interval, std::less<>>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected);
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Evaluation failure: division by zero, log of a non-positive value,
/// sqrt of a negative value, or 0 raised to a negative power.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string what, std::string subtree);
  const std::string& subtree() const { return subtree_; }

 private:
  std::string subtree_;
};

/// Invalid construction of a domain object (bad chart, map, candidate, or
/// problem file). The CLI maps this to an input error.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the expression grammar:
///   expr  := term (('+'|'-') term)*
///   term  := unary (('*'|'/') unary)*
///   unary := '-' unary | power
///   power := atom ('^' integer)?
///   atom  := number | ident | ident '(' expr ')' | '(' expr ')'
/// Functions: sin, cos, exp, log, sqrt. The identifier pi is predefined.
Expr parse(std::string_view text);

double evaluate(const Expr& e, const Env& env);

/// Exact symbolic partial derivative, passed through simplify().
Expr differentiate(const Expr& e, std::string_view var);

/// Bounded bottom-up rewriter: constant folding plus the identity rules
/// x+0, x*1, x*0, x^0, x^1, -(-x), 0/x, applied to a fixpoint. Negative
/// constants normalize to Neg(positive) so printed trees reparse
/// structurally. Idempotent; semantics-preserving wherever the input is
/// defined.
Expr simplify(const Expr& e);

/// Prints with minimal parentheses; parse(to_string(e)) reproduces
/// simplify-normalized trees exactly (doubles via shortest round-trip).
std::string to_string(const Expr& e);

std::set<std::string> free_variables(const Expr& e);

/// Simultaneous substitution of expressions for variables.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

struct EquivalenceMismatch {
  Env witness;
  double gap = 0.0;  // raw |e1 - e2| at the witness
};

struct EquivalenceResult {
  bool equivalent = false;
  std::optional<EquivalenceMismatch> mismatch;
  int samples_used = 0;
};

/// Seeded randomized identity test: samples n points uniformly in the box
/// and accepts iff |e1-e2| <= tol*(1+|e1|) at every sample. Probabilistic:
/// agreement on all samples is evidence, not proof. Samples where either
/// side is undefined are resampled, up to 10n attempts in total.
EquivalenceResult equivalent(const Expr& e1, const Expr& e2, const Box& box,
                             int n = 64, double tol = 1e-9,
                             std::uint64_t seed = 42);

}  // namespace sympres
