#include "sympres/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "sympres/sampling.hpp"

namespace sympres {

namespace {

std::shared_ptr<const Expr::Node> make_node(Expr::Node n) {
  return std::make_shared<const Expr::Node>(std::move(n));
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace

Expr::Expr() : node_(make_node({})) {}

Expr Expr::constant(double value) {
  Node n;
  n.value = value;
  return Expr(make_node(std::move(n)));
}

Expr Expr::variable(std::string name) {
  if (!valid_identifier(name)) {
    throw ValidationError("invalid variable name '" + name + "'");
  }
  Node n;
  n.kind = ExprKind::Variable;
  n.name = std::move(name);
  return Expr(make_node(std::move(n)));
}

double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
int Expr::exponent() const { return node_->exponent; }
Expr Expr::child() const { return Expr(node_->a); }
Expr Expr::left() const { return Expr(node_->a); }
Expr Expr::right() const { return Expr(node_->b); }

bool operator==(const Expr& a, const Expr& b) {
  const Expr::Node* x = a.node();
  const Expr::Node* y = b.node();
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case ExprKind::Constant:
      // bit-for-bit apart from -0 == +0; NaN constants never arise
      return x->value == y->value &&
             std::signbit(x->value) == std::signbit(y->value);
    case ExprKind::Variable:
      return x->name == y->name;
    case ExprKind::Pow:
      return x->exponent == y->exponent && a.child() == b.child();
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
      return a.child() == b.child();
    default:
      return a.left() == b.left() && a.right() == b.right();
  }
}

Expr make_unary(ExprKind kind, Expr child) {
  Expr::Node n;
  n.kind = kind;
  n.a = child.node_;
  return Expr(make_node(std::move(n)));
}

Expr make_binary(ExprKind kind, Expr left, Expr right) {
  Expr::Node n;
  n.kind = kind;
  n.a = left.node_;
  n.b = right.node_;
  return Expr(make_node(std::move(n)));
}

Expr operator+(Expr a, Expr b) { return make_binary(ExprKind::Add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return make_binary(ExprKind::Sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return make_binary(ExprKind::Mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return make_binary(ExprKind::Div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return make_unary(ExprKind::Neg, std::move(a)); }

Expr pow(Expr base, int exponent) {
  Expr::Node n;
  n.kind = ExprKind::Pow;
  n.exponent = exponent;
  n.a = base.node_;
  return Expr(make_node(std::move(n)));
}

Expr sin(Expr a) { return make_unary(ExprKind::Sin, std::move(a)); }
Expr cos(Expr a) { return make_unary(ExprKind::Cos, std::move(a)); }
Expr exp(Expr a) { return make_unary(ExprKind::Exp, std::move(a)); }
Expr log(Expr a) { return make_unary(ExprKind::Log, std::move(a)); }
Expr sqrt(Expr a) { return make_unary(ExprKind::Sqrt, std::move(a)); }

ParseError::ParseError(std::size_t offset, std::string expected)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) +
                         ": expected " + expected),
      offset_(offset),
      expected_(std::move(expected)) {}

DomainError::DomainError(std::string what, std::string subtree)
    : std::runtime_error(what + " in '" + subtree + "'"),
      subtree_(std::move(subtree)) {}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_rec(const Expr& e, int parent_min, std::string& out) {
  int prec = precedence(e.kind());
  bool parens = prec < parent_min;
  if (parens) out += '(';
  switch (e.kind()) {
    case ExprKind::Constant:
      out += format_double(e.value());
      break;
    case ExprKind::Variable:
      out += e.name();
      break;
    case ExprKind::Add:
      print_rec(e.left(), 1, out);
      out += '+';
      print_rec(e.right(), 2, out);
      break;
    case ExprKind::Sub:
      print_rec(e.left(), 1, out);
      out += '-';
      print_rec(e.right(), 2, out);
      break;
    case ExprKind::Mul:
      print_rec(e.left(), 2, out);
      out += '*';
      // parenthesize Neg on the right for readability; reparses identically
      print_rec(e.right(), e.right().is(ExprKind::Neg) ? 4 : 3, out);
      break;
    case ExprKind::Div:
      print_rec(e.left(), 2, out);
      out += '/';
      print_rec(e.right(), e.right().is(ExprKind::Neg) ? 4 : 3, out);
      break;
    case ExprKind::Neg:
      out += '-';
      print_rec(e.child(), 3, out);
      break;
    case ExprKind::Pow:
      print_rec(e.child(), 5, out);
      out += '^';
      out += std::to_string(e.exponent());
      break;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt: {
      const char* names[] = {"sin", "cos", "exp", "log", "sqrt"};
      out += names[static_cast<int>(e.kind()) - static_cast<int>(ExprKind::Sin)];
      out += '(';
      print_rec(e.child(), 0, out);
      out += ')';
      break;
    }
  }
  if (parens) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print_rec(e, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double pow_int(double base, int n, const Expr& site) {
  if (n < 0) {
    if (base == 0.0) {
      throw DomainError("zero raised to a negative power", to_string(site));
    }
    return 1.0 / pow_int(base, -n, site);
  }
  double result = 1.0;
  double acc = base;
  for (unsigned k = static_cast<unsigned>(n); k != 0; k >>= 1) {
    if (k & 1u) result *= acc;
    acc *= acc;
  }
  return result;
}

double eval_rec(const Expr& e, const Env& env) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e.value();
    case ExprKind::Variable: {
      auto it = env.find(e.name());
      if (it == env.end()) {
        throw ValidationError("unbound variable '" + e.name() + "'");
      }
      return it->second;
    }
    case ExprKind::Add:
      return eval_rec(e.left(), env) + eval_rec(e.right(), env);
    case ExprKind::Sub:
      return eval_rec(e.left(), env) - eval_rec(e.right(), env);
    case ExprKind::Mul:
      return eval_rec(e.left(), env) * eval_rec(e.right(), env);
    case ExprKind::Div: {
      double num = eval_rec(e.left(), env);
      double den = eval_rec(e.right(), env);
      if (den == 0.0) throw DomainError("division by zero", to_string(e));
      return num / den;
    }
    case ExprKind::Neg:
      return -eval_rec(e.child(), env);
    case ExprKind::Pow:
      return pow_int(eval_rec(e.child(), env), e.exponent(), e);
    case ExprKind::Sin:
      return std::sin(eval_rec(e.child(), env));
    case ExprKind::Cos:
      return std::cos(eval_rec(e.child(), env));
    case ExprKind::Exp:
      return std::exp(eval_rec(e.child(), env));
    case ExprKind::Log: {
      double v = eval_rec(e.child(), env);
      if (v <= 0.0) throw DomainError("log of a non-positive value", to_string(e));
      return std::log(v);
    }
    case ExprKind::Sqrt: {
      double v = eval_rec(e.child(), env);
      if (v < 0.0) throw DomainError("sqrt of a negative value", to_string(e));
      return std::sqrt(v);
    }
  }
  throw std::logic_error("unreachable expression kind");
}

}  // namespace

double evaluate(const Expr& e, const Env& env) { return eval_rec(e, env); }

// ---------------------------------------------------------------------------
// Free variables / substitution

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return;
    case ExprKind::Variable:
      out.insert(e.name());
      return;
    case ExprKind::Neg:
    case ExprKind::Pow:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
      collect_vars(e.child(), out);
      return;
    default:
      collect_vars(e.left(), out);
      collect_vars(e.right(), out);
  }
}

}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e;
    case ExprKind::Variable: {
      auto it = bindings.find(e.name());
      return it == bindings.end() ? e : it->second;
    }
    case ExprKind::Pow:
      return pow(substitute(e.child(), bindings), e.exponent());
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
      return make_unary(e.kind(), substitute(e.child(), bindings));
    default:
      return make_binary(e.kind(), substitute(e.left(), bindings),
                         substitute(e.right(), bindings));
  }
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr diff_rec(const Expr& e, std::string_view var) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return Expr::constant(0);
    case ExprKind::Variable:
      return Expr::constant(e.name() == var ? 1 : 0);
    case ExprKind::Add:
      return diff_rec(e.left(), var) + diff_rec(e.right(), var);
    case ExprKind::Sub:
      return diff_rec(e.left(), var) - diff_rec(e.right(), var);
    case ExprKind::Mul:
      return diff_rec(e.left(), var) * e.right() +
             e.left() * diff_rec(e.right(), var);
    case ExprKind::Div:
      return (diff_rec(e.left(), var) * e.right() -
              e.left() * diff_rec(e.right(), var)) /
             pow(e.right(), 2);
    case ExprKind::Neg:
      return -diff_rec(e.child(), var);
    case ExprKind::Pow: {
      int n = e.exponent();
      if (n == 0) return Expr::constant(0);
      return Expr::constant(n) * pow(e.child(), n - 1) *
             diff_rec(e.child(), var);
    }
    case ExprKind::Sin:
      return cos(e.child()) * diff_rec(e.child(), var);
    case ExprKind::Cos:
      return -sin(e.child()) * diff_rec(e.child(), var);
    case ExprKind::Exp:
      return exp(e.child()) * diff_rec(e.child(), var);
    case ExprKind::Log:
      return diff_rec(e.child(), var) / e.child();
    case ExprKind::Sqrt:
      return diff_rec(e.child(), var) / (Expr::constant(2) * sqrt(e.child()));
  }
  throw std::logic_error("unreachable expression kind");
}

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) {
  return simplify(diff_rec(e, var));
}

// ---------------------------------------------------------------------------
// Randomized equivalence

EquivalenceResult equivalent(const Expr& e1, const Expr& e2, const Box& box,
                             int n, double tol, std::uint64_t seed) {
  if (n < 1) throw ValidationError("equivalent: need n >= 1 samples");
  std::set<std::string> vars = free_variables(e1);
  collect_vars(e2, vars);
  for (const auto& v : vars) {
    if (!box.count(v)) {
      throw ValidationError("equivalent: box does not bound variable '" + v + "'");
    }
  }

  SampleRng rng(seed);
  EquivalenceResult result;
  int attempts = 0;
  const int max_attempts = 10 * n;
  while (result.samples_used < n) {
    if (attempts >= max_attempts) {
      throw DomainError("could not draw enough well-defined samples",
                        to_string(e1) + " vs " + to_string(e2));
    }
    ++attempts;
    Env env;
    for (const auto& [name, interval] : box) {
      env[name] = rng.uniform(interval.lo, interval.hi);
    }
    double a, b;
    try {
      a = evaluate(e1, env);
      b = evaluate(e2, env);
    } catch (const DomainError&) {
      continue;  // resample
    }
    ++result.samples_used;
    double gap = std::abs(a - b);
    if (!(gap <= tol * (1.0 + std::abs(a)))) {
      result.equivalent = false;
      result.mismatch = EquivalenceMismatch{std::move(env), gap};
      return result;
    }
  }
  result.equivalent = true;
  return result;
}

}  // namespace sympres
