#include "sympres/poisson.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>

#include "sympres/sampling.hpp"

namespace sympres {

Chart::Chart(std::vector<std::string> coords_in, std::vector<Interval> box_in)
    : coords(std::move(coords_in)), box(std::move(box_in)) {
  if (coords.empty()) throw ValidationError("chart needs at least one coordinate");
  if (coords.size() != box.size()) {
    throw ValidationError("chart box must give one interval per coordinate");
  }
  std::set<std::string> seen;
  for (const auto& name : coords) {
    Expr::variable(name);  // name validity
    if (!seen.insert(name).second) {
      throw ValidationError("duplicate coordinate '" + name + "'");
    }
  }
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!(box[i].length() > 0.0) || !std::isfinite(box[i].lo) ||
        !std::isfinite(box[i].hi)) {
      throw ValidationError("box interval for '" + coords[i] +
                            "' must have positive finite length");
    }
  }
}

int Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool Chart::contains(std::span<const double> point) const {
  if (point.size() != coords.size()) return false;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!box[i].contains(point[i])) return false;
  }
  return true;
}

Env Chart::to_env(std::span<const double> point) const {
  Env env;
  for (std::size_t i = 0; i < coords.size(); ++i) env[coords[i]] = point[i];
  return env;
}

std::vector<double> Chart::from_env(const Env& env) const {
  std::vector<double> point(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    auto it = env.find(coords[i]);
    if (it == env.end()) {
      throw ValidationError("point does not bind coordinate '" + coords[i] + "'");
    }
    point[i] = it->second;
  }
  return point;
}

PoissonStructure::PoissonStructure(Chart chart,
                                   std::map<std::pair<int, int>, Expr> upper)
    : chart_(std::move(chart)), upper_(std::move(upper)) {
  for (const auto& [ij, expr] : upper_) {
    auto [i, j] = ij;
    if (i < 0 || j <= i || j >= dim()) {
      throw ValidationError("bracket entry indices must satisfy 0 <= i < j < dim");
    }
    for (const auto& v : free_variables(expr)) {
      if (chart_.index_of(v) < 0) {
        throw ValidationError("bracket entry uses unknown variable '" + v + "'");
      }
    }
  }
}

Expr PoissonStructure::entry(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim() || j >= dim()) {
    throw ValidationError("bracket entry index out of range");
  }
  if (i == j) return Expr::constant(0);
  if (i < j) {
    auto it = upper_.find({i, j});
    return it == upper_.end() ? Expr::constant(0) : it->second;
  }
  auto it = upper_.find({j, i});
  return it == upper_.end() ? Expr::constant(0) : simplify(-it->second);
}

namespace {

void require_chart_vars(const Chart& chart, const Expr& e, const char* what) {
  for (const auto& v : free_variables(e)) {
    if (chart.index_of(v) < 0) {
      throw ValidationError(std::string(what) + " uses unknown variable '" + v + "'");
    }
  }
}

}  // namespace

Expr bracket(const PoissonStructure& p, const Expr& f, const Expr& g) {
  require_chart_vars(p.chart(), f, "bracket argument");
  require_chart_vars(p.chart(), g, "bracket argument");
  Expr sum = Expr::constant(0);
  for (const auto& [ij, pi] : p.upper()) {
    auto [i, j] = ij;
    const auto& xi = p.chart().coords[static_cast<std::size_t>(i)];
    const auto& xj = p.chart().coords[static_cast<std::size_t>(j)];
    Expr term = differentiate(f, xi) * differentiate(g, xj) -
                differentiate(f, xj) * differentiate(g, xi);
    sum = sum + pi * term;
  }
  return simplify(sum);
}

Expr jacobiator(const PoissonStructure& p, int i, int j, int k) {
  if (!(0 <= i && i < j && j < k && k < p.dim())) {
    throw ValidationError("jacobiator needs indices 0 <= i < j < k < dim");
  }
  Expr sum = Expr::constant(0);
  for (int l = 0; l < p.dim(); ++l) {
    const auto& xl = p.chart().coords[static_cast<std::size_t>(l)];
    sum = sum + p.entry(i, l) * differentiate(p.entry(j, k), xl) +
          p.entry(j, l) * differentiate(p.entry(k, i), xl) +
          p.entry(k, l) * differentiate(p.entry(i, j), xl);
  }
  return simplify(sum);
}

JacobiCheck verify_jacobi(const PoissonStructure& p, int n_samples, double tol,
                          std::uint64_t seed) {
  JacobiCheck check;
  const int d = p.dim();
  if (d < 3) return check;  // no triples

  std::vector<std::tuple<int, int, int, CompiledExpr>> components;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        Expr jac = jacobiator(p, i, j, k);
        if (jac == Expr::constant(0)) continue;
        components.emplace_back(i, j, k, CompiledExpr(jac, p.chart().coords));
      }
    }
  }
  if (components.empty()) return check;

  SampleRng rng(seed);
  std::vector<double> point(static_cast<std::size_t>(d));
  for (int s = 0; s < n_samples; ++s) {
    for (int a = 0; a < d; ++a) {
      point[static_cast<std::size_t>(a)] =
          rng.uniform(p.chart().box[static_cast<std::size_t>(a)].lo,
                      p.chart().box[static_cast<std::size_t>(a)].hi);
    }
    ++check.samples_used;
    for (const auto& [i, j, k, comp] : components) {
      double v = comp(point);
      if (!(std::abs(v) <= tol * (1.0 + std::abs(v)))) {
        check.passed = false;
        check.failure =
            JacobiFailure{i, j, k, p.chart().to_env(point), std::abs(v)};
        return check;
      }
    }
  }
  return check;
}

Eigen::MatrixXd matrix_at(const PoissonStructure& p, const Env& point) {
  const int d = p.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [ij, pi] : p.upper()) {
    auto [i, j] = ij;
    double v = evaluate(pi, point);
    m(i, j) = v;
    m(j, i) = -v;
  }
  return m;
}

namespace {

int even_rank_from_singular_values(const Eigen::VectorXd& sv,
                                   double rel_threshold) {
  double top = sv.size() > 0 ? sv(0) : 0.0;
  if (top <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= rel_threshold * top) ++rank;
  }
  return rank - (rank % 2);
}

}  // namespace

PointRank rank_at(const PoissonStructure& p, const Env& point,
                  double rel_threshold) {
  Eigen::MatrixXd m = matrix_at(p, point);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  PointRank out;
  out.point = point;
  out.rank = even_rank_from_singular_values(sv, rel_threshold);
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  return out;
}

Expr pfaffian(const PoissonStructure& p) {
  if (p.dim() == 2) return simplify(p.entry(0, 1));
  if (p.dim() == 4) {
    return simplify(p.entry(0, 1) * p.entry(2, 3) -
                    p.entry(0, 2) * p.entry(1, 3) +
                    p.entry(0, 3) * p.entry(1, 2));
  }
  throw ValidationError("symbolic pfaffian is defined for dimension 2 and 4");
}

namespace {

double pfaffian_recursive(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 1.0;
  if (n == 2) return a(0, 1);
  double sum = 0.0;
  double sign = 1.0;  // (-1)^j for j = 2..n with 1-based indexing
  for (Eigen::Index j = 1; j < n; ++j) {
    if (a(0, j) != 0.0) {
      Eigen::MatrixXd sub(n - 2, n - 2);
      Eigen::Index r = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (i == j) continue;
        Eigen::Index c = 0;
        for (Eigen::Index k = 1; k < n; ++k) {
          if (k == j) continue;
          sub(r, c++) = a(i, k);
        }
        ++r;
      }
      sum += sign * a(0, j) * pfaffian_recursive(sub);
    }
    sign = -sign;
  }
  return sum;
}

}  // namespace

double pfaffian_numeric(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw ValidationError("pfaffian needs a square matrix");
  if (n % 2 != 0) return 0.0;
  if (n <= 6) return pfaffian_recursive(a);
  double det = a.determinant();
  return std::sqrt(std::max(det, 0.0));
}

double pfaffian_at(const PoissonStructure& p, const Env& point) {
  if (p.dim() % 2 != 0) {
    throw ValidationError("pfaffian needs an even-dimensional chart");
  }
  return pfaffian_numeric(matrix_at(p, point));
}

std::vector<Expr> hamiltonian_vector_field(const PoissonStructure& p,
                                           const Expr& f) {
  require_chart_vars(p.chart(), f, "hamiltonian");
  std::vector<Expr> field;
  field.reserve(static_cast<std::size_t>(p.dim()));
  for (int i = 0; i < p.dim(); ++i) {
    Expr comp = Expr::constant(0);
    for (int j = 0; j < p.dim(); ++j) {
      if (i == j) continue;
      comp = comp + p.entry(i, j) *
                        differentiate(f, p.chart().coords[static_cast<std::size_t>(j)]);
    }
    field.push_back(simplify(comp));
  }
  return field;
}

CompiledPoisson::CompiledPoisson(const PoissonStructure& p) : dim_(p.dim()) {
  for (const auto& [ij, pi] : p.upper()) {
    entries_.emplace_back(ij.first, ij.second,
                          CompiledExpr(pi, p.chart().coords));
  }
}

void CompiledPoisson::matrix_at(std::span<const double> point,
                                Eigen::MatrixXd& out) const {
  out.setZero(dim_, dim_);
  for (const auto& [i, j, expr] : entries_) {
    double v = expr(point);
    out(i, j) = v;
    out(j, i) = -v;
  }
}

int CompiledPoisson::rank_at(std::span<const double> point,
                             double rel_threshold) const {
  Eigen::MatrixXd m;
  matrix_at(point, m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return even_rank_from_singular_values(svd.singularValues(), rel_threshold);
}

}  // namespace sympres
