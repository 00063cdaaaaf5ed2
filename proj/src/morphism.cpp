#include "sympres/morphism.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "sympres/sampling.hpp"

namespace sympres {

SmoothMap::SmoothMap(Chart source_in, Chart target_in,
                     std::vector<Expr> components_in)
    : source(std::move(source_in)),
      target(std::move(target_in)),
      components(std::move(components_in)) {
  if (components.size() != target.coords.size()) {
    throw ValidationError("map needs one component per target coordinate");
  }
  for (const auto& comp : components) {
    for (const auto& v : free_variables(comp)) {
      if (source.index_of(v) < 0) {
        throw ValidationError("map component uses unknown variable '" + v + "'");
      }
    }
  }
}

Expr pullback(const SmoothMap& m, const Expr& f) {
  std::map<std::string, Expr> bindings;
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    bindings.emplace(m.target.coords[i], m.components[i]);
  }
  for (const auto& v : free_variables(f)) {
    if (!bindings.count(v)) {
      throw ValidationError("pullback argument uses unknown variable '" + v + "'");
    }
  }
  return simplify(substitute(f, bindings));
}

Eigen::MatrixXd jacobian_at(const SmoothMap& m, const Env& point) {
  const int rows = static_cast<int>(m.components.size());
  const int cols = m.source.dim();
  Eigen::MatrixXd j(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      j(r, c) = evaluate(
          differentiate(m.components[static_cast<std::size_t>(r)],
                        m.source.coords[static_cast<std::size_t>(c)]),
          point);
    }
  }
  return j;
}

namespace {

Expr det_expr(const std::vector<std::vector<Expr>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  // Laplace expansion along the first row; dimensions here are tiny
  Expr sum = Expr::constant(0);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Expr>> minor;
    minor.reserve(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      row.reserve(n - 1);
      for (std::size_t c = 0; c < n; ++c) {
        if (c != j) row.push_back(a[r][c]);
      }
      minor.push_back(std::move(row));
    }
    Expr term = a[0][j] * det_expr(minor);
    sum = (j % 2 == 0) ? sum + term : sum - term;
  }
  return sum;
}

}  // namespace

Expr jacobian_det_expr(const SmoothMap& m) {
  const int d = m.source.dim();
  if (d != m.target.dim()) {
    throw ValidationError("jacobian determinant needs equal source and target dimension");
  }
  std::vector<std::vector<Expr>> j(static_cast<std::size_t>(d));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      j[static_cast<std::size_t>(r)].push_back(
          differentiate(m.components[static_cast<std::size_t>(r)],
                        m.source.coords[static_cast<std::size_t>(c)]));
    }
  }
  return simplify(det_expr(j));
}

namespace {

struct ResidualTerms {
  // per target pair (i,j), i<j: source-bracket of the pulled-back
  // coordinates, and the pulled-back target entry
  std::vector<CompiledExpr> lhs;
  std::vector<CompiledExpr> rhs;
};

ResidualTerms build_residual_terms(const PoissonStructure& source_structure,
                                   const PoissonStructure& target_structure,
                                   const SmoothMap& m) {
  if (m.source.coords != source_structure.chart().coords) {
    throw ValidationError("map source chart does not match the source structure");
  }
  if (m.target.coords != target_structure.chart().coords) {
    throw ValidationError("map target chart does not match the target structure");
  }
  ResidualTerms terms;
  const int d = target_structure.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Expr lhs = bracket(source_structure,
                         m.components[static_cast<std::size_t>(i)],
                         m.components[static_cast<std::size_t>(j)]);
      Expr rhs = pullback(m, target_structure.entry(i, j));
      terms.lhs.emplace_back(lhs, m.source.coords);
      terms.rhs.emplace_back(rhs, m.source.coords);
    }
  }
  return terms;
}

}  // namespace

double morphism_residual(const PoissonStructure& source_structure,
                         const PoissonStructure& target_structure,
                         const SmoothMap& m, const Env& point) {
  ResidualTerms terms =
      build_residual_terms(source_structure, target_structure, m);
  std::vector<double> p = m.source.from_env(point);
  double worst = 0.0;
  for (std::size_t k = 0; k < terms.lhs.size(); ++k) {
    worst = std::max(worst, std::abs(terms.lhs[k](p) - terms.rhs[k](p)));
  }
  return worst;
}

MorphismVerdict verify_morphism(const PoissonStructure& source_structure,
                                const PoissonStructure& target_structure,
                                const SmoothMap& m, int n_samples, double tol,
                                std::uint64_t seed) {
  ResidualTerms terms =
      build_residual_terms(source_structure, target_structure, m);
  MorphismVerdict verdict;
  SampleRng rng(seed);
  const auto& box = m.source.box;
  std::vector<double> point(box.size());
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t a = 0; a < box.size(); ++a) {
      point[a] = rng.uniform(box[a].lo, box[a].hi);
    }
    ++verdict.samples_used;
    for (std::size_t k = 0; k < terms.lhs.size(); ++k) {
      double target_value = terms.rhs[k](point);
      double defect = std::abs(terms.lhs[k](point) - target_value);
      verdict.worst_residual = std::max(verdict.worst_residual, defect);
      if (!(defect <= tol * (1.0 + std::abs(target_value)))) {
        verdict.status = MorphismStatus::NotMorphism;
        verdict.witness = m.source.to_env(point);
        return verdict;
      }
    }
  }
  return verdict;
}

std::vector<CriticalPoint> critical_scan(const SmoothMap& m,
                                         const std::vector<int>& grid,
                                         double tau) {
  const int d = m.source.dim();
  if (d != m.target.dim()) {
    throw ValidationError("critical scan needs equal source and target dimension");
  }
  if (static_cast<int>(grid.size()) != d) {
    throw ValidationError("critical scan grid needs one point count per source axis");
  }
  for (int n : grid) {
    if (n < 2) throw ValidationError("critical scan needs >= 2 grid points per axis");
  }
  CompiledMap cm(m);

  Eigen::MatrixXd j(d, d);
  auto normalized_det = [&](std::span<const double> point) {
    cm.jacobian(point, j);
    Eigen::MatrixXd scaled = j;
    for (int r = 0; r < d; ++r) {
      double norm = scaled.row(r).norm();
      if (norm < 1e-300) return 0.0;
      scaled.row(r) /= norm;
    }
    return scaled.determinant();
  };

  std::vector<double> steps(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    steps[static_cast<std::size_t>(a)] =
        m.source.box[static_cast<std::size_t>(a)].length() / (grid[static_cast<std::size_t>(a)] - 1);
  }
  auto point_at = [&](const std::vector<int>& idx) {
    std::vector<double> p(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      p[static_cast<std::size_t>(a)] = m.source.box[static_cast<std::size_t>(a)].lo +
                                       idx[static_cast<std::size_t>(a)] * steps[static_cast<std::size_t>(a)];
    }
    return p;
  };

  std::vector<CriticalPoint> found;
  Eigen::VectorXd image(d);
  auto record = [&](std::vector<double> point, double det) {
    cm.apply(point, image);
    CriticalPoint cp;
    cp.source_point = std::move(point);
    cp.image.assign(image.data(), image.data() + d);
    cp.normalized_det = det;
    found.push_back(std::move(cp));
  };

  // full odometer walk over the grid
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> values;
  std::size_t total = 1;
  for (int n : grid) total *= static_cast<std::size_t>(n);
  values.reserve(total);
  std::vector<std::vector<int>> indices;
  indices.reserve(total);
  while (true) {
    std::vector<double> p = point_at(idx);
    double det = normalized_det(p);
    values.push_back(det);
    indices.push_back(idx);
    if (std::abs(det) < tau) record(std::move(p), det);
    int a = 0;
    while (a < d && ++idx[static_cast<std::size_t>(a)] == grid[static_cast<std::size_t>(a)]) {
      idx[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == d) break;
  }

  // strides of the row-major-in-reverse odometer above: axis 0 varies fastest
  std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
  for (int a = 1; a < d; ++a) {
    strides[static_cast<std::size_t>(a)] =
        strides[static_cast<std::size_t>(a - 1)] * static_cast<std::size_t>(grid[static_cast<std::size_t>(a - 1)]);
  }
  for (std::size_t v = 0; v < indices.size(); ++v) {
    for (int a = 0; a < d; ++a) {
      if (indices[v][static_cast<std::size_t>(a)] + 1 >= grid[static_cast<std::size_t>(a)]) continue;
      std::size_t w = v + strides[static_cast<std::size_t>(a)];
      double f0 = values[v], f1 = values[w];
      if (std::abs(f0) < tau || std::abs(f1) < tau) continue;
      if ((f0 < 0) == (f1 < 0)) continue;
      // bisect the sign change along this edge
      std::vector<double> lo = point_at(indices[v]);
      std::vector<double> hi = lo;
      hi[static_cast<std::size_t>(a)] += steps[static_cast<std::size_t>(a)];
      std::vector<double> mid(lo.size());
      double fm = f0;
      for (int it = 0; it < 60; ++it) {
        for (std::size_t c = 0; c < lo.size(); ++c) mid[c] = 0.5 * (lo[c] + hi[c]);
        fm = normalized_det(mid);
        if (std::abs(fm) < tau) break;
        if ((fm < 0) == (f0 < 0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      record(std::move(mid), fm);
    }
  }
  return found;
}

CompiledMap::CompiledMap(const SmoothMap& m) : source_dim_(m.source.dim()) {
  for (const auto& comp : m.components) {
    components_.emplace_back(comp, m.source.coords);
  }
  for (const auto& comp : m.components) {
    for (const auto& coord : m.source.coords) {
      jacobian_.emplace_back(differentiate(comp, coord), m.source.coords);
    }
  }
}

void CompiledMap::apply(std::span<const double> point,
                        Eigen::VectorXd& out) const {
  out.resize(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = components_[i](point);
  }
}

void CompiledMap::jacobian(std::span<const double> point,
                           Eigen::MatrixXd& out) const {
  const int rows = target_dim();
  out.resize(rows, source_dim_);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < source_dim_; ++c) {
      out(r, c) = jacobian_[k++](point);
    }
  }
}

}  // namespace sympres
