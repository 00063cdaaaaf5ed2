#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sympres/compiled_expr.hpp"
#include "sympres/expr.hpp"

namespace sympres {

/// Ordered coordinates with a compact sampling box. Every downstream scan
/// and sampler works over this box; unbounded charts are not representable.
struct Chart {
  std::vector<std::string> coords;
  std::vector<Interval> box;

  Chart() = default;
  Chart(std::vector<std::string> coords, std::vector<Interval> box);

  int dim() const { return static_cast<int>(coords.size()); }
  int index_of(std::string_view name) const;  // -1 when absent
  bool contains(std::span<const double> point) const;

  Env to_env(std::span<const double> point) const;
  std::vector<double> from_env(const Env& env) const;
};

/// Poisson bivector in coordinates: upper-triangular entries pi^{ij}
/// (i<j) as expressions; pi^{ji} = -pi^{ij} and pi^{ii} = 0 are implied.
/// Construction does not check the Jacobi identity; loaders run
/// verify_jacobi unless explicitly disabled.
class PoissonStructure {
 public:
  PoissonStructure() = default;
  PoissonStructure(Chart chart, std::map<std::pair<int, int>, Expr> upper);

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }

  /// Signed entry for any index pair (zero for i == j and missing pairs).
  Expr entry(int i, int j) const;
  const std::map<std::pair<int, int>, Expr>& upper() const { return upper_; }

 private:
  Chart chart_;
  std::map<std::pair<int, int>, Expr> upper_;
};

/// {f,g} = sum_{i,j} pi^{ij} d_i f d_j g, simplified.
Expr bracket(const PoissonStructure& p, const Expr& f, const Expr& g);

/// J^{ijk} = sum_l (pi^{il} d_l pi^{jk} + pi^{jl} d_l pi^{ki}
///                  + pi^{kl} d_l pi^{ij}); requires i < j < k.
Expr jacobiator(const PoissonStructure& p, int i, int j, int k);

struct JacobiFailure {
  int i = 0, j = 0, k = 0;
  Env point;
  double gap = 0.0;
};

struct JacobiCheck {
  bool passed = true;
  std::optional<JacobiFailure> failure;
  int samples_used = 0;
};

/// Sampled check of every Jacobiator component against zero over the
/// chart box. Vacuously passes in dimension 2.
JacobiCheck verify_jacobi(const PoissonStructure& p, int n_samples = 256,
                          double tol = 1e-9, std::uint64_t seed = 42);

Eigen::MatrixXd matrix_at(const PoissonStructure& p, const Env& point);

struct PointRank {
  Env point;
  int rank = 0;
  std::vector<double> singular_values;
};

/// Numeric rank from singular values with a relative cliff; antisymmetric
/// matrices have even rank, so near-pairs are rounded down to even.
PointRank rank_at(const PoissonStructure& p, const Env& point,
                  double rel_threshold = 1e-8);

/// Symbolic Pfaffian; defined for dim 2 (pi^{12}) and dim 4
/// (pi^{12}pi^{34} - pi^{13}pi^{24} + pi^{14}pi^{23}).
Expr pfaffian(const PoissonStructure& p);

/// Signed numeric Pfaffian for dim <= 6 (recursive expansion); magnitude
/// sqrt(det) above. Vanishes exactly where the top power of the bivector
/// does.
double pfaffian_at(const PoissonStructure& p, const Env& point);

/// X_f^i = sum_j pi^{ij} d_j f, simplified.
std::vector<Expr> hamiltonian_vector_field(const PoissonStructure& p,
                                           const Expr& f);

/// Signed Pfaffian of a square matrix: recursive first-row expansion for
/// order <= 6, sqrt(|det|) (magnitude only) above. Odd order gives 0.
double pfaffian_numeric(const Eigen::MatrixXd& a);

/// Structure with all entries slot-compiled against the chart coordinates,
/// for grid-scale evaluation.
class CompiledPoisson {
 public:
  explicit CompiledPoisson(const PoissonStructure& p);

  int dim() const { return dim_; }

  /// Fills `out` (dim x dim) with the bivector matrix at `point`.
  void matrix_at(std::span<const double> point, Eigen::MatrixXd& out) const;

  /// Rank with the same convention as rank_at.
  int rank_at(std::span<const double> point, double rel_threshold = 1e-8) const;

 private:
  int dim_ = 0;
  std::vector<std::tuple<int, int, CompiledExpr>> entries_;
};

}  // namespace sympres
