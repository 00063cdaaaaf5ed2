#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sympres/poisson.hpp"

namespace sympres {

/// Map between charts given by one component expression (in source
/// coordinates) per target coordinate.
struct SmoothMap {
  Chart source;
  Chart target;
  std::vector<Expr> components;

  SmoothMap() = default;
  SmoothMap(Chart source, Chart target, std::vector<Expr> components);
};

/// Substitutes the map components into f (a function on the target).
Expr pullback(const SmoothMap& m, const Expr& f);

Eigen::MatrixXd jacobian_at(const SmoothMap& m, const Env& point);

/// Symbolic determinant of the Jacobian; equal source/target dimension
/// required.
Expr jacobian_det_expr(const SmoothMap& m);

/// Raw bracket defect at one source point:
///   max_{i<j} |{phi*x_i, phi*x_j}_source(sigma) - pi_target^{ij}(phi(sigma))|.
/// Thresholding in verify_morphism normalizes this by
/// 1 + |pi_target^{ij}(phi(sigma))| so exact identities pass at any scale.
double morphism_residual(const PoissonStructure& source_structure,
                         const PoissonStructure& target_structure,
                         const SmoothMap& m, const Env& point);

enum class MorphismStatus { Morphism, NotMorphism };

struct MorphismVerdict {
  MorphismStatus status = MorphismStatus::Morphism;
  double worst_residual = 0.0;  // raw defect, max over samples seen
  std::optional<Env> witness;   // first failing sample
  int samples_used = 0;
};

/// Seeded sampled verification of the Poisson-morphism identity over the
/// source box. Probabilistic: a Morphism verdict certifies the samples
/// only.
MorphismVerdict verify_morphism(const PoissonStructure& source_structure,
                                const PoissonStructure& target_structure,
                                const SmoothMap& m, int n_samples = 10000,
                                double tol = 1e-9, std::uint64_t seed = 42);

struct CriticalPoint {
  std::vector<double> source_point;
  std::vector<double> image;
  double normalized_det = 0.0;  // det of the row-normalized Jacobian
};

/// Grid scan for critical points: |det J| below tau after per-row
/// normalization of J, plus bisection refinement along sign changes of
/// det J between adjacent grid points.
std::vector<CriticalPoint> critical_scan(const SmoothMap& m,
                                         const std::vector<int>& grid,
                                         double tau = 1e-7);

/// Map with components and Jacobian entries slot-compiled against the
/// source coordinates.
class CompiledMap {
 public:
  explicit CompiledMap(const SmoothMap& m);

  int source_dim() const { return source_dim_; }
  int target_dim() const { return static_cast<int>(components_.size()); }

  void apply(std::span<const double> point, Eigen::VectorXd& out) const;
  void jacobian(std::span<const double> point, Eigen::MatrixXd& out) const;

 private:
  int source_dim_ = 0;
  std::vector<CompiledExpr> components_;
  std::vector<CompiledExpr> jacobian_;  // row-major target x source
};

}  // namespace sympres
