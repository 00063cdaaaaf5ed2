#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sympres/poisson.hpp"

namespace sympres {

/// Result of a Pfaffian zero-locus grid scan. Zero points are grid
/// vertices where |Pf| <= refine_tol plus bisection-refined points on
/// sign-change edges; flagged cells mark where the locus crosses the
/// grid; plateau cells have every corner near zero.
struct LocusScan {
  std::vector<int> grid;             // vertices per axis
  std::vector<int> cells_per_axis;   // grid[a] - 1
  double refine_tol = 0.0;

  Eigen::MatrixXd zero_points;       // one row per point, dim columns
  std::vector<double> gradient_norms;  // |grad Pf| at each zero point
  std::int64_t near_zero_vertices = 0;
  std::int64_t sign_change_points = 0;

  std::vector<std::uint64_t> flagged_cells_bits;  // bitset over flat cell index
  std::int64_t flagged_cell_count = 0;
  std::vector<std::uint64_t> plateau_cells_bits;
  std::int64_t plateau_cell_count = 0;
  bool has_plateau_block = false;  // some 2^dim block of adjacent plateau cells

  int dim() const { return static_cast<int>(grid.size()); }
  bool cell_flagged(std::uint64_t flat) const {
    return (flagged_cells_bits[flat >> 6] >> (flat & 63)) & 1u;
  }
};

LocusScan scan_singular_locus(const PoissonStructure& p,
                              const std::vector<int>& grid,
                              double refine_tol = 1e-6);

enum class LocusClass { Empty, IsolatedPoints, CodimOneHypersurface, FatRegion };

std::string to_string(LocusClass c);

struct LocusClassification {
  LocusClass locus_class = LocusClass::Empty;
  int component_count = 0;                 // connected flagged-cell components
  std::int64_t largest_component_cells = 0;
  std::vector<double> axis_span;           // extent fraction per axis (largest component)
  int spanning_axes = 0;                   // axes with extent >= 90%
  int transverse_thickness = 0;            // cells along the least-spanning axis
  double gradient_quorum = 0.0;            // fraction of zero points with |grad| > grad_tol
  std::vector<std::vector<double>> example_points;
};

/// Grid heuristics for the shape of the singular locus:
///   FatRegion            some 2^dim block of adjacent cells is entirely
///                        near-zero;
///   CodimOneHypersurface the flagged cells form one connected sheet
///                        spanning >= dim-1 axes, supported by the
///                        gradient quorum or by transverse thinness
///                        (even-order zero sets have vanishing gradient
///                        on the locus);
///   IsolatedPoints       flagged cells exist but form localized clusters;
///   Empty                nothing flagged.
LocusClassification classify_locus(const LocusScan& scan,
                                   const PoissonStructure& p,
                                   double grad_tol = 1e-6);

/// rank_at at every refined locus point. Intended for moderate loci;
/// verdicts use rank_histogram_on_locus instead.
std::vector<PointRank> rank_on_locus(const PoissonStructure& p,
                                     const LocusScan& scan);

/// Streaming rank histogram over the locus points.
std::map<int, std::int64_t> rank_histogram_on_locus(const PoissonStructure& p,
                                                    const LocusScan& scan);

enum class ObstructionStatus {
  NotDenseSymplectic,
  NoProperResolution,
  NoResolutionRankZero,
  Inconclusive,
  SymplecticOnBox,
};

std::string to_string(ObstructionStatus s);

struct ObstructionConfig {
  std::vector<int> grid;    // empty: 41 vertices per axis
  double refine_tol = 1e-6;
  double grad_tol = 1e-6;
};

struct ObstructionVerdict {
  ObstructionStatus status = ObstructionStatus::Inconclusive;
  std::string cited_result;  // statement of the mathematical fact invoked
  LocusClassification classification;
  std::int64_t locus_points = 0;
  std::map<int, std::int64_t> locus_rank_histogram;
};

/// Decision table over the locus classification. All non-existence
/// verdicts are conditional on their hypothesis class (proper, separable,
/// holomorphic-connected); the smooth connected case is left open on
/// purpose and the verdict text says so.
ObstructionVerdict obstruction_verdict(const PoissonStructure& p,
                                       const ObstructionConfig& config = {});

/// Same decision table over an already-computed scan/classification.
ObstructionVerdict obstruction_verdict(const PoissonStructure& p,
                                       const LocusScan& scan,
                                       const LocusClassification& classification);

struct OdeTrace {
  std::vector<double> p;
  std::vector<double> u;
  double max_abs_u = 0.0;
  bool blew_up = false;
  std::optional<double> blowup_p;
  bool domain_error = false;
  std::optional<double> truncated_at;
};

/// Fixed-step RK4 integration of du/dp = f(u, v0) from u(p_begin) = u0,
/// with f an expression in (x, y) read as (u, v0). Blow-up is declared
/// when |u| exceeds 1e9; a domain error of f truncates the trajectory.
OdeTrace characteristic_ode_trace(const Expr& f, double v0, double u0,
                                  double p_begin, double p_end, double step);

}  // namespace sympres
