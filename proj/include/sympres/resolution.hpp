#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sympres/morphism.hpp"
#include "sympres/obstruction.hpp"
#include "sympres/poisson.hpp"

namespace sympres {

struct Piece {
  std::string name;
  PoissonStructure structure;
  SmoothMap map;
};

/// Candidate resolution: a finite disjoint union of (symplectic
/// structure, map) pieces targeting one Poisson structure.
struct ResolutionCandidate {
  PoissonStructure target;
  std::vector<Piece> pieces;

  ResolutionCandidate() = default;
  ResolutionCandidate(PoissonStructure target, std::vector<Piece> pieces);
};

struct SymplecticCheck {
  bool passed = false;
  double min_abs_pfaffian = 0.0;
  std::optional<Env> witness;  // sample with |Pf| <= tol, when failed
  int samples_used = 0;
};

/// Pass iff |Pf| > tol at every seeded sample of the chart box.
SymplecticCheck verify_symplectic(const PoissonStructure& p,
                                  int n_samples = 10000, double tol = 1e-9,
                                  std::uint64_t seed = 42);

struct SolverConfig {
  int starts = 8;            // multi-starts per piece per target point
  int max_iterations = 100;  // damped least-squares iterations per start
  double tolerance = 1e-8;   // |phi(sigma) - target| acceptance, target units
  std::uint64_t seed = 42;
};

struct TargetCoverage {
  std::vector<double> point;
  bool covered = false;
  int piece_index = -1;
  std::vector<double> preimage;
  double distance = 0.0;
};

struct CoverageResult {
  std::vector<int> grid;
  double covered_fraction = 0.0;
  std::int64_t total_points = 0;
  std::int64_t covered_points = 0;
  std::vector<TargetCoverage> points;  // grid order, axis 0 fastest

  std::vector<std::vector<double>> uncovered(std::size_t cap = SIZE_MAX) const;
};

/// Grid-coverage proxy for surjectivity: every target grid point is
/// attacked with multi-start damped least squares (Levenberg-Marquardt
/// style, tolerant of rank-deficient Jacobians) over each piece's box.
/// Coverage of the grid is evidence, never a proof, of surjectivity.
CoverageResult surjectivity_coverage(const ResolutionCandidate& candidate,
                                     const std::vector<int>& grid,
                                     const SolverConfig& solver = {});

enum class ResolutionStatus { Verified, Refuted, Inconclusive };

std::string to_string(ResolutionStatus s);

struct VerifyConfig {
  std::uint64_t seed = 42;
  int samples = 10000;         // morphism + symplecticity samples per piece
  double tol = 1e-9;
  std::vector<int> grid;       // coverage + locus grid; empty: 21 per axis
  SolverConfig solver;
  double critical_tau = 1e-7;
  int jacobi_samples = 256;
  bool check_jacobi = true;
  double refine_tol = 1e-6;
  double grad_tol = 1e-6;
  int regular_value_samples = 500;
};

struct RegularValueCheck {
  bool passed = true;
  int samples_used = 0;
  std::optional<Env> violation;  // source sample with |det J| > tau but singular image
};

struct ResolutionReport {
  ResolutionStatus status = ResolutionStatus::Inconclusive;
  std::string reason;
  bool jacobi_checked = false;
  JacobiCheck target_jacobi;
  std::vector<std::pair<std::string, SymplecticCheck>> symplectic;
  std::vector<std::pair<std::string, MorphismVerdict>> morphism;
  CoverageResult coverage;
  RegularValueCheck regular_value;
  ObstructionVerdict target_obstruction;
  std::vector<std::string> notes;
};

/// Full candidate verification: per-piece symplecticity and morphism
/// checks, coverage, regular-value consistency, and the obstruction
/// verdict on the target. Verified requires every check to pass and
/// coverage 1.0; definite witnesses refute; anything else is
/// inconclusive.
ResolutionReport verify_resolution(const ResolutionCandidate& candidate,
                                   const VerifyConfig& config = {});

}  // namespace sympres
