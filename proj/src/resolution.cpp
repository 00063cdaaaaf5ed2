#include "sympres/resolution.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sympres/sampling.hpp"

namespace sympres {

ResolutionCandidate::ResolutionCandidate(PoissonStructure target_in,
                                         std::vector<Piece> pieces_in)
    : target(std::move(target_in)), pieces(std::move(pieces_in)) {
  if (pieces.empty()) {
    throw ValidationError("candidate needs at least one piece");
  }
  for (const auto& piece : pieces) {
    if (piece.structure.dim() != target.dim()) {
      throw ValidationError("piece '" + piece.name +
                            "' dimension differs from the target dimension");
    }
    if (piece.map.source.coords != piece.structure.chart().coords) {
      throw ValidationError("piece '" + piece.name +
                            "' map source does not match its structure chart");
    }
    if (piece.map.target.coords != target.chart().coords) {
      throw ValidationError("piece '" + piece.name +
                            "' map target does not match the target chart");
    }
  }
}

SymplecticCheck verify_symplectic(const PoissonStructure& p, int n_samples,
                                  double tol, std::uint64_t seed) {
  if (p.dim() % 2 != 0) {
    throw ValidationError("symplecticity check needs an even-dimensional chart");
  }
  CompiledPoisson cp(p);
  Eigen::MatrixXd m;
  SampleRng rng(seed);
  const auto& box = p.chart().box;
  std::vector<double> point(box.size());

  SymplecticCheck check;
  check.min_abs_pfaffian = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t a = 0; a < box.size(); ++a) {
      point[a] = rng.uniform(box[a].lo, box[a].hi);
    }
    ++check.samples_used;
    cp.matrix_at(point, m);
    double pf = std::abs(pfaffian_numeric(m));
    check.min_abs_pfaffian = std::min(check.min_abs_pfaffian, pf);
    if (!(pf > tol)) {
      check.passed = false;
      check.witness = p.chart().to_env(point);
      return check;
    }
  }
  check.passed = true;
  return check;
}

std::vector<std::vector<double>> CoverageResult::uncovered(std::size_t cap) const {
  std::vector<std::vector<double>> out;
  for (const auto& pc : points) {
    if (!pc.covered) {
      out.push_back(pc.point);
      if (out.size() >= cap) break;
    }
  }
  return out;
}

namespace {

struct LmOutcome {
  Eigen::VectorXd x;
  double distance = std::numeric_limits<double>::infinity();
};

// Damped least squares for |phi(x) - target|^2 with iterates clamped to
// the box; the damping keeps steps usable when the Jacobian drops rank.
LmOutcome levenberg_marquardt(const CompiledMap& map,
                              const std::vector<Interval>& box,
                              const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& target,
                              int max_iterations, double tolerance) {
  const int n = map.source_dim();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd phi(map.target_dim()), phi_trial(map.target_dim());
  Eigen::MatrixXd jac(map.target_dim(), n);

  auto clamp = [&](Eigen::VectorXd& v) {
    for (int a = 0; a < n; ++a) {
      v(a) = std::clamp(v(a), box[static_cast<std::size_t>(a)].lo,
                        box[static_cast<std::size_t>(a)].hi);
    }
  };
  clamp(x);

  std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
  map.apply(xs, phi);
  double err = (phi - target).norm();
  double lambda = 1e-3;

  LmOutcome out;
  out.x = x;
  out.distance = err;

  for (int it = 0; it < max_iterations; ++it) {
    if (err < tolerance) break;
    map.jacobian(xs, jac);
    Eigen::VectorXd r = phi - target;
    Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;

    bool stepped = false;
    for (int tries = 0; tries < 16; ++tries) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal().array() += lambda;
      Eigen::VectorXd delta = damped.ldlt().solve(-g);
      Eigen::VectorXd trial = x + delta;
      clamp(trial);
      std::span<const double> ts(trial.data(), static_cast<std::size_t>(n));
      map.apply(ts, phi_trial);
      double trial_err = (phi_trial - target).norm();
      if (trial_err < err) {
        x = trial;
        phi = phi_trial;
        err = trial_err;
        lambda = std::max(lambda * 0.25, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
    if (!stepped) break;
    if (err < out.distance) {
      out.x = x;
      out.distance = err;
    }
  }
  if (err < out.distance) {
    out.x = x;
    out.distance = err;
  }
  return out;
}

}  // namespace

CoverageResult surjectivity_coverage(const ResolutionCandidate& candidate,
                                     const std::vector<int>& grid,
                                     const SolverConfig& solver) {
  const int d = candidate.target.dim();
  if (static_cast<int>(grid.size()) != d) {
    throw ValidationError("coverage grid needs one point count per target axis");
  }
  std::uint64_t total = 1;
  for (int g : grid) {
    if (g < 1) throw ValidationError("coverage grid needs >= 1 point per axis");
    total *= static_cast<std::uint64_t>(g);
  }

  std::vector<CompiledMap> maps;
  maps.reserve(candidate.pieces.size());
  for (const auto& piece : candidate.pieces) maps.emplace_back(piece.map);

  CoverageResult result;
  result.grid = grid;
  result.total_points = static_cast<std::int64_t>(total);
  result.points.reserve(total);

  const auto& tbox = candidate.target.chart().box;
  auto target_coord = [&](int axis, int idx) {
    if (grid[static_cast<std::size_t>(axis)] == 1) {
      return 0.5 * (tbox[static_cast<std::size_t>(axis)].lo +
                    tbox[static_cast<std::size_t>(axis)].hi);
    }
    return tbox[static_cast<std::size_t>(axis)].lo +
           tbox[static_cast<std::size_t>(axis)].length() * idx /
               (grid[static_cast<std::size_t>(axis)] - 1);
  };

  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd target(d);
  for (std::uint64_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < d; ++a) {
      target(a) = target_coord(a, idx[static_cast<std::size_t>(a)]);
    }
    TargetCoverage pc;
    pc.point.assign(target.data(), target.data() + d);
    pc.distance = std::numeric_limits<double>::infinity();

    for (std::size_t piece = 0; piece < maps.size() && !pc.covered; ++piece) {
      const auto& box = candidate.pieces[piece].structure.chart().box;
      const int sdim = maps[piece].source_dim();
      for (int start = 0; start < solver.starts && !pc.covered; ++start) {
        SampleRng rng(derive_seed(solver.seed, "coverage",
                                  (flat * maps.size() + piece) * 64 +
                                      static_cast<std::uint64_t>(start)));
        Eigen::VectorXd x0(sdim);
        for (int a = 0; a < sdim; ++a) {
          x0(a) = rng.uniform(box[static_cast<std::size_t>(a)].lo,
                              box[static_cast<std::size_t>(a)].hi);
        }
        LmOutcome outcome =
            levenberg_marquardt(maps[piece], box, x0, target,
                                solver.max_iterations, solver.tolerance);
        if (outcome.distance < pc.distance) {
          pc.distance = outcome.distance;
          pc.piece_index = static_cast<int>(piece);
          pc.preimage.assign(outcome.x.data(), outcome.x.data() + sdim);
        }
        if (outcome.distance < solver.tolerance) pc.covered = true;
      }
    }
    if (pc.covered) ++result.covered_points;
    result.points.push_back(std::move(pc));

    int a = 0;
    while (a < d && ++idx[static_cast<std::size_t>(a)] == grid[static_cast<std::size_t>(a)]) {
      idx[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
  }
  result.covered_fraction =
      total == 0 ? 0.0
                 : static_cast<double>(result.covered_points) /
                       static_cast<double>(result.total_points);
  return result;
}

std::string to_string(ResolutionStatus s) {
  switch (s) {
    case ResolutionStatus::Verified: return "verified";
    case ResolutionStatus::Refuted: return "refuted";
    case ResolutionStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

RegularValueCheck check_regular_values(const ResolutionCandidate& candidate,
                                       const VerifyConfig& config) {
  RegularValueCheck check;
  CompiledPoisson target(candidate.target);
  Eigen::MatrixXd jac;
  Eigen::VectorXd image;
  for (std::size_t piece = 0; piece < candidate.pieces.size(); ++piece) {
    const auto& map = candidate.pieces[piece].map;
    if (map.source.dim() != map.target.dim()) continue;
    CompiledMap cm(map);
    const auto& box = map.source.box;
    SampleRng rng(derive_seed(config.seed, "regular-value", piece));
    std::vector<double> point(box.size());
    for (int s = 0; s < config.regular_value_samples; ++s) {
      for (std::size_t a = 0; a < box.size(); ++a) {
        point[a] = rng.uniform(box[a].lo, box[a].hi);
      }
      ++check.samples_used;
      cm.jacobian(point, jac);
      Eigen::MatrixXd scaled = jac;
      bool degenerate_row = false;
      for (int r = 0; r < scaled.rows(); ++r) {
        double norm = scaled.row(r).norm();
        if (norm < 1e-300) {
          degenerate_row = true;
          break;
        }
        scaled.row(r) /= norm;
      }
      if (degenerate_row) continue;
      if (std::abs(scaled.determinant()) <= config.critical_tau) continue;
      cm.apply(point, image);
      std::span<const double> img(image.data(),
                                  static_cast<std::size_t>(image.size()));
      if (target.rank_at(img) < candidate.target.dim()) {
        check.passed = false;
        check.violation = map.source.to_env(point);
        return check;
      }
    }
  }
  return check;
}

}  // namespace

ResolutionReport verify_resolution(const ResolutionCandidate& candidate,
                                   const VerifyConfig& config) {
  ResolutionReport report;

  std::vector<int> grid = config.grid;
  if (grid.empty()) {
    grid.assign(static_cast<std::size_t>(candidate.target.dim()), 21);
  } else if (grid.size() == 1 && candidate.target.dim() > 1) {
    grid.assign(static_cast<std::size_t>(candidate.target.dim()), grid[0]);
  }

  report.jacobi_checked = config.check_jacobi;
  if (config.check_jacobi) {
    report.target_jacobi =
        verify_jacobi(candidate.target, config.jacobi_samples, config.tol,
                      derive_seed(config.seed, "jacobi"));
    for (std::size_t i = 0; i < candidate.pieces.size(); ++i) {
      JacobiCheck piece_jacobi = verify_jacobi(
          candidate.pieces[i].structure, config.jacobi_samples, config.tol,
          derive_seed(config.seed, "jacobi-piece", i));
      if (!piece_jacobi.passed) {
        throw ValidationError("piece '" + candidate.pieces[i].name +
                              "' fails the Jacobi identity");
      }
    }
    if (!report.target_jacobi.passed) {
      throw ValidationError("target structure fails the Jacobi identity");
    }
  }

  for (std::size_t i = 0; i < candidate.pieces.size(); ++i) {
    const auto& piece = candidate.pieces[i];
    report.symplectic.emplace_back(
        piece.name,
        verify_symplectic(piece.structure, config.samples, config.tol,
                          derive_seed(config.seed, "symplectic", i)));
    report.morphism.emplace_back(
        piece.name,
        verify_morphism(piece.structure, candidate.target, piece.map,
                        config.samples, config.tol,
                        derive_seed(config.seed, "morphism", i)));
  }

  report.coverage = surjectivity_coverage(
      candidate, grid,
      SolverConfig{config.solver.starts, config.solver.max_iterations,
                   config.solver.tolerance,
                   derive_seed(config.seed, "coverage-root")});

  report.regular_value = check_regular_values(candidate, config);

  ObstructionConfig ocfg;
  ocfg.grid = grid;
  ocfg.refine_tol = config.refine_tol;
  ocfg.grad_tol = config.grad_tol;
  report.target_obstruction = obstruction_verdict(candidate.target, ocfg);

  bool symplectic_ok = true, morphism_ok = true;
  for (const auto& [name, check] : report.symplectic) {
    symplectic_ok = symplectic_ok && check.passed;
  }
  for (const auto& [name, verdict] : report.morphism) {
    morphism_ok = morphism_ok && verdict.status == MorphismStatus::Morphism;
  }

  if (!symplectic_ok) {
    report.status = ResolutionStatus::Refuted;
    report.reason = "a piece is not symplectic on its box";
  } else if (!morphism_ok) {
    report.status = ResolutionStatus::Refuted;
    report.reason = "a piece map is not a Poisson morphism";
  } else if (report.coverage.covered_fraction < 1.0) {
    report.status = ResolutionStatus::Inconclusive;
    report.reason = "target grid coverage below 1.0";
  } else if (!report.regular_value.passed) {
    report.status = ResolutionStatus::Inconclusive;
    report.reason = "regular-value consistency violated at a sample";
  } else {
    report.status = ResolutionStatus::Verified;
    report.reason = "all pieces symplectic and Poisson; target grid fully covered";
  }

  if (report.status == ResolutionStatus::Verified) {
    switch (report.target_obstruction.status) {
      case ObstructionStatus::NoProperResolution:
        report.notes.push_back(
            "target obstruction: the codimension-one singular locus rules "
            "out any proper symplectic resolution, so this verified "
            "candidate is necessarily non-proper or non-connected; the "
            "verdict concerns the proper/holomorphic-connected classes only");
        break;
      case ObstructionStatus::NoResolutionRankZero:
        report.notes.push_back(
            "target obstruction: the bivector vanishes on a codimension-one "
            "singular locus (dimension >= 4), which rules out separable "
            "resolutions; a verified candidate here deserves scrutiny");
        break;
      case ObstructionStatus::NotDenseSymplectic:
        report.notes.push_back(
            "target obstruction: the target is not symplectic on a dense "
            "subset of the box, which rules out separable resolutions; a "
            "verified candidate here deserves scrutiny");
        break;
      default:
        break;
    }
  }
  if (report.status == ResolutionStatus::Verified) {
    report.notes.push_back(
        "coverage certifies the sampled grid only; surjectivity itself is "
        "not numerically decidable");
  }
  return report;
}

}  // namespace sympres
