#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sympres/resolution.hpp"

namespace sympres {

/// Options block of a problem file; every key is optional.
struct ProblemOptions {
  std::uint64_t seed = 42;
  int samples = 10000;
  double tol = 1e-9;
  std::vector<int> grid;  // empty: per-command default
  double ode_step = 1e-3;
};

struct Problem {
  PoissonStructure target;
  std::vector<Piece> pieces;
  ProblemOptions options;
};

/// Parses and validates a problem document:
///   { "target": {"coords": [...], "box": [[lo,hi]...],
///                "brackets": {"xi,xj": "expr", ...}},
///     "pieces": [{"name", "coords", "box", "brackets",
///                 "map": {"target-coord": "expr", ...}}, ...],
///     "options": {"seed", "samples", "tol", "grid", "ode_step"} }
/// Bracket keys use i<j coordinate order; omitted pairs are 0. Unknown
/// keys and malformed expressions are ValidationErrors (expression errors
/// keep their byte offset).
Problem parse_problem(const nlohmann::json& doc);

/// Reads `path`, returning the problem and the raw bytes (for digests).
Problem load_problem_file(const std::string& path, std::string* raw_bytes = nullptr);

ResolutionCandidate candidate_of(const Problem& problem);

VerifyConfig verify_config_of(const ProblemOptions& options);
ObstructionConfig obstruction_config_of(const ProblemOptions& options, int dim);

}  // namespace sympres
