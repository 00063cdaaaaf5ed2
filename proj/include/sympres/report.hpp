#pragma once

#include <string>

#include <json.hpp>

#include "sympres/obstruction.hpp"
#include "sympres/problem_io.hpp"
#include "sympres/resolution.hpp"

namespace sympres {

inline constexpr const char* kToolVersion = "0.1.0";

/// Deterministic digest of the raw input bytes.
std::string input_digest(std::string_view bytes);

struct CheckOutcome {
  bool jacobi_checked = false;
  JacobiCheck jacobi;
  LocusScan scan;
  LocusClassification classification;
  ObstructionVerdict verdict;
};

/// Structure-only analysis used by `check`: optional Jacobi validation,
/// locus scan + classification, obstruction verdict.
CheckOutcome run_check(const Problem& problem, bool check_jacobi);

nlohmann::json check_report(const CheckOutcome& outcome,
                            const std::string& digest);
nlohmann::json verify_report(const ResolutionReport& report,
                             const std::string& digest);

std::string render_text(const nlohmann::json& report);

/// Exit codes are a total function of the overall status.
int check_exit_code(ObstructionStatus status);
int verify_exit_code(ResolutionStatus status);

}  // namespace sympres
