#include "sympres/report.hpp"

#include <sstream>

#include "sympres/sampling.hpp"

namespace sympres {

namespace {

using nlohmann::json;

json env_json(const Env& env) {
  json out = json::object();
  for (const auto& [name, value] : env) out[name] = value;
  return out;
}

json check_entry(const std::string& name, const std::string& verdict,
                 json residual = nullptr, json witness = nullptr,
                 json citation = nullptr) {
  json entry = json::object();
  entry["name"] = name;
  entry["verdict"] = verdict;
  entry["residual"] = std::move(residual);
  entry["witness"] = std::move(witness);
  entry["citation"] = std::move(citation);
  return entry;
}

json jacobi_entry(const JacobiCheck& jacobi) {
  json witness = nullptr;
  json residual = nullptr;
  if (jacobi.failure) {
    witness = json::object();
    witness["point"] = env_json(jacobi.failure->point);
    witness["indices"] = {jacobi.failure->i, jacobi.failure->j, jacobi.failure->k};
    residual = jacobi.failure->gap;
  }
  return check_entry("jacobi", jacobi.passed ? "pass" : "fail", residual,
                     witness,
                     "the Jacobi identity, sampled over the declared box");
}

json classification_json(const LocusClassification& cls,
                         const std::map<int, std::int64_t>& rank_histogram,
                         std::int64_t locus_points, const LocusScan* scan) {
  json locus = json::object();
  locus["class"] = to_string(cls.locus_class);
  locus["zero_points"] = locus_points;
  locus["component_count"] = cls.component_count;
  locus["largest_component_cells"] = cls.largest_component_cells;
  locus["axis_span"] = cls.axis_span;
  locus["spanning_axes"] = cls.spanning_axes;
  locus["transverse_thickness"] = cls.transverse_thickness;
  locus["gradient_quorum"] = cls.gradient_quorum;
  locus["examples"] = cls.example_points;
  json hist = json::object();
  for (const auto& [rank, count] : rank_histogram) {
    hist[std::to_string(rank)] = count;
  }
  locus["rank_histogram"] = std::move(hist);
  if (scan) {
    locus["near_zero_vertices"] = scan->near_zero_vertices;
    locus["sign_change_points"] = scan->sign_change_points;
    locus["flagged_cells"] = scan->flagged_cell_count;
    locus["plateau_cells"] = scan->plateau_cell_count;
    locus["grid"] = scan->grid;
  }
  return locus;
}

json coverage_json(const CoverageResult& coverage) {
  json out = json::object();
  out["grid"] = coverage.grid;
  out["covered_fraction"] = coverage.covered_fraction;
  out["total_points"] = coverage.total_points;
  out["covered_points"] = coverage.covered_points;
  auto uncovered = coverage.uncovered(32);
  out["uncovered"] = uncovered;
  out["uncovered_count"] = coverage.total_points - coverage.covered_points;
  json witnesses = json::array();
  std::size_t cap = 16;
  for (const auto& pc : coverage.points) {
    if (!pc.covered) continue;
    json w = json::object();
    w["point"] = pc.point;
    w["piece"] = pc.piece_index;
    w["preimage"] = pc.preimage;
    w["distance"] = pc.distance;
    witnesses.push_back(std::move(w));
    if (witnesses.size() >= cap) break;
  }
  out["witnesses"] = std::move(witnesses);
  return out;
}

}  // namespace

std::string input_digest(std::string_view bytes) {
  std::uint64_t h = fnv1a64(bytes);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

CheckOutcome run_check(const Problem& problem, bool check_jacobi) {
  CheckOutcome outcome;
  outcome.jacobi_checked = check_jacobi;
  if (check_jacobi) {
    outcome.jacobi = verify_jacobi(problem.target, 256, problem.options.tol,
                                   derive_seed(problem.options.seed, "jacobi"));
  }
  ObstructionConfig config =
      obstruction_config_of(problem.options, problem.target.dim());
  std::vector<int> grid = config.grid;
  if (grid.empty()) grid.assign(static_cast<std::size_t>(problem.target.dim()), 41);
  outcome.scan = scan_singular_locus(problem.target, grid, config.refine_tol);
  outcome.classification =
      classify_locus(outcome.scan, problem.target, config.grad_tol);
  outcome.verdict =
      obstruction_verdict(problem.target, outcome.scan, outcome.classification);
  return outcome;
}

json check_report(const CheckOutcome& outcome, const std::string& digest) {
  json report = json::object();
  report["version"] = kToolVersion;
  report["input_digest"] = digest;
  report["status"] = to_string(outcome.verdict.status);
  json checks = json::array();
  if (outcome.jacobi_checked) checks.push_back(jacobi_entry(outcome.jacobi));
  checks.push_back(check_entry("locus_class",
                               to_string(outcome.classification.locus_class)));
  checks.push_back(check_entry("obstruction", to_string(outcome.verdict.status),
                               nullptr, nullptr, outcome.verdict.cited_result));
  report["checks"] = std::move(checks);
  report["coverage"] = nullptr;
  report["locus"] = classification_json(
      outcome.verdict.classification, outcome.verdict.locus_rank_histogram,
      outcome.verdict.locus_points, &outcome.scan);
  return report;
}

json verify_report(const ResolutionReport& report, const std::string& digest) {
  json out = json::object();
  out["version"] = kToolVersion;
  out["input_digest"] = digest;
  out["status"] = to_string(report.status);
  out["status_reason"] = report.reason;

  json checks = json::array();
  if (report.jacobi_checked) checks.push_back(jacobi_entry(report.target_jacobi));
  for (const auto& [name, check] : report.symplectic) {
    json witness = nullptr;
    if (check.witness) witness = env_json(*check.witness);
    checks.push_back(check_entry(
        "symplectic:" + name, check.passed ? "pass" : "fail",
        check.min_abs_pfaffian, witness,
        "a symplectic structure has an invertible bivector; sampled via the "
        "Pfaffian magnitude"));
  }
  for (const auto& [name, verdict] : report.morphism) {
    json witness = nullptr;
    if (verdict.witness) witness = env_json(*verdict.witness);
    checks.push_back(check_entry(
        "morphism:" + name,
        verdict.status == MorphismStatus::Morphism ? "pass" : "fail",
        verdict.worst_residual, witness,
        "a map is Poisson iff source brackets of the pulled-back coordinates "
        "match the pulled-back target brackets"));
  }
  checks.push_back(check_entry(
      "coverage", report.coverage.covered_fraction >= 1.0 ? "pass" : "fail",
      report.coverage.covered_fraction, nullptr,
      "surjectivity proxied by multi-start least-squares coverage of the "
      "target grid"));
  {
    json witness = nullptr;
    if (report.regular_value.violation) {
      witness = env_json(*report.regular_value.violation);
    }
    checks.push_back(check_entry(
        "regular_value_consistency",
        report.regular_value.passed ? "pass" : "fail", nullptr, witness,
        "where the map differential is invertible, the image must be a "
        "regular point of the target structure"));
  }
  checks.push_back(check_entry(
      "locus_class",
      to_string(report.target_obstruction.classification.locus_class)));
  checks.push_back(check_entry(
      "obstruction", to_string(report.target_obstruction.status), nullptr,
      nullptr, report.target_obstruction.cited_result));
  out["checks"] = std::move(checks);

  out["coverage"] = coverage_json(report.coverage);
  out["locus"] = classification_json(report.target_obstruction.classification,
                                     report.target_obstruction.locus_rank_histogram,
                                     report.target_obstruction.locus_points,
                                     nullptr);
  out["notes"] = report.notes;
  return out;
}

std::string render_text(const json& report) {
  std::ostringstream out;
  out << "status: " << report["status"].get<std::string>() << "\n";
  if (report.contains("status_reason") && report["status_reason"].is_string()) {
    out << "reason: " << report["status_reason"].get<std::string>() << "\n";
  }
  for (const auto& check : report["checks"]) {
    out << "  [" << check["verdict"].get<std::string>() << "] "
        << check["name"].get<std::string>();
    if (check["residual"].is_number()) {
      out << "  (residual " << check["residual"].dump() << ")";
    }
    out << "\n";
    if (check["witness"].is_object()) {
      out << "      witness: " << check["witness"].dump() << "\n";
    }
  }
  if (report["coverage"].is_object()) {
    out << "coverage: " << report["coverage"]["covered_fraction"].dump()
        << " of " << report["coverage"]["total_points"].dump()
        << " grid points\n";
  }
  if (report["locus"].is_object()) {
    out << "locus: " << report["locus"]["class"].get<std::string>() << " ("
        << report["locus"]["zero_points"].dump() << " zero points)\n";
  }
  if (report.contains("notes")) {
    for (const auto& note : report["notes"]) {
      out << "note: " << note.get<std::string>() << "\n";
    }
  }
  return out.str();
}

int check_exit_code(ObstructionStatus status) {
  switch (status) {
    case ObstructionStatus::SymplecticOnBox:
    case ObstructionStatus::Inconclusive:
      return 0;
    default:
      return 1;
  }
}

int verify_exit_code(ResolutionStatus status) {
  switch (status) {
    case ResolutionStatus::Verified: return 0;
    case ResolutionStatus::Refuted: return 1;
    case ResolutionStatus::Inconclusive: return 2;
  }
  return 2;
}

}  // namespace sympres
