#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "sympres/builtin_problems.hpp"
#include "sympres/problem_io.hpp"
#include "sympres/report.hpp"

using namespace sympres;
using nlohmann::json;

namespace {

json parse_file(const std::string& name) {
  std::ifstream in(std::string(SYMPRES_PROBLEMS_DIR) + "/" + name);
  REQUIRE(in.good());
  return json::parse(in);
}

json fixture(const char* text) { return json::parse(text); }

}  // namespace

TEST_CASE("shipped problem files match the built-in documents") {
  CHECK(parse_file("squares.json") == builtin_problem("squares"));
  CHECK(parse_file("union3.json") == builtin_problem("union3"));
  CHECK(parse_file("powers_n2_m1.json") == builtin_problem("powers", 2, 1));
  CHECK(parse_file("line.json") == builtin_problem("line"));
  CHECK(parse_file("zero.json") == builtin_problem("zero"));
  CHECK(parse_file("symplectic_plane.json") ==
        builtin_problem("symplectic_plane"));
  CHECK(parse_file("scaled_symplectic_4d.json") ==
        builtin_problem("scaled_symplectic_4d"));
  CHECK_THROWS_AS(builtin_problem("nope"), ValidationError);
  CHECK_THROWS_AS(builtin_problem("powers", 1, 2), ValidationError);
}

TEST_CASE("problem parsing accepts the documented schema") {
  Problem p = parse_problem(builtin_problem("squares"));
  CHECK(p.target.dim() == 2);
  CHECK(p.target.chart().coords == std::vector<std::string>{"x", "y"});
  REQUIRE(p.pieces.size() == 1);
  CHECK(p.pieces[0].name == "plane");
  CHECK(p.options.seed == 42);
  CHECK(p.options.samples == 10000);
  CHECK(p.options.tol == 1e-9);
  CHECK(p.options.grid == std::vector<int>{41, 41});

  // omitted brackets mean the zero structure
  Problem zero = parse_problem(builtin_problem("zero"));
  CHECK(zero.target.upper().empty());
}

TEST_CASE("problem validation rejects malformed documents") {
  // bracket keys must follow chart order
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x","y"],
        "box": [[-1,1],[-1,1]], "brackets": {"y,x": "1"}}})")),
      doctest::Contains("chart order"), ValidationError);

  // unknown top-level key
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x"], "box": [[-1,1]]},
        "extra": 1})")),
      doctest::Contains("unknown key"), ValidationError);

  // malformed expression with byte offset
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x","y"],
        "box": [[-1,1],[-1,1]], "brackets": {"x,y": "x^"}}})")),
      doctest::Contains("offset 2"), ValidationError);

  // missing map component
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x","y"],
        "box": [[-1,1],[-1,1]], "brackets": {"x,y": "1"}},
        "pieces": [{"name": "a", "coords": ["p","q"], "box": [[-1,1],[-1,1]],
                    "brackets": {"p,q": "1"}, "map": {"x": "p"}}]})")),
      doctest::Contains("missing a component"), ValidationError);

  // duplicate piece names
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x"], "box": [[-1,1]]},
        "pieces": [
          {"name": "a", "coords": ["p"], "box": [[-1,1]], "map": {"x": "p"}},
          {"name": "a", "coords": ["p"], "box": [[-1,1]], "map": {"x": "p"}}]})")),
      doctest::Contains("duplicate piece name"), ValidationError);

  // degenerate box
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x"], "box": [[1,1]]}})")),
      doctest::Contains("positive finite length"), ValidationError);

  // unknown option
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x"], "box": [[-1,1]]},
        "options": {"sneed": 1}})")),
      doctest::Contains("unknown key 'sneed'"), ValidationError);

  // bracket over unknown variable
  CHECK_THROWS_WITH_AS(
      parse_problem(fixture(R"({"target": {"coords": ["x","y"],
        "box": [[-1,1],[-1,1]], "brackets": {"x,y": "z"}}})")),
      doctest::Contains("unknown variable"), ValidationError);
}

TEST_CASE("run_check produces the obstruction pipeline output") {
  Problem line = parse_problem(builtin_problem("line"));
  line.options.grid = {41, 41};
  CheckOutcome outcome = run_check(line, /*check_jacobi=*/true);
  CHECK(outcome.jacobi.passed);
  CHECK(outcome.classification.locus_class == LocusClass::CodimOneHypersurface);
  CHECK(outcome.verdict.status == ObstructionStatus::NoProperResolution);

  json report = check_report(outcome, input_digest("test"));
  CHECK(report["version"] == kToolVersion);
  CHECK(report["status"] == "no_proper_resolution");
  CHECK(report["coverage"].is_null());
  CHECK(report["locus"]["class"] == "codim_one_hypersurface");
  CHECK(report["locus"]["rank_histogram"]["0"] == 41);
  REQUIRE(report["checks"].is_array());
  CHECK(report["checks"][0]["name"] == "jacobi");
  CHECK(report["checks"][0]["verdict"] == "pass");

  // identical inputs give byte-identical reports
  CheckOutcome again = run_check(line, true);
  CHECK(check_report(again, input_digest("test")).dump(2) == report.dump(2));
}

TEST_CASE("verify_report carries the full check list") {
  Problem squares = parse_problem(builtin_problem("squares"));
  squares.options.grid = {15, 15};
  squares.options.samples = 500;
  VerifyConfig config = verify_config_of(squares.options);
  ResolutionReport rep = verify_resolution(candidate_of(squares), config);
  json doc = verify_report(rep, input_digest("x"));
  CHECK(doc["status"] == "verified");
  CHECK(doc["coverage"]["covered_fraction"] == 1.0);
  CHECK(doc["locus"]["class"] == "isolated_points");

  std::set<std::string> names;
  for (const auto& check : doc["checks"]) {
    names.insert(check["name"].get<std::string>());
  }
  CHECK(names.count("jacobi"));
  CHECK(names.count("symplectic:plane"));
  CHECK(names.count("morphism:plane"));
  CHECK(names.count("coverage"));
  CHECK(names.count("regular_value_consistency"));
  CHECK(names.count("obstruction"));

  // text rendering mentions the status and every check
  std::string text = render_text(doc);
  CHECK(text.find("verified") != std::string::npos);
  CHECK(text.find("morphism:plane") != std::string::npos);
}

TEST_CASE("exit codes are a total function of the status") {
  CHECK(check_exit_code(ObstructionStatus::SymplecticOnBox) == 0);
  CHECK(check_exit_code(ObstructionStatus::Inconclusive) == 0);
  CHECK(check_exit_code(ObstructionStatus::NoProperResolution) == 1);
  CHECK(check_exit_code(ObstructionStatus::NoResolutionRankZero) == 1);
  CHECK(check_exit_code(ObstructionStatus::NotDenseSymplectic) == 1);
  CHECK(verify_exit_code(ResolutionStatus::Verified) == 0);
  CHECK(verify_exit_code(ResolutionStatus::Refuted) == 1);
  CHECK(verify_exit_code(ResolutionStatus::Inconclusive) == 2);
}

TEST_CASE("input digest is stable") {
  CHECK(input_digest("abc") == input_digest("abc"));
  CHECK(input_digest("abc") != input_digest("abd"));
  CHECK(input_digest("").rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("load_problem_file reads bytes for digesting") {
  std::string bytes;
  Problem p = load_problem_file(
      std::string(SYMPRES_PROBLEMS_DIR) + "/squares.json", &bytes);
  CHECK_FALSE(bytes.empty());
  CHECK(p.pieces.size() == 1);
  CHECK_THROWS_AS(load_problem_file("/nonexistent/q.json"), ValidationError);
}
