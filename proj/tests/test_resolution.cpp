#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sympres/problem_io.hpp"
#include "sympres/resolution.hpp"
#include "sympres/builtin_problems.hpp"
#include "testutil.hpp"

using namespace sympres;
using namespace sympres::testutil;

namespace {

ResolutionCandidate builtin_candidate(const std::string& name, int n = 2,
                                      int m = 1) {
  Problem problem = parse_problem(builtin_problem(name, n, m));
  return candidate_of(problem);
}

VerifyConfig builtin_config(const std::string& name, int n = 2, int m = 1) {
  Problem problem = parse_problem(builtin_problem(name, n, m));
  return verify_config_of(problem.options);
}

}  // namespace

TEST_CASE("verify_symplectic on canonical and scaled brackets") {
  auto check = verify_symplectic(canonical_plane(-2, 2, -2, 2), 2000, 1e-9, 42);
  CHECK(check.passed);
  CHECK(check.min_abs_pfaffian == 1.0);

  // powers source bracket (n=2, m=1) is strictly positive on the box
  Chart chart({"p", "q"}, {Interval{-3, 3}, Interval{-2, 2}});
  std::map<std::pair<int, int>, Expr> upper;
  upper.emplace(std::make_pair(0, 1), parse("q^2*sin(p*q)^2+cos(p*q)^2"));
  PoissonStructure powers_src(chart, upper);
  auto positive = verify_symplectic(powers_src, 4000, 1e-9, 42);
  CHECK(positive.passed);
  CHECK(positive.min_abs_pfaffian > 0.0);
  CHECK(positive.min_abs_pfaffian < 1.0);

  // {p,q} = q degenerates along q = 0; a coarse tolerance finds a witness
  Chart c2({"p", "q"}, {Interval{-2, 2}, Interval{-2, 2}});
  std::map<std::pair<int, int>, Expr> linear;
  linear.emplace(std::make_pair(0, 1), parse("q"));
  PoissonStructure degenerate(c2, linear);
  auto fail = verify_symplectic(degenerate, 5000, 1e-3, 42);
  REQUIRE_FALSE(fail.passed);
  REQUIRE(fail.witness.has_value());
  CHECK(std::abs(fail.witness->at("q")) <= 1e-3);

  CHECK_THROWS_AS(verify_symplectic(so3_structure(), 10, 1e-9, 1),
                  ValidationError);
}

TEST_CASE("coverage of the squares resolution") {
  auto candidate = builtin_candidate("squares");
  auto coverage = surjectivity_coverage(candidate, {21, 21});
  CHECK(coverage.covered_fraction == 1.0);
  CHECK(coverage.total_points == 441);

  // every found preimage actually maps onto its target point
  CompiledMap cm(candidate.pieces[0].map);
  Eigen::VectorXd image;
  for (const auto& pc : coverage.points) {
    REQUIRE(pc.covered);
    cm.apply(pc.preimage, image);
    double dx = image(0) - pc.point[0];
    double dy = image(1) - pc.point[1];
    CHECK(std::hypot(dx, dy) < 1e-8);
  }
}

TEST_CASE("too small a source box leaves target corners uncovered") {
  // |q| can only reach 2.3, but the target corners need |q| = 2*sqrt(2)
  Problem problem = parse_problem(builtin_problem("squares"));
  Problem small = problem;
  small.pieces[0].structure = PoissonStructure(
      Chart({"p", "q"}, {Interval{-3.2, 3.2}, Interval{-2.3, 2.3}}),
      small.pieces[0].structure.upper());
  small.pieces[0].map =
      SmoothMap(small.pieces[0].structure.chart(),
                problem.target.chart(), small.pieces[0].map.components);
  auto coverage = surjectivity_coverage(candidate_of(small), {21, 21});
  CHECK(coverage.covered_fraction < 1.0);

  // exact reachability oracle: (x,y) has a preimage iff q = +-r fits the
  // q-range and some winding p = angle/r fits the p-range
  auto reachable = [](double x, double y) {
    double r = std::hypot(x, y);
    if (r > 2.3) return false;
    if (r == 0.0) return true;
    auto wrap = [](double a) {
      while (a > M_PI) a -= 2 * M_PI;
      while (a <= -M_PI) a += 2 * M_PI;
      return a;
    };
    double theta = std::atan2(x, y);
    double need = std::min(std::abs(wrap(theta)), std::abs(wrap(M_PI - theta)));
    return need / r <= 3.2;
  };
  for (const auto& pc : coverage.points) {
    CAPTURE(pc.point[0]);
    CAPTURE(pc.point[1]);
    CHECK(pc.covered == reachable(pc.point[0], pc.point[1]));
  }
}

TEST_CASE("coverage of the three-copy union and its sub-unions") {
  auto candidate = builtin_candidate("union3");
  auto full = surjectivity_coverage(candidate, {21, 21});
  CHECK(full.covered_fraction == 1.0);

  // a single exponential piece only reaches x > 0
  ResolutionCandidate partial(candidate.target, {candidate.pieces[0]});
  auto half = surjectivity_coverage(partial, {21, 21});
  CHECK(half.covered_points == 210);  // 10 of 21 columns, all 21 rows
  for (const auto& pc : half.points) {
    CHECK(pc.covered == (pc.point[0] > 0));
  }

  // coverage is monotone in the piece list
  ResolutionCandidate two(candidate.target,
                          {candidate.pieces[0], candidate.pieces[1]});
  auto most = surjectivity_coverage(two, {21, 21});
  CHECK(half.covered_points <= most.covered_points);
  CHECK(most.covered_points <= full.covered_points);
}

TEST_CASE("verify_resolution: squares candidate is Verified") {
  auto report = verify_resolution(builtin_candidate("squares"),
                                  builtin_config("squares"));
  CHECK(report.status == ResolutionStatus::Verified);
  CHECK(report.target_jacobi.passed);
  REQUIRE(report.symplectic.size() == 1);
  CHECK(report.symplectic[0].second.passed);
  REQUIRE(report.morphism.size() == 1);
  CHECK(report.morphism[0].second.status == MorphismStatus::Morphism);
  CHECK(report.morphism[0].second.worst_residual < 1e-9);
  CHECK(report.coverage.covered_fraction == 1.0);
  CHECK(report.regular_value.passed);
  CHECK(report.target_obstruction.status == ObstructionStatus::Inconclusive);

  // preimages found for singular targets sit on degenerate fibers
  for (const auto& pc : report.coverage.points) {
    if (std::hypot(pc.point[0], pc.point[1]) > 1e-9) continue;
    // target (0,0) is the singular point; its preimage must have
    // |det J| = q^2 below the critical threshold
    double q = pc.preimage[1];
    CHECK(q * q < 1e-7);
  }
}

TEST_CASE("verify_resolution: powers candidate (n=2, m=1) is Refuted") {
  auto report = verify_resolution(builtin_candidate("powers", 2, 1),
                                  builtin_config("powers", 2, 1));
  CHECK(report.status == ResolutionStatus::Refuted);
  CHECK(report.reason.find("morphism") != std::string::npos);
  REQUIRE(report.morphism.size() == 1);
  CHECK(report.morphism[0].second.status == MorphismStatus::NotMorphism);
  REQUIRE(report.morphism[0].second.witness.has_value());
}

TEST_CASE("verify_resolution: powers candidate (n=1, m=1) is Verified") {
  auto report = verify_resolution(builtin_candidate("powers", 1, 1),
                                  builtin_config("powers", 1, 1));
  CHECK(report.status == ResolutionStatus::Verified);
}

TEST_CASE("verify_resolution: three-copy union is Verified with a caveat") {
  auto report = verify_resolution(builtin_candidate("union3"),
                                  builtin_config("union3"));
  CHECK(report.status == ResolutionStatus::Verified);
  for (const auto& [name, verdict] : report.morphism) {
    CHECK(verdict.worst_residual < 1e-12);
  }
  CHECK(report.coverage.covered_fraction == 1.0);
  CHECK(report.target_obstruction.status ==
        ObstructionStatus::NoProperResolution);
  bool caveat = false;
  for (const auto& note : report.notes) {
    caveat = caveat || note.find("non-proper") != std::string::npos;
  }
  CHECK(caveat);
}

TEST_CASE("coverage marks unreachable targets without failing") {
  // single piece (exp(p), q) against {x,y} = x: half the grid stays
  // uncovered and the overall verdict degrades to Inconclusive
  auto candidate = builtin_candidate("union3");
  ResolutionCandidate partial(candidate.target, {candidate.pieces[0]});
  VerifyConfig config = builtin_config("union3");
  config.grid = {21, 21};
  auto report = verify_resolution(partial, config);
  CHECK(report.status == ResolutionStatus::Inconclusive);
  CHECK(report.reason.find("coverage") != std::string::npos);
  CHECK(report.coverage.covered_fraction < 1.0);
}

TEST_CASE("candidate validation") {
  auto squares = builtin_candidate("squares");
  CHECK_THROWS_AS(ResolutionCandidate(squares.target, {}), ValidationError);

  // piece whose map targets a different chart
  Piece bad = squares.pieces[0];
  Chart other({"u", "v"}, {Interval{-1, 1}, Interval{-1, 1}});
  bad.map = SmoothMap(bad.structure.chart(), other, {parse("p"), parse("q")});
  CHECK_THROWS_AS(ResolutionCandidate(squares.target, {bad}), ValidationError);
}

TEST_CASE("verify_resolution rejects non-Poisson inputs when validation is on") {
  // the scaled 4D bivector fails the Jacobi identity off its locus
  auto target = scaled_symplectic_4d();
  Chart source({"p1", "p2", "p3", "p4"},
               {Interval{-2, 2}, Interval{-2, 2}, Interval{-2, 2}, Interval{-2, 2}});
  std::map<std::pair<int, int>, Expr> std_upper;
  std_upper.emplace(std::make_pair(0, 1), parse("1"));
  std_upper.emplace(std::make_pair(2, 3), parse("1"));
  PoissonStructure symplectic(source, std_upper);
  SmoothMap identity(source, target.chart(),
                     {parse("p1"), parse("p2"), parse("p3"), parse("p4")});
  ResolutionCandidate broken(target, {Piece{"id", symplectic, identity}});

  VerifyConfig config;
  config.grid = {5, 5, 5, 5};
  CHECK_THROWS_AS(verify_resolution(broken, config), ValidationError);

  // with validation off it proceeds to a (refuted or inconclusive) verdict
  config.check_jacobi = false;
  config.samples = 200;
  config.solver.starts = 2;
  auto report = verify_resolution(broken, config);
  CHECK(report.status != ResolutionStatus::Verified);
}
