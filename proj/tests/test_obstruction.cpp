#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sympres/obstruction.hpp"
#include "testutil.hpp"

using namespace sympres;
using namespace sympres::testutil;

TEST_CASE("locus scan: isolated zero, line, empty") {
  auto isolated = structure_2d("x^2+y^2");
  auto scan = scan_singular_locus(isolated, {41, 41});
  REQUIRE(scan.zero_points.rows() == 1);
  CHECK(scan.zero_points(0, 0) == 0.0);
  CHECK(scan.zero_points(0, 1) == 0.0);
  CHECK(scan.gradient_norms[0] == 0.0);

  auto line = structure_2d("x");
  auto line_scan = scan_singular_locus(line, {41, 41});
  CHECK(line_scan.zero_points.rows() == 41);  // one per grid row
  for (Eigen::Index i = 0; i < line_scan.zero_points.rows(); ++i) {
    CHECK(std::abs(line_scan.zero_points(i, 0)) <= 1e-6);
    CHECK(line_scan.gradient_norms[static_cast<std::size_t>(i)] ==
          doctest::Approx(1.0));
  }

  // an even grid has no vertices on {x = 0}; bisection finds the crossings
  auto line_even = scan_singular_locus(line, {40, 40});
  CHECK(line_even.near_zero_vertices == 0);
  CHECK(line_even.sign_change_points == 40);
  for (Eigen::Index i = 0; i < line_even.zero_points.rows(); ++i) {
    CHECK(std::abs(line_even.zero_points(i, 0)) <= 1e-6);
  }

  auto everywhere = structure_2d("1");
  CHECK(scan_singular_locus(everywhere, {41, 41}).zero_points.rows() == 0);

  CHECK_THROWS_AS(scan_singular_locus(so3_structure(), {11, 11, 11}),
                  ValidationError);
}

TEST_CASE("locus classification matches the decision table") {
  auto line = structure_2d("x");
  auto line_scan = scan_singular_locus(line, {81, 81});
  auto line_class = classify_locus(line_scan, line);
  CHECK(line_class.locus_class == LocusClass::CodimOneHypersurface);
  CHECK(line_class.gradient_quorum == 1.0);
  CHECK(line_class.component_count == 1);

  auto isolated = structure_2d("x^2+y^2");
  auto iso_scan = scan_singular_locus(isolated, {81, 81});
  CHECK(classify_locus(iso_scan, isolated).locus_class ==
        LocusClass::IsolatedPoints);

  auto zero = structure_2d("");
  auto zero_scan = scan_singular_locus(zero, {81, 81});
  CHECK(zero_scan.has_plateau_block);
  CHECK(classify_locus(zero_scan, zero).locus_class == LocusClass::FatRegion);

  auto empty = structure_2d("1");
  auto empty_scan = scan_singular_locus(empty, {81, 81});
  CHECK(classify_locus(empty_scan, empty).locus_class == LocusClass::Empty);

  // a diagonal zero line spans both axes and is caught by the gradient
  auto diagonal = structure_2d("x-y");
  auto diag_scan = scan_singular_locus(diagonal, {81, 81});
  CHECK(classify_locus(diag_scan, diagonal).locus_class ==
        LocusClass::CodimOneHypersurface);

  // the scaled 4D bivector: Pf = x1^2 has vanishing gradient on the locus,
  // but the flagged sheet is transversally thin
  auto scaled = scaled_symplectic_4d();
  auto scan4 = scan_singular_locus(scaled, {21, 21, 21, 21});
  auto cls4 = classify_locus(scan4, scaled);
  CHECK(cls4.locus_class == LocusClass::CodimOneHypersurface);
  CHECK(cls4.gradient_quorum == 0.0);
  CHECK(cls4.spanning_axes == 3);
  CHECK(cls4.transverse_thickness <= 3);
}

TEST_CASE("classification is stable under grid doubling") {
  auto line = structure_2d("x");
  auto isolated = structure_2d("x^2+y^2");
  auto zero = structure_2d("");
  for (int n : {41, 81}) {
    auto s1 = scan_singular_locus(line, {n, n});
    CHECK(classify_locus(s1, line).locus_class ==
          LocusClass::CodimOneHypersurface);
    auto s2 = scan_singular_locus(isolated, {n, n});
    CHECK(classify_locus(s2, isolated).locus_class ==
          LocusClass::IsolatedPoints);
    auto s3 = scan_singular_locus(zero, {n, n});
    CHECK(classify_locus(s3, zero).locus_class == LocusClass::FatRegion);
  }
}

TEST_CASE("rank on the locus") {
  auto line = structure_2d("x");
  auto scan = scan_singular_locus(line, {41, 41});
  auto ranks = rank_on_locus(line, scan);
  REQUIRE(ranks.size() == 41);
  for (const auto& pr : ranks) CHECK(pr.rank == 0);

  auto scaled = scaled_symplectic_4d();
  auto scan4 = scan_singular_locus(scaled, {11, 11, 11, 11});
  auto hist = rank_histogram_on_locus(scaled, scan4);
  REQUIRE(hist.count(0));
  CHECK(hist.at(0) == scan4.zero_points.rows());
  CHECK(hist.size() == 1);

  auto mixed = mixed_4d();
  auto scan_mixed = scan_singular_locus(mixed, {11, 11, 11, 11});
  auto hist_mixed = rank_histogram_on_locus(mixed, scan_mixed);
  REQUIRE(hist_mixed.count(2));
  CHECK(hist_mixed.at(2) == scan_mixed.zero_points.rows());

  // every locus point is genuinely singular
  for (const auto& pr : rank_on_locus(mixed, scan_mixed)) {
    CHECK(pr.rank < 4);
  }
}

TEST_CASE("obstruction verdicts follow the decision table") {
  CHECK(obstruction_verdict(structure_2d("x"), {{81, 81}}).status ==
        ObstructionStatus::NoProperResolution);
  CHECK(obstruction_verdict(structure_2d("x^2+y^2"), {{81, 81}}).status ==
        ObstructionStatus::Inconclusive);
  CHECK(obstruction_verdict(structure_2d(""), {{81, 81}}).status ==
        ObstructionStatus::NotDenseSymplectic);
  CHECK(obstruction_verdict(structure_2d("1"), {{81, 81}}).status ==
        ObstructionStatus::SymplecticOnBox);

  auto scaled = obstruction_verdict(scaled_symplectic_4d(), {{21, 21, 21, 21}});
  CHECK(scaled.status == ObstructionStatus::NoResolutionRankZero);
  CHECK(scaled.cited_result.find("dimension >= 4") != std::string::npos);

  // rank 2 on the locus keeps the verdict at the proper-resolution level
  auto mixed = obstruction_verdict(mixed_4d(), {{21, 21, 21, 21}});
  CHECK(mixed.status == ObstructionStatus::NoProperResolution);

  // the 2D line never escalates to the rank-zero verdict
  auto line = obstruction_verdict(structure_2d("x"), {{81, 81}});
  CHECK(line.status == ObstructionStatus::NoProperResolution);
  CHECK(line.locus_rank_histogram.at(0) == 81);

  // verdict text stays conditional on the hypothesis class
  CHECK(line.cited_result.find("proper") != std::string::npos);
  CHECK(line.cited_result.find("open") != std::string::npos);
}

TEST_CASE("characteristic ODE traces") {
  // f(0, v0) = 0 forces the zero solution
  auto zero = characteristic_ode_trace(parse("x*1"), 0.5, 0.0, 0.0, 10.0, 1e-3);
  CHECK(zero.max_abs_u < 1e-12);
  CHECK_FALSE(zero.blew_up);
  CHECK(zero.p.size() == 10001);

  // u' = u grows exponentially
  auto growth = characteristic_ode_trace(parse("x"), 0.0, 1e-3, 0.0, 5.0, 1e-3);
  double expected = 1e-3 * std::exp(5.0);
  CHECK(std::abs(growth.u.back() - expected) <= 1e-6 * expected);

  // u' = u^2 + v0^2 with v0 = 0, u0 = 1 blows up at p = 1
  auto pole = characteristic_ode_trace(parse("x^2+y^2"), 0.0, 1.0, 0.0, 2.0, 1e-3);
  REQUIRE(pole.blew_up);
  CHECK(*pole.blowup_p >= 0.99);
  CHECK(*pole.blowup_p <= 1.01);
  CHECK(pole.max_abs_u > 1e9);

  // u' = log(u) from u0 = 1/2 decays through 0; the log turns undefined
  // and the trajectory truncates with the flag set
  auto truncated =
      characteristic_ode_trace(parse("log(x)"), 0.0, 0.5, 0.0, 3.0, 1e-2);
  CHECK(truncated.domain_error);
  CHECK(truncated.truncated_at.has_value());
  CHECK(truncated.p.size() < 302);
  CHECK(*truncated.truncated_at < 1.0);

  CHECK_THROWS_AS(characteristic_ode_trace(parse("x"), 0, 0, 0, 1, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(characteristic_ode_trace(parse("z"), 0, 0, 0, 1, 1e-3),
                  ValidationError);
}

TEST_CASE("zero solution dichotomy for brackets vanishing on a line") {
  // f = x*g with g nonvanishing: from u0 = 0 the trajectory stays pinned
  for (const char* g : {"1", "2+sin(y)", "1+x^2", "exp(y)"}) {
    Expr f = parse(std::string("x*(") + g + ")");
    for (double v0 : {-1.5, 0.0, 0.8}) {
      auto trace = characteristic_ode_trace(f, v0, 0.0, 0.0, 8.0, 1e-3);
      CHECK(trace.max_abs_u < 1e-10);
    }
  }
}

TEST_CASE("every refined zero point is inside the box and singular") {
  for (const char* bracket : {"x", "x^2+y^2", "x-y"}) {
    auto p = structure_2d(bracket);
    auto scan = scan_singular_locus(p, {41, 41});
    for (Eigen::Index i = 0; i < scan.zero_points.rows(); ++i) {
      double x = scan.zero_points(i, 0), y = scan.zero_points(i, 1);
      CHECK(p.chart().box[0].contains(x));
      CHECK(p.chart().box[1].contains(y));
      CHECK(rank_at(p, {{"x", x}, {"y", y}}).rank < 2);
    }
  }
}
