#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/LU>
#include <cmath>
#include <random>

#include "sympres/poisson.hpp"
#include "testutil.hpp"

using namespace sympres;
using namespace sympres::testutil;

TEST_CASE("chart validation") {
  CHECK_THROWS_AS(Chart({"x", "x"}, {Interval{0, 1}, Interval{0, 1}}),
                  ValidationError);
  CHECK_THROWS_AS(Chart({"x"}, {Interval{1, 1}}), ValidationError);
  CHECK_THROWS_AS(Chart({"x"}, {Interval{2, 1}}), ValidationError);
  CHECK_THROWS_AS(Chart({"1x"}, {Interval{0, 1}}), ValidationError);
  Chart c({"x", "y"}, {Interval{-1, 1}, Interval{-1, 1}});
  CHECK(c.index_of("y") == 1);
  CHECK(c.index_of("z") == -1);
}

TEST_CASE("bracket reproduces the defining entries") {
  auto p = structure_2d("x^2+y^2");
  CHECK(bracket(p, parse("x"), parse("y")) == parse("x^2+y^2"));

  // antisymmetry degenerates on the diagonal
  Expr f = parse("x^2+y");
  Box box{{"x", {-2, 2}}, {"y", {-2, 2}}};
  CHECK(equivalent(bracket(p, f, f), parse("0"), box).equivalent);

  auto plane = canonical_plane(-3, 3, -2, 2);
  Expr u = parse("q*sin(p*q)"), v = parse("q*cos(p*q)");
  Box pq{{"p", {-3, 3}}, {"q", {-2, 2}}};
  CHECK(equivalent(bracket(plane, u, v), parse("q^2"), pq).equivalent);

  CHECK_THROWS_AS(bracket(p, parse("z"), parse("x")), ValidationError);
}

TEST_CASE("jacobiator vanishes for so(3) and catches the broken bracket") {
  auto good = so3_structure();
  Box box{{"x", {-2, 2}}, {"y", {-2, 2}}, {"z", {-2, 2}}};
  CHECK(equivalent(jacobiator(good, 0, 1, 2), parse("0"), box).equivalent);
  CHECK(verify_jacobi(good).passed);

  auto bad = so3_broken_structure();
  Env ones{{"x", 1}, {"y", 1}, {"z", 1}};
  CHECK(evaluate(jacobiator(bad, 0, 1, 2), ones) == doctest::Approx(-1.0));
  auto check = verify_jacobi(bad);
  REQUIRE_FALSE(check.passed);
  REQUIRE(check.failure.has_value());
  CHECK(check.failure->gap > 1e-9);

  CHECK_THROWS_AS(jacobiator(good, 0, 2, 1), ValidationError);
  CHECK_THROWS_AS(jacobiator(good, 0, 1, 3), ValidationError);

  // dimension 2 has no triples
  CHECK(verify_jacobi(structure_2d("x*y+sin(x)")).passed);
}

TEST_CASE("matrix_at and rank_at") {
  auto p = structure_2d("x^2+y^2");
  Eigen::MatrixXd at_origin = matrix_at(p, {{"x", 0}, {"y", 0}});
  CHECK(at_origin.norm() == 0.0);
  Eigen::MatrixXd at_unit = matrix_at(p, {{"x", 1}, {"y", 0}});
  CHECK(at_unit(0, 1) == 1.0);
  CHECK(at_unit(1, 0) == -1.0);
  CHECK(at_unit(0, 0) == 0.0);

  CHECK(rank_at(p, {{"x", 0}, {"y", 0}}).rank == 0);
  CHECK(rank_at(p, {{"x", 1}, {"y", 0}}).rank == 2);

  auto scaled = scaled_symplectic_4d();
  Env on_locus{{"x1", 0}, {"x2", 0.7}, {"x3", -1.2}, {"x4", 0.3}};
  CHECK(rank_at(scaled, on_locus).rank == 0);
  Env off_locus{{"x1", 0.5}, {"x2", 0.7}, {"x3", -1.2}, {"x4", 0.3}};
  CHECK(rank_at(scaled, off_locus).rank == 4);

  auto mixed = mixed_4d();
  CHECK(rank_at(mixed, on_locus).rank == 2);

  // near-pairs round down to even
  Chart chart({"x", "y", "z"},
              {Interval{-1, 1}, Interval{-1, 1}, Interval{-1, 1}});
  std::map<std::pair<int, int>, Expr> upper;
  upper.emplace(std::make_pair(0, 1), parse("1"));
  PoissonStructure odd_dim(chart, upper);
  CHECK(rank_at(odd_dim, {{"x", 0}, {"y", 0}, {"z", 0}}).rank == 2);
}

TEST_CASE("pfaffian: symbolic forms and the det = Pf^2 identity") {
  CHECK(pfaffian(structure_2d("x")) == Expr::variable("x"));

  auto mixed = mixed_4d();  // pi12 = x1, pi34 = 1
  CHECK(pfaffian(mixed) == Expr::variable("x1"));
  CHECK(pfaffian(scaled_symplectic_4d()) == parse("x1*x1"));

  Chart c4({"a", "b", "c", "d"},
           {Interval{-1, 1}, Interval{-1, 1}, Interval{-1, 1}, Interval{-1, 1}});
  std::map<std::pair<int, int>, Expr> std_upper;
  std_upper.emplace(std::make_pair(0, 1), parse("1"));
  std_upper.emplace(std::make_pair(2, 3), parse("1"));
  PoissonStructure std4(c4, std_upper);
  CHECK(pfaffian(std4) == Expr::constant(1));
  CHECK(pfaffian_at(std4, {{"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}}) == 1.0);

  CHECK_THROWS_AS(pfaffian(so3_structure()), ValidationError);

  std::mt19937_64 rng(314);
  auto u = [&] { return std::uniform_real_distribution<>(-2, 2)(rng); };
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        a(i, j) = u();
        a(j, i) = -a(i, j);
      }
    }
    double pf = pfaffian_numeric(a);
    double det = a.determinant();
    CHECK(std::abs(pf * pf - det) <= 1e-9 * (1.0 + std::abs(det)));
  }

  // signed expansion through order 6: block diagonal with known Pfaffian
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 6);
  double blocks[3] = {2.0, -3.0, 0.5};
  for (int k = 0; k < 3; ++k) {
    b(2 * k, 2 * k + 1) = blocks[k];
    b(2 * k + 1, 2 * k) = -blocks[k];
  }
  CHECK(pfaffian_numeric(b) == doctest::Approx(2.0 * -3.0 * 0.5));
  CHECK(pfaffian_numeric(Eigen::MatrixXd::Zero(3, 3)) == 0.0);
}

TEST_CASE("hamiltonian vector fields") {
  auto line = structure_2d("x");
  auto xf = hamiltonian_vector_field(line, parse("y"));
  CHECK(xf[0] == Expr::variable("x"));
  CHECK(xf[1] == Expr::constant(0));

  auto xg = hamiltonian_vector_field(line, parse("x"));
  CHECK(xg[0] == Expr::constant(0));
  CHECK(equivalent(xg[1], parse("-x"), Box{{"x", {-2, 2}}, {"y", {-2, 2}}})
            .equivalent);

  auto plane = canonical_plane(-2, 2, -2, 2);
  auto xq = hamiltonian_vector_field(plane, parse("q"));
  CHECK(xq[0] == Expr::constant(1));
  CHECK(xq[1] == Expr::constant(0));
}

TEST_CASE("bracket properties on generated structures") {
  ExprGen gen(404, {"x", "y"}, /*smooth_only=*/true);
  Box box{{"x", {-2, 2}}, {"y", {-2, 2}}};
  for (int trial = 0; trial < 40; ++trial) {
    auto p = random_structure_2d(gen);
    Expr f = gen.gen(2), g = gen.gen(2), h = gen.gen(2);

    // antisymmetry
    CHECK(equivalent(bracket(p, f, g) + bracket(p, g, f), parse("0"), box, 32,
                     1e-9, trial)
              .equivalent);
    // Leibniz in the second slot
    Expr lhs = bracket(p, f, g * h);
    Expr rhs = g * bracket(p, f, h) + bracket(p, f, g) * h;
    CHECK(equivalent(lhs, rhs, box, 32, 1e-9, trial + 1000).equivalent);

    // the Hamiltonian is conserved along its own field
    auto field = hamiltonian_vector_field(p, f);
    Expr drift = field[0] * differentiate(f, "x") +
                 field[1] * differentiate(f, "y");
    CHECK(equivalent(drift, parse("0"), box, 32, 1e-9, trial + 2000).equivalent);
  }
}

TEST_CASE("rank is full exactly where the Pfaffian is away from zero") {
  ExprGen gen(77, {"x", "y"}, /*smooth_only=*/true);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = random_structure_2d(gen);
    for (int s = 0; s < 10; ++s) {
      Env point = gen.sample_point(-2, 2);
      double pf = std::abs(pfaffian_at(p, point));
      if (pf > 1e-6) {
        CHECK(rank_at(p, point).rank == 2);
      } else if (pf < 1e-12) {
        CHECK(rank_at(p, point).rank < 2);
      }
    }
  }

  auto mixed = mixed_4d();
  ExprGen coords(78, {"x1", "x2", "x3", "x4"});
  for (int s = 0; s < 50; ++s) {
    Env point = coords.sample_point(-2, 2);
    double pf = std::abs(pfaffian_at(mixed, point));
    int rank = rank_at(mixed, point).rank;
    if (pf > 1e-6) CHECK(rank == 4);
    if (pf < 1e-12) CHECK(rank < 4);
  }
}

TEST_CASE("structure validation") {
  Chart chart({"x", "y"}, {Interval{-1, 1}, Interval{-1, 1}});
  std::map<std::pair<int, int>, Expr> bad;
  bad.emplace(std::make_pair(1, 0), parse("x"));
  CHECK_THROWS_AS(PoissonStructure(chart, bad), ValidationError);

  std::map<std::pair<int, int>, Expr> unknown;
  unknown.emplace(std::make_pair(0, 1), parse("z"));
  CHECK_THROWS_AS(PoissonStructure(chart, unknown), ValidationError);

  // entry() is antisymmetric and total
  auto p = structure_2d("x");
  CHECK(p.entry(0, 0) == Expr::constant(0));
  CHECK(equivalent(p.entry(1, 0), parse("-x"), Box{{"x", {-2, 2}}, {"y", {-2, 2}}})
            .equivalent);
}
