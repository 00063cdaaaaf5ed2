#include "sympres/builtin_problems.hpp"

#include "sympres/expr.hpp"

namespace sympres {

namespace {

using nlohmann::json;

json options(std::vector<int> grid) {
  return json{{"seed", 42}, {"samples", 10000}, {"tol", 1e-9}, {"grid", grid}};
}

json squares() {
  // polar-style resolution of {x,y} = x^2 + y^2; the source box contains
  // the closed-form preimages q = ±sqrt(x^2+y^2), p = angle/q of every
  // target grid point
  return json{
      {"target",
       {{"coords", {"x", "y"}},
        {"box", {{-2, 2}, {-2, 2}}},
        {"brackets", {{"x,y", "x^2+y^2"}}}}},
      {"pieces",
       {{{"name", "plane"},
         {"coords", {"p", "q"}},
         {"box", {{-20, 20}, {-3, 3}}},
         {"brackets", {{"p,q", "1"}}},
         {"map", {{"x", "q*sin(p*q)"}, {"y", "q*cos(p*q)"}}}}}},
      {"options", options({41, 41})}};
}

json powers(int n, int m) {
  const int a = 2 * n - 2 * m;
  const int b = 2 * m - 1;
  const std::string w =
      b == 1 ? std::string("p*q") : "p*q^" + std::to_string(b);
  std::string bracket = "sin(" + w + ")^2";
  if (a != 0) bracket = "q^" + std::to_string(a) + "*" + bracket;
  bracket += "+cos(" + w + ")^2";
  return json{
      {"target",
       {{"coords", {"x", "y"}},
        {"box", {{-2, 2}, {-2, 2}}},
        {"brackets",
         {{"x,y", "x^" + std::to_string(2 * n) + "+y^" + std::to_string(2 * m)}}}}},
      {"pieces",
       {{{"name", "plane"},
         {"coords", {"p", "q"}},
         {"box", {{-20, 20}, {-3, 3}}},
         {"brackets", {{"p,q", bracket}}},
         {"map",
          {{"x", "q*sin(" + w + ")"}, {"y", "q*cos(" + w + ")"}}}}}},
      {"options", options({21, 21})}};
}

json union3() {
  // three-copy resolution of {x,y} = x: exp charts for x>0 and x<0 plus a
  // rank-deficient piece for the singular line x=0
  json piece = {{"coords", {"p", "q"}},
                {"box", {{-3.2, 3.2}, {-2.5, 2.5}}},
                {"brackets", {{"p,q", "1"}}}};
  json pos = piece, neg = piece, axis = piece;
  pos["name"] = "positive";
  pos["map"] = {{"x", "exp(p)"}, {"y", "q"}};
  neg["name"] = "negative";
  neg["map"] = {{"x", "-exp(p)"}, {"y", "q"}};
  axis["name"] = "axis";
  axis["map"] = {{"x", "0"}, {"y", "q"}};
  return json{{"target",
               {{"coords", {"x", "y"}},
                {"box", {{-2, 2}, {-2, 2}}},
                {"brackets", {{"x,y", "x"}}}}},
              {"pieces", {pos, neg, axis}},
              {"options", options({41, 41})}};
}

json structure_only(const std::string& bracket) {
  json target = {{"coords", {"x", "y"}}, {"box", {{-2, 2}, {-2, 2}}}};
  if (!bracket.empty()) target["brackets"] = {{"x,y", bracket}};
  return json{{"target", target}, {"options", options({81, 81})}};
}

json scaled_symplectic_4d() {
  // x1 * (standard symplectic): vanishes identically on {x1 = 0}; not a
  // Poisson structure (Jacobi fails off the locus), so check it with
  // --no-jacobi
  return json{
      {"target",
       {{"coords", {"x1", "x2", "x3", "x4"}},
        {"box", {{-2, 2}, {-2, 2}, {-2, 2}, {-2, 2}}},
        {"brackets", {{"x1,x2", "x1"}, {"x3,x4", "x1"}}}}},
      {"options", options({81, 81, 81, 81})}};
}

}  // namespace

json builtin_problem(const std::string& name, int n, int m) {
  if (name == "squares") return squares();
  if (name == "powers") {
    if (n < m || m < 1) {
      throw ValidationError("powers needs integers n >= m >= 1");
    }
    return powers(n, m);
  }
  if (name == "union3") return union3();
  if (name == "line") return structure_only("x");
  if (name == "zero") return structure_only("");
  if (name == "symplectic_plane") return structure_only("1");
  if (name == "scaled_symplectic_4d") return scaled_symplectic_4d();
  throw ValidationError("unknown builtin problem '" + name + "'");
}

std::vector<std::string> builtin_problem_names() {
  return {"squares", "powers",           "union3",
          "line",    "zero",             "symplectic_plane",
          "scaled_symplectic_4d"};
}

}  // namespace sympres
