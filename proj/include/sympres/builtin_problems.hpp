#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace sympres {

/// Problem documents for the worked examples and the obstruction table.
/// "powers" takes the exponents (n, m) of the target bracket x^2n + y^2m.
/// Identical JSON ships under problems/ for direct CLI use.
nlohmann::json builtin_problem(const std::string& name, int n = 2, int m = 1);

std::vector<std::string> builtin_problem_names();

}  // namespace sympres
