#include "sympres/problem_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sympres {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown key '" + key + "'");
  }
}

Expr parse_expr_field(const json& value, const std::string& where) {
  if (!value.is_string()) fail(where, "expected an expression string");
  try {
    return parse(value.get<std::string>());
  } catch (const ParseError& e) {
    fail(where, e.what());
  }
}

Chart parse_chart(const json& obj, const std::string& where) {
  if (!obj.contains("coords") || !obj["coords"].is_array()) {
    fail(where, "needs a 'coords' array of strings");
  }
  std::vector<std::string> coords;
  for (const auto& c : obj["coords"]) {
    if (!c.is_string()) fail(where, "'coords' entries must be strings");
    coords.push_back(c.get<std::string>());
  }
  if (!obj.contains("box") || !obj["box"].is_array()) {
    fail(where, "needs a 'box' array of [lo, hi] pairs");
  }
  std::vector<Interval> box;
  for (const auto& pair : obj["box"]) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number()) {
      fail(where, "'box' entries must be [lo, hi] number pairs");
    }
    box.push_back(Interval{pair[0].get<double>(), pair[1].get<double>()});
  }
  try {
    return Chart(std::move(coords), std::move(box));
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
}

std::map<std::pair<int, int>, Expr> parse_brackets(const json& obj,
                                                   const Chart& chart,
                                                   const std::string& where) {
  std::map<std::pair<int, int>, Expr> upper;
  if (!obj.contains("brackets")) return upper;
  if (!obj["brackets"].is_object()) fail(where, "'brackets' must be an object");
  for (const auto& [key, value] : obj["brackets"].items()) {
    auto comma = key.find(',');
    if (comma == std::string::npos || key.find(',', comma + 1) != std::string::npos) {
      fail(where, "bracket key '" + key + "' must be 'xi,xj'");
    }
    int i = chart.index_of(key.substr(0, comma));
    int j = chart.index_of(key.substr(comma + 1));
    if (i < 0 || j < 0) {
      fail(where, "bracket key '" + key + "' names unknown coordinates");
    }
    if (i >= j) {
      fail(where, "bracket key '" + key +
                      "' must list coordinates in chart order (i<j)");
    }
    Expr e = parse_expr_field(value, where + ".brackets['" + key + "']");
    for (const auto& v : free_variables(e)) {
      if (chart.index_of(v) < 0) {
        fail(where, "bracket '" + key + "' uses unknown variable '" + v + "'");
      }
    }
    upper.emplace(std::make_pair(i, j), std::move(e));
  }
  return upper;
}

PoissonStructure parse_structure(const json& obj, const std::string& where,
                                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  require_keys(obj, where, allowed);
  Chart chart = parse_chart(obj, where);
  auto upper = parse_brackets(obj, chart, where);
  return PoissonStructure(std::move(chart), std::move(upper));
}

}  // namespace

Problem parse_problem(const json& doc) {
  if (!doc.is_object()) fail("problem", "document must be a JSON object");
  require_keys(doc, "problem", {"target", "pieces", "options"});
  if (!doc.contains("target")) fail("problem", "missing 'target'");

  Problem problem;
  problem.target =
      parse_structure(doc["target"], "target", {"coords", "box", "brackets"});

  if (doc.contains("pieces")) {
    if (!doc["pieces"].is_array()) fail("problem", "'pieces' must be an array");
    std::set<std::string> names;
    int index = 0;
    for (const auto& pj : doc["pieces"]) {
      std::string where = "pieces[" + std::to_string(index++) + "]";
      if (!pj.is_object()) fail(where, "expected an object");
      require_keys(pj, where, {"name", "coords", "box", "brackets", "map"});
      Piece piece;
      piece.name = pj.contains("name") && pj["name"].is_string()
                       ? pj["name"].get<std::string>()
                       : "piece" + std::to_string(index);
      if (!names.insert(piece.name).second) {
        fail(where, "duplicate piece name '" + piece.name + "'");
      }
      piece.structure =
          parse_structure(pj, where, {"name", "coords", "box", "brackets", "map"});
      if (!pj.contains("map") || !pj["map"].is_object()) {
        fail(where, "needs a 'map' object keyed by target coordinates");
      }
      const auto& target_chart = problem.target.chart();
      std::vector<Expr> components(target_chart.coords.size(), Expr());
      std::set<std::string> seen;
      for (const auto& [key, value] : pj["map"].items()) {
        int t = target_chart.index_of(key);
        if (t < 0) fail(where, "map key '" + key + "' is not a target coordinate");
        seen.insert(key);
        components[static_cast<std::size_t>(t)] =
            parse_expr_field(value, where + ".map['" + key + "']");
      }
      for (const auto& coord : target_chart.coords) {
        if (!seen.count(coord)) {
          fail(where, "map is missing a component for target coordinate '" +
                          coord + "'");
        }
      }
      try {
        piece.map = SmoothMap(piece.structure.chart(), target_chart,
                              std::move(components));
      } catch (const ValidationError& e) {
        fail(where, e.what());
      }
      problem.pieces.push_back(std::move(piece));
    }
  }

  if (doc.contains("options")) {
    const auto& opts = doc["options"];
    if (!opts.is_object()) fail("options", "must be an object");
    require_keys(opts, "options", {"seed", "samples", "tol", "grid", "ode_step"});
    if (opts.contains("seed")) {
      if (!opts["seed"].is_number_integer()) fail("options.seed", "must be an integer");
      problem.options.seed = opts["seed"].get<std::uint64_t>();
    }
    if (opts.contains("samples")) {
      if (!opts["samples"].is_number_integer() || opts["samples"].get<int>() < 1) {
        fail("options.samples", "must be a positive integer");
      }
      problem.options.samples = opts["samples"].get<int>();
    }
    if (opts.contains("tol")) {
      if (!opts["tol"].is_number() || !(opts["tol"].get<double>() > 0)) {
        fail("options.tol", "must be a positive number");
      }
      problem.options.tol = opts["tol"].get<double>();
    }
    if (opts.contains("grid")) {
      if (!opts["grid"].is_array()) fail("options.grid", "must be an array of integers");
      for (const auto& g : opts["grid"]) {
        if (!g.is_number_integer() || g.get<int>() < 1) {
          fail("options.grid", "entries must be positive integers");
        }
        problem.options.grid.push_back(g.get<int>());
      }
    }
    if (opts.contains("ode_step")) {
      if (!opts["ode_step"].is_number() || !(opts["ode_step"].get<double>() > 0)) {
        fail("options.ode_step", "must be a positive number");
      }
      problem.options.ode_step = opts["ode_step"].get<double>();
    }
  }
  return problem;
}

Problem load_problem_file(const std::string& path, std::string* raw_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open problem file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string bytes = buffer.str();
  if (raw_bytes) *raw_bytes = bytes;
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("problem file is not valid JSON: ") + e.what());
  }
  return parse_problem(doc);
}

ResolutionCandidate candidate_of(const Problem& problem) {
  return ResolutionCandidate(problem.target, problem.pieces);
}

VerifyConfig verify_config_of(const ProblemOptions& options) {
  VerifyConfig config;
  config.seed = options.seed;
  config.samples = options.samples;
  config.tol = options.tol;
  config.grid = options.grid;
  config.solver.seed = options.seed;
  return config;
}

ObstructionConfig obstruction_config_of(const ProblemOptions& options, int dim) {
  ObstructionConfig config;
  config.grid = options.grid;
  if (config.grid.size() == 1 && dim > 1) {
    config.grid.assign(static_cast<std::size_t>(dim), config.grid[0]);
  }
  return config;
}

}  // namespace sympres
