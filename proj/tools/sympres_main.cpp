#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sympres/builtin_problems.hpp"
#include "sympres/problem_io.hpp"
#include "sympres/report.hpp"

namespace {

using nlohmann::json;
using namespace sympres;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> tol;
  std::vector<int> grid;
  bool no_jacobi = false;
  std::string format = "text";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Seed for every sampled check");
  cmd->add_option("--samples", flags.samples, "Samples per sampled check");
  cmd->add_option("--tol", flags.tol, "Tolerance for sampled identities");
  cmd->add_option("--grid", flags.grid,
                  "Grid points per axis (single value broadcasts)")
      ->delimiter(',');
  cmd->add_flag("--no-jacobi", flags.no_jacobi,
                "Skip load-time Jacobi validation");
  cmd->add_option("--format", flags.format, "Report format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
}

void apply_flags(Problem& problem, const CommonFlags& flags) {
  if (flags.seed) problem.options.seed = *flags.seed;
  if (flags.samples) problem.options.samples = *flags.samples;
  if (flags.tol) problem.options.tol = *flags.tol;
  if (!flags.grid.empty()) problem.options.grid = flags.grid;
}

void emit(const json& report, const std::string& format) {
  if (format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << render_text(report);
  }
}

int run_checks_and_report(const Problem& problem, const CommonFlags& flags,
                          const std::string& digest) {
  CheckOutcome outcome = run_check(problem, !flags.no_jacobi);
  emit(check_report(outcome, digest), flags.format);
  if (outcome.jacobi_checked && !outcome.jacobi.passed) {
    std::cerr << "input error: the bracket fails the Jacobi identity "
                 "(not a Poisson structure); rerun with --no-jacobi to "
                 "scan it anyway\n";
    return 3;
  }
  return check_exit_code(outcome.verdict.status);
}

int cmd_check(const std::string& file, const CommonFlags& flags) {
  std::string bytes;
  Problem problem = load_problem_file(file, &bytes);
  apply_flags(problem, flags);
  return run_checks_and_report(problem, flags, input_digest(bytes));
}

int run_verify_and_report(const Problem& problem, const CommonFlags& flags,
                          const std::string& digest, json* report_out = nullptr,
                          bool quiet = false) {
  if (problem.pieces.empty()) {
    throw ValidationError("verify needs a problem file with 'pieces'");
  }
  VerifyConfig config = verify_config_of(problem.options);
  config.check_jacobi = !flags.no_jacobi;
  ResolutionReport report =
      verify_resolution(candidate_of(problem), config);
  json doc = verify_report(report, digest);
  if (report_out) *report_out = doc;
  if (!quiet) emit(doc, flags.format);
  return verify_exit_code(report.status);
}

int cmd_verify(const std::string& file, const CommonFlags& flags) {
  std::string bytes;
  Problem problem = load_problem_file(file, &bytes);
  apply_flags(problem, flags);
  return run_verify_and_report(problem, flags, input_digest(bytes));
}

int cmd_ode(const std::string& f_text, double v0, double u0,
            std::vector<double> span, double step, int every) {
  if (span.size() != 2) throw ValidationError("--span needs two values: begin end");
  Expr f = parse(f_text);
  OdeTrace trace = characteristic_ode_trace(f, v0, u0, span[0], span[1], step);
  std::printf("# du/dp = f(u, v0), f = %s, v0 = %.17g, u0 = %.17g\n",
              to_string(f).c_str(), v0, u0);
  std::printf("%-22s %-22s\n", "p", "u");
  for (std::size_t i = 0; i < trace.p.size(); ++i) {
    if (i % static_cast<std::size_t>(every) == 0 || i + 1 == trace.p.size()) {
      std::printf("%-22.12g %-22.12g\n", trace.p[i], trace.u[i]);
    }
  }
  std::printf("# max|u| = %.17g\n", trace.max_abs_u);
  if (trace.blew_up) {
    std::printf("# blow-up: |u| exceeded 1e9 at p = %.12g\n", *trace.blowup_p);
  }
  if (trace.domain_error) {
    std::printf("# truncated: f undefined after p = %.12g\n", *trace.truncated_at);
  }
  return 0;
}

struct ExampleSpec {
  std::string name;
  json problem;
  std::string expected;  // status string the worked example reproduces
};

int cmd_examples(const std::string& name, int n, int m, const CommonFlags& flags) {
  std::vector<ExampleSpec> specs;
  auto expected_powers = (n == 1 && m == 1) ? "verified" : "refuted";
  if (name.empty() || name == "squares") {
    specs.push_back({"squares", builtin_problem("squares"), "verified"});
  }
  if (name.empty() || name == "union3") {
    specs.push_back({"union3", builtin_problem("union3"), "verified"});
  }
  if (name.empty() || name == "powers") {
    specs.push_back({"powers", builtin_problem("powers", n, m), expected_powers});
  }
  if (specs.empty()) {
    throw ValidationError("unknown example '" + name +
                          "' (choose squares, union3, or powers)");
  }

  json results = json::array();
  bool all_as_expected = true;
  for (const auto& spec : specs) {
    Problem problem = parse_problem(spec.problem);
    apply_flags(problem, flags);
    json report;
    run_verify_and_report(problem, flags, input_digest(spec.problem.dump()),
                          &report, /*quiet=*/true);
    std::string status = report["status"].get<std::string>();
    all_as_expected = all_as_expected && status == spec.expected;
    json entry = json::object();
    entry["name"] = spec.name;
    entry["status"] = status;
    entry["expected"] = spec.expected;
    entry["report"] = std::move(report);
    results.push_back(std::move(entry));
  }

  if (flags.format == "json") {
    json doc = json::object();
    doc["version"] = kToolVersion;
    doc["results"] = std::move(results);
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("%-10s %-14s %-14s %-10s %-10s\n", "example", "status",
                "expected", "coverage", "residual");
    for (const auto& entry : results) {
      const json& report = entry["report"];
      double coverage = report["coverage"]["covered_fraction"].get<double>();
      double worst = 0.0;
      for (const auto& check : report["checks"]) {
        std::string cname = check["name"].get<std::string>();
        if (cname.rfind("morphism:", 0) == 0 && check["residual"].is_number()) {
          worst = std::max(worst, check["residual"].get<double>());
        }
      }
      std::printf("%-10s %-14s %-14s %-10.4g %-10.3g\n",
                  entry["name"].get<std::string>().c_str(),
                  entry["status"].get<std::string>().c_str(),
                  entry["expected"].get<std::string>().c_str(), coverage, worst);
    }
  }
  return all_as_expected ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sympres - checks symplectic-resolution candidates for Poisson "
      "structures given in coordinates, scans singular loci, and issues "
      "conditional non-existence verdicts"};
  app.require_subcommand(1);

  CommonFlags check_flags, verify_flags, examples_flags;
  std::string check_file, verify_file, example_name;

  auto* check = app.add_subcommand(
      "check", "Structure-only analysis: Jacobi, locus scan, obstruction");
  check->add_option("file", check_file, "Problem file (JSON)")->required();
  add_common(check, check_flags);

  auto* verify = app.add_subcommand(
      "verify", "Full candidate verification for a problem file with pieces");
  verify->add_option("file", verify_file, "Problem file (JSON)")->required();
  add_common(verify, verify_flags);

  std::string ode_f = "x";
  double ode_v0 = 0.0, ode_u0 = 0.0, ode_step = 1e-3;
  std::vector<double> ode_span{0.0, 10.0};
  int ode_every = 100;
  auto* ode = app.add_subcommand(
      "ode", "Trace the characteristic equation du/dp = f(u, v0)");
  ode->add_option("--f", ode_f, "f as an expression in (x, y) = (u, v0)")
      ->required();
  ode->add_option("--v0", ode_v0, "Frozen second argument");
  ode->add_option("--u0", ode_u0, "Initial value u(p_begin)");
  ode->add_option("--span", ode_span, "Integration span: begin end")
      ->expected(2);
  ode->add_option("--step", ode_step, "RK4 step size");
  ode->add_option("--every", ode_every, "Print every Nth step")
      ->check(CLI::PositiveNumber);

  int powers_n = 2, powers_m = 1;
  auto* examples = app.add_subcommand(
      "examples", "Run the bundled worked examples and print a summary");
  examples->add_option("name", example_name,
                       "Only this example (squares, union3, powers)");
  examples->add_option("--n", powers_n, "Exponent n for the powers example");
  examples->add_option("--m", powers_m, "Exponent m for the powers example");
  add_common(examples, examples_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(check_file, check_flags);
    if (verify->parsed()) return cmd_verify(verify_file, verify_flags);
    if (ode->parsed()) {
      return cmd_ode(ode_f, ode_v0, ode_u0, ode_span, ode_step, ode_every);
    }
    if (examples->parsed()) {
      return cmd_examples(example_name, powers_n, powers_m, examples_flags);
    }
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
