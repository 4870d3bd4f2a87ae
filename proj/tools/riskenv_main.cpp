// Command-line front end: scenario ingestion, primal/dual evaluation,
// envelope export, aversity diagnostics, uncertainty-set construction, and
// the built-in selftest suite. All output is JSON with sorted keys and
// %.12g floats, so runs are byte-stable for fixed inputs and seed.
//
// Exit codes: 0 success, 2 schema/usage error, 3 numerical failure
// (primal/dual gap above tolerance, or a failing selftest), 4 empty
// envelope or empty intersection.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riskenv/json_io.hpp"
#include "riskenv/riskenv.hpp"
#include "riskenv/selftest.hpp"

namespace {

constexpr int kSchemaVersion = 1;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitEmpty = 4;

struct Options {
  std::string command;
  std::string input;
  std::string measure;
  std::string expr;
  std::string output;
  std::uint64_t seed = 42;
  double tol = 1e-7;
  bool hrep = false;
};

riskenv::json parse_inline_or_file(const std::string& text, const char* what) {
  const std::size_t pos = text.find_first_not_of(" \t\r\n");
  std::string raw = text;
  if (pos == std::string::npos || text[pos] != '{') {
    std::ifstream in(text);
    if (!in) throw riskenv::SchemaError(std::string(what) + ": cannot open file " + text);
    raw.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  try {
    return riskenv::json::parse(raw);
  } catch (const riskenv::json::exception& e) {
    throw riskenv::SchemaError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

riskenv::ScenarioSet require_input(const Options& opt) {
  if (opt.input.empty())
    throw riskenv::SchemaError("--input is required for command '" + opt.command + "'");
  return riskenv::load_scenarios_file(opt.input);
}

// The measure under analysis, as an expression tree: a plain --measure
// becomes a leaf. Commands that only accept a plain measure use
// require_measure instead.
riskenv::MeasureExpr require_measure_or_expr(const Options& opt) {
  if (!opt.measure.empty() && !opt.expr.empty())
    throw riskenv::SchemaError("give either --measure or --expr, not both");
  if (!opt.measure.empty())
    return riskenv::MeasureExpr::leaf(
        riskenv::measure_from_json(parse_inline_or_file(opt.measure, "--measure")));
  if (!opt.expr.empty())
    return riskenv::expr_from_json(parse_inline_or_file(opt.expr, "--expr"));
  throw riskenv::SchemaError("--measure or --expr is required for command '" +
                             opt.command + "'");
}

riskenv::MeasureSpec require_measure(const Options& opt) {
  if (opt.measure.empty())
    throw riskenv::SchemaError("--measure is required for command '" + opt.command + "'");
  return riskenv::measure_from_json(parse_inline_or_file(opt.measure, "--measure"));
}

void emit(const Options& opt, const riskenv::json& doc) {
  const std::string text = riskenv::dump_stable(doc, 2) + "\n";
  if (opt.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opt.output);
    if (!out) throw riskenv::SchemaError("cannot open output file: " + opt.output);
    out << text;
  }
}

int cmd_eval(const Options& opt) {
  riskenv::ScenarioSet data = require_input(opt);
  riskenv::MeasureExpr expr = require_measure_or_expr(opt);
  riskenv::Envelope env = riskenv::envelope_of(expr, data.space);
  riskenv::json results = riskenv::json::object();
  bool within_tol = true;
  for (std::size_t i = 0; i < data.names.size(); ++i) {
    const double primal = riskenv::eval(expr, data.space, data.variables[i]);
    const double dual = riskenv::support(env, data.variables[i]).value;
    const double gap = std::abs(primal - dual);
    within_tol = within_tol && gap <= opt.tol;
    results[data.names[i]] = {{"primal", primal}, {"dual", dual}, {"gap", gap}};
  }
  riskenv::json doc{{"command", "eval"},
                    {"schema_version", kSchemaVersion},
                    {"tolerance", opt.tol},
                    {"results", results}};
  doc[opt.expr.empty() ? "measure" : "expr"] = riskenv::expr_to_json(expr);
  emit(opt, doc);
  if (!within_tol) {
    std::cerr << "eval: primal/dual gap exceeds tolerance " << opt.tol << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_envelope(const Options& opt) {
  riskenv::ScenarioSet data = require_input(opt);
  riskenv::MeasureExpr expr = require_measure_or_expr(opt);
  riskenv::Envelope env = riskenv::envelope_of(expr, data.space);
  riskenv::json doc{{"command", "envelope"},
                    {"schema_version", kSchemaVersion},
                    {"envelope", riskenv::envelope_to_json(env)}};
  emit(opt, doc);
  return kExitOk;
}

int cmd_check_aversity(const Options& opt) {
  riskenv::ScenarioSet data = require_input(opt);
  riskenv::AversityReport report;
  if (!opt.measure.empty() && opt.expr.empty()) {
    report = riskenv::is_averse_finite(require_measure(opt), data.space, 2000, opt.seed);
  } else {
    report = riskenv::is_averse_finite(require_measure_or_expr(opt), data.space, 2000,
                                       opt.seed);
  }
  riskenv::json doc{{"command", "check-aversity"},
                    {"schema_version", kSchemaVersion},
                    {"report", riskenv::aversity_report_to_json(report)}};
  emit(opt, doc);
  return kExitOk;
}

int cmd_uncertainty_set(const Options& opt) {
  riskenv::ScenarioSet data = require_input(opt);
  if (data.variables.empty())
    throw riskenv::SchemaError("uncertainty-set needs at least one input variable");
  riskenv::MeasureExpr expr = require_measure_or_expr(opt);
  riskenv::AffineFamily fam(data.space, data.variables);
  riskenv::UncertaintySet u = riskenv::canonical_uncertainty_set(expr, fam);
  riskenv::json doc{{"command", "uncertainty-set"},
                    {"schema_version", kSchemaVersion},
                    {"basis", data.names},
                    {"set", riskenv::uncertainty_to_json(u)}};
  if (opt.hrep) {
    if (fam.dim() > 3)
      throw riskenv::SizeLimit("--hrep supports at most 3 basis variables");
    riskenv::UncertaintySet facets = riskenv::to_facet_form(u);
    doc["hrep"] = riskenv::uncertainty_to_json(facets)["facets"];
  }
  emit(opt, doc);
  return kExitOk;
}

int cmd_algebra(const Options& opt) {
  riskenv::ScenarioSet data = require_input(opt);
  if (opt.expr.empty())
    throw riskenv::SchemaError("--expr is required for command 'algebra'");
  riskenv::MeasureExpr expr = require_measure_or_expr(opt);
  riskenv::json results = riskenv::json::object();
  for (std::size_t i = 0; i < data.names.size(); ++i) {
    const double value = riskenv::eval(expr, data.space, data.variables[i]);
    results[data.names[i]] = {{"value", value}};
  }
  riskenv::json doc{{"command", "algebra"},
                    {"schema_version", kSchemaVersion},
                    {"expr", riskenv::expr_to_json(expr)},
                    {"results", results}};
  emit(opt, doc);
  return kExitOk;
}

int cmd_selftest(const Options& opt) {
  riskenv::SelftestResult result = riskenv::run_selftest(opt.seed);
  riskenv::json doc{{"command", "selftest"}, {"schema_version", kSchemaVersion}};
  doc.update(result.report);
  emit(opt, doc);
  if (!result.all_pass) {
    std::cerr << "selftest: one or more checks failed\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  if (const char* env_tol = std::getenv("RISKENV_TOL")) {
    try {
      opt.tol = std::stod(env_tol);
    } catch (const std::exception&) {
      std::cerr << "invalid RISKENV_TOL value: " << env_tol << "\n";
      return kExitSchema;
    }
  }

  CLI::App app{"coherent risk measures: primal/dual evaluation, envelopes, "
               "aversity diagnostics, uncertainty sets"};
  app.add_option("--command", opt.command, "one of eval, envelope, check-aversity, "
                                           "uncertainty-set, algebra, selftest")
      ->required()
      ->check(CLI::IsMember({"eval", "envelope", "check-aversity", "uncertainty-set",
                             "algebra", "selftest"}));
  app.add_option("--input", opt.input, "scenario file (.json or .csv)");
  app.add_option("--measure", opt.measure, "measure spec (inline JSON or file path)");
  app.add_option("--expr", opt.expr, "measure expression (inline JSON or file path)");
  app.add_option("--output", opt.output, "write the JSON document here instead of stdout");
  app.add_option("--seed", opt.seed, "seed for randomized diagnostics");
  app.add_option("--tol", opt.tol, "primal/dual gap tolerance (overrides RISKENV_TOL)");
  app.add_flag("--hrep", opt.hrep, "also emit facets for uncertainty-set (dim <= 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitSchema;
  }

  try {
    if (opt.command == "eval") return cmd_eval(opt);
    if (opt.command == "envelope") return cmd_envelope(opt);
    if (opt.command == "check-aversity") return cmd_check_aversity(opt);
    if (opt.command == "uncertainty-set") return cmd_uncertainty_set(opt);
    if (opt.command == "algebra") return cmd_algebra(opt);
    return cmd_selftest(opt);
  } catch (const riskenv::EmptyEnvelope& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const riskenv::EmptyIntersection& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const riskenv::NumericFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const riskenv::Error& e) {
    // schema errors, invalid specs, dimension mismatches, size limits
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  }
}
