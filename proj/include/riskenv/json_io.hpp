#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "riskenv/algebra.hpp"
#include "riskenv/aversity.hpp"
#include "riskenv/common.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/measures.hpp"
#include "riskenv/space.hpp"
#include "riskenv/uncertainty.hpp"

namespace riskenv {

using json = nlohmann::json;

/// A probability space plus named loss variables, as ingested from disk.
struct ScenarioSet {
  ProbabilitySpace space;
  std::vector<std::string> names;
  std::vector<RandomVariable> variables;
};

namespace iodetail {

inline double to_double(const json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(what + " must be finite");
  return v;
}

inline Vec to_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array");
  Vec out;
  out.reserve(j.size());
  for (const json& e : j) out.push_back(to_double(e, what + " entry"));
  return out;
}

// Drop zero-probability atoms, renormalize small deviations, reject the rest.
inline ScenarioSet assemble(Vec probs, std::vector<std::string> names,
                            std::vector<Vec> columns) {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].size() != probs.size())
      throw SchemaError("variable '" + names[c] + "' has " +
                        std::to_string(columns[c].size()) + " values for " +
                        std::to_string(probs.size()) + " atoms");
  Vec kept_probs;
  std::vector<Vec> kept_cols(columns.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;  // zero-probability atoms are dropped here
    if (probs[i] < 0.0) throw SchemaError("probabilities must be nonnegative");
    kept_probs.push_back(probs[i]);
    for (std::size_t c = 0; c < columns.size(); ++c)
      kept_cols[c].push_back(columns[c][i]);
  }
  if (kept_probs.empty()) throw SchemaError("no atoms with positive probability");
  double sum = 0.0;
  for (double p : kept_probs) sum += p;
  if (std::abs(sum - 1.0) > kIngestSumTol)
    throw SchemaError("probabilities sum to " + std::to_string(sum) +
                      "; deviation from 1 exceeds the 1e-6 renormalization window");
  for (double& p : kept_probs) p /= sum;

  ScenarioSet out{ProbabilitySpace(std::move(kept_probs)), std::move(names), {}};
  out.variables.reserve(kept_cols.size());
  for (Vec& col : kept_cols) out.variables.push_back(RandomVariable{std::move(col)});
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const std::size_t b = field.find_first_not_of(" \t\r");
    const std::size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace iodetail

/// {"probs": [...], "variables": {"name": [...], ...}}
inline ScenarioSet load_scenarios_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("probs"))
    throw SchemaError("scenario document needs a 'probs' array");
  Vec probs = iodetail::to_vec(doc.at("probs"), "probs");
  std::vector<std::string> names;
  std::vector<Vec> columns;
  if (doc.contains("variables")) {
    if (!doc.at("variables").is_object())
      throw SchemaError("'variables' must be an object of name -> array");
    for (const auto& [name, arr] : doc.at("variables").items()) {
      names.push_back(name);
      columns.push_back(iodetail::to_vec(arr, "variable '" + name + "'"));
    }
  }
  return iodetail::assemble(std::move(probs), std::move(names), std::move(columns));
}

/// CSV with a header row; column 1 is the probability, remaining named
/// columns are variables.
inline ScenarioSet load_scenarios_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty CSV input");
  std::vector<std::string> header = iodetail::split_csv_line(line);
  if (header.size() < 1) throw SchemaError("CSV header needs at least one column");
  std::vector<std::string> names(header.begin() + 1, header.end());
  Vec probs;
  std::vector<Vec> columns(names.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = iodetail::split_csv_line(line);
    if (fields.size() != header.size())
      throw SchemaError("CSV line " + std::to_string(lineno) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    try {
      auto parse = [&](const std::string& field) {
        const double v = std::stod(field);
        if (!std::isfinite(v)) throw SchemaError("");
        return v;
      };
      probs.push_back(parse(fields[0]));
      for (std::size_t c = 0; c < names.size(); ++c)
        columns[c].push_back(parse(fields[c + 1]));
    } catch (const std::exception&) {
      throw SchemaError("CSV line " + std::to_string(lineno) +
                        ": not a finite number");
    }
  }
  if (probs.empty()) throw SchemaError("CSV input has no data rows");
  return iodetail::assemble(std::move(probs), std::move(names), std::move(columns));
}

inline ScenarioSet load_scenarios_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open input file: " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return load_scenarios_csv(in);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid JSON input: ") + e.what());
  }
  return load_scenarios_json(doc);
}

// ---------------------------------------------------------------------------
// Measure specs and expressions

inline MeasureSpec measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw SchemaError("measure spec needs a 'kind' field");
  const std::string kind = j.at("kind").get<std::string>();
  auto field = [&](const char* name) -> double {
    if (!j.contains(name))
      throw SchemaError("measure '" + kind + "' needs field '" + name + "'");
    return iodetail::to_double(j.at(name), name);
  };
  if (kind == "expectation") return Expectation{};
  if (kind == "worstcase") return WorstCase{};
  if (kind == "cvar") return Cvar{field("alpha")};
  if (kind == "oce") return Oce{field("gamma1"), field("gamma2")};
  if (kind == "meandev") return MeanDeviation{field("lambda")};
  if (kind == "subdivide") {
    if (!j.contains("cells") || !j.at("cells").is_array())
      throw SchemaError("subdivide needs a 'cells' array of index arrays");
    Subdivide s;
    for (const json& cell : j.at("cells")) {
      if (!cell.is_array()) throw SchemaError("subdivide cells must be arrays");
      std::vector<std::size_t> c;
      for (const json& e : cell) {
        if (!e.is_number_integer() || e.get<long long>() < 0)
          throw SchemaError("subdivide cell indices must be nonnegative integers");
        c.push_back(e.get<std::size_t>());
      }
      s.cells.push_back(std::move(c));
    }
    if (!j.contains("weights")) throw SchemaError("subdivide needs 'weights'");
    s.weights = iodetail::to_vec(j.at("weights"), "weights");
    return s;
  }
  throw SchemaError("unknown measure kind: " + kind);
}

inline json measure_to_json(const MeasureSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Expectation>) {
          return json{{"kind", "expectation"}};
        } else if constexpr (std::is_same_v<T, WorstCase>) {
          return json{{"kind", "worstcase"}};
        } else if constexpr (std::is_same_v<T, Subdivide>) {
          return json{{"kind", "subdivide"}, {"cells", s.cells}, {"weights", s.weights}};
        } else if constexpr (std::is_same_v<T, Oce>) {
          return json{{"kind", "oce"}, {"gamma1", s.gamma1}, {"gamma2", s.gamma2}};
        } else if constexpr (std::is_same_v<T, Cvar>) {
          return json{{"kind", "cvar"}, {"alpha", s.alpha}};
        } else {
          return json{{"kind", "meandev"}, {"lambda", s.lambda}};
        }
      },
      spec);
}

inline MeasureExpr expr_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("measure expression must be an object");
  if (j.contains("kind")) return MeasureExpr::leaf(measure_from_json(j));
  if (!j.contains("op")) throw SchemaError("measure expression needs 'op' or 'kind'");
  const std::string op = j.at("op").get<std::string>();
  if (!j.contains("children") || !j.at("children").is_array() || j.at("children").empty())
    throw SchemaError("'" + op + "' needs a nonempty 'children' array");
  std::vector<MeasureExpr> children;
  for (const json& c : j.at("children")) children.push_back(expr_from_json(c));
  if (op == "max") return MeasureExpr::max_of(std::move(children));
  if (op == "infconv") return MeasureExpr::inf_conv(std::move(children));
  if (op == "combo") {
    if (!j.contains("weights")) throw SchemaError("'combo' needs 'weights'");
    return MeasureExpr::combo(iodetail::to_vec(j.at("weights"), "weights"),
                              std::move(children));
  }
  throw SchemaError("unknown expression op: " + op);
}

inline json expr_to_json(const MeasureExpr& expr) {
  return std::visit(
      [](const auto& node) -> json {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Leaf>) {
          return measure_to_json(node.spec);
        } else {
          json children = json::array();
          for (const MeasureExpr& c : node.children) children.push_back(expr_to_json(c));
          if constexpr (std::is_same_v<T, ConvexCombo>) {
            return json{{"op", "combo"}, {"weights", node.weights}, {"children", children}};
          } else if constexpr (std::is_same_v<T, MaxOf>) {
            return json{{"op", "max"}, {"children", children}};
          } else {
            return json{{"op", "infconv"}, {"children", children}};
          }
        }
      },
      expr.node);
}

// ---------------------------------------------------------------------------
// Exports

inline json envelope_to_json(const Envelope& env) {
  json out{{"space_probs", env.space().probs()}};
  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          out["type"] = "vertices";
          json verts = json::array();
          for (const Density& v : rep.vertices) verts.push_back(v.weights);
          out["vertices"] = std::move(verts);
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          out["type"] = "constraints";
          json eq = json::array(), le = json::array();
          for (std::size_t r = 0; r < rep.eq_rows.size(); ++r)
            eq.push_back(json{{"a", rep.eq_rows[r]}, {"b", rep.eq_rhs[r]}});
          for (std::size_t r = 0; r < rep.le_rows.size(); ++r)
            le.push_back(json{{"a", rep.le_rows[r]}, {"b", rep.le_rhs[r]}});
          out["eq"] = std::move(eq);
          out["le"] = std::move(le);
        } else {
          out["type"] = "meandev_ball";
          out["lambda"] = rep.lambda;
        }
      },
      env.rep());
  return out;
}

inline json uncertainty_to_json(const UncertaintySet& u) {
  json out{{"dim", u.dim()}};
  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, UncertaintyVertices>) {
          out["vertices"] = rep.points;
        } else {
          json eq = json::array(), le = json::array();
          for (std::size_t r = 0; r < rep.eq_rows.size(); ++r)
            eq.push_back(json{{"a", rep.eq_rows[r]}, {"b", rep.eq_rhs[r]}});
          for (std::size_t r = 0; r < rep.le_rows.size(); ++r)
            le.push_back(json{{"a", rep.le_rows[r]}, {"b", rep.le_rhs[r]}});
          out["facets"] = json{{"eq", std::move(eq)}, {"le", std::move(le)}};
        }
      },
      u.rep());
  return out;
}

inline json aversity_report_to_json(const AversityReport& report) {
  const char* verdict = report.verdict == AversityVerdict::Averse      ? "Averse"
                        : report.verdict == AversityVerdict::NotAverse ? "NotAverse"
                                                                       : "Inconclusive";
  json out{{"necessary_holds", report.necessary_holds},
           {"sufficient_holds", report.sufficient_holds},
           {"verdict", verdict}};
  if (report.counterexample)
    out["counterexample"] = report.counterexample->values;
  else
    out["counterexample"] = nullptr;
  return out;
}

/// Byte-stable serialization: object keys sorted (nlohmann objects iterate
/// in key order) and every float printed with %.12g.
inline std::string dump_stable(const json& j, int indent = 0, int level = 0) {
  std::string pad(static_cast<std::size_t>(indent * level), ' ');
  std::string pad_in(static_cast<std::size_t>(indent * (level + 1)), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  const char* sp = indent > 0 ? "" : " ";
  std::string out;
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) return "{}";
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) {
          out += ",";
          out += nl;
          out += sp;
        }
        first = false;
        out += pad_in + json(k).dump() + ": " + dump_stable(v, indent, level + 1);
      }
      out += nl;
      out += pad + "}";
      return out;
    }
    case json::value_t::array: {
      if (j.empty()) return "[]";
      out += "[";
      out += nl;
      bool first = true;
      for (const json& v : j) {
        if (!first) {
          out += ",";
          out += nl;
          out += sp;
        }
        first = false;
        out += pad_in + dump_stable(v, indent, level + 1);
      }
      out += nl;
      out += pad + "]";
      return out;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw NumericFailure("non-finite value in JSON output");
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      return buf;
    }
    default:
      return j.dump();
  }
}

}  // namespace riskenv
