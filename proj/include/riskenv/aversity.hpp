#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <variant>
#include <vector>

#include "riskenv/algebra.hpp"
#include "riskenv/common.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/lp.hpp"
#include "riskenv/measures.hpp"
#include "riskenv/space.hpp"

namespace riskenv {

enum class AversityVerdict { Averse, NotAverse, Inconclusive };

struct AversityReport {
  bool necessary_holds = false;   // {1} strictly contained in the envelope
  bool sufficient_holds = false;  // 1 in the relative interior (exact on finite spaces)
  AversityVerdict verdict = AversityVerdict::Inconclusive;
  std::optional<RandomVariable> counterexample;  // nonconstant X with R(X) <= E(X)
};

namespace avdetail {

// A row is trivial when its normal is a multiple of the atom probabilities:
// such a functional is constant on the whole base density set, so it says
// nothing about the relative geometry of the envelope inside it.
inline bool row_parallel_to_probs(const Vec& a, const Vec& p, double* scale_out = nullptr) {
  const double c = dot(a, p) / dot(p, p);
  const double scale = std::max(1.0, norm_inf(a));
  if (scale_out) *scale_out = c;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - c * p[i]) > 1e-9 * scale) return false;
  return true;
}

inline bool trivial_row(const Vec& a, double b, const Vec& p) {
  double c = 0.0;
  if (!row_parallel_to_probs(a, p, &c)) return false;
  return std::abs(b - c) <= 1e-9 * std::max(1.0, std::abs(b));
}

inline bool nonconstant(const RandomVariable& x) {
  double lo = kInf, hi = -kInf;
  for (double v : x.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo > 1e-9;
}

}  // namespace avdetail

/// Necessary condition for aversity: the unit density lies in the envelope
/// and the envelope is strictly larger than {1}.
inline bool check_necessary(const Envelope& env) {
  const ProbabilitySpace& space = env.space();
  const Density one = unit_density(space);
  if (!contains(env, one, kDensityTol)) return false;
  return std::visit(
      [&](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          for (const Density& v : rep.vertices)
            for (std::size_t i = 0; i < v.weights.size(); ++i)
              if (std::abs(v.weights[i] - 1.0) > 1e-9) return true;
          return false;
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          // Probe each coordinate's range over the envelope.
          LinearProgram lp = envelope_feasibility_lp(space, rep);
          for (std::size_t i = 0; i < space.atom_count(); ++i) {
            for (double sign : {1.0, -1.0}) {
              lp.objective.assign(space.atom_count(), 0.0);
              lp.objective[i] = sign;
              LpResult res = maximize(lp);
              if (res.status == LpStatus::Infeasible)
                throw EmptyEnvelope("check_necessary: envelope is empty");
              if (res.status == LpStatus::Unbounded) return true;
              if (sign * res.value - 1.0 > 1e-9) return true;
            }
          }
          return false;
        } else {
          return rep.lambda > 0.0;
        }
      },
      env.rep());
}

/// Whether the unit density is a relative interior point of the envelope,
/// relative to the base density set. For a polyhedral envelope this holds
/// exactly when (a) every extra equality (explicit or implicit among the
/// inequality rows) is trivial on the base set, and (b) every remaining
/// inequality is strictly slack at Q = 1. Exact on finite spaces.
inline bool check_relative_interior(const Envelope& env, const PolytopeLimits& limits = {}) {
  const ProbabilitySpace& space = env.space();
  const Density one = unit_density(space);
  if (std::holds_alternative<MeanDevBall>(env.rep()))
    return std::get<MeanDevBall>(env.rep()).lambda > 0.0;
  Envelope crep_env =
      std::holds_alternative<VertexRep>(env.rep()) ? to_constraint_rep(env, limits) : env;
  const auto& rep = std::get<ConstraintRep>(crep_env.rep());
  if (!contains(crep_env, one, kDensityTol)) return false;

  for (std::size_t r = 0; r < rep.eq_rows.size(); ++r)
    if (!avdetail::trivial_row(rep.eq_rows[r], rep.eq_rhs[r], space.probs()))
      return false;

  // Inequality scan includes the base bounds q_i >= 0 as rows.
  LinearProgram lp = envelope_row_lp(space, rep);
  std::vector<std::size_t> implicit = implicit_equalities(lp);
  std::vector<char> is_implicit(lp.le_rows.size(), 0);
  for (std::size_t r : implicit) is_implicit[r] = 1;
  for (std::size_t r = 0; r < lp.le_rows.size(); ++r) {
    const double slack = lp.le_rhs[r] - dot(lp.le_rows[r], one.weights);
    if (is_implicit[r]) {
      if (!avdetail::trivial_row(lp.le_rows[r], lp.le_rhs[r], space.probs())) return false;
    } else if (slack < kStrictTol) {
      return false;
    }
  }
  return true;
}

/// Search for a nonconstant X with R(X) <= E(X) + 1e-9, where R is the
/// support function of the envelope. Structured candidates come first:
/// directions along which the envelope is flat through 1 (equality rows and
/// implicit inequalities of the constraint form), then seeded Gaussian
/// probes. Finding nothing proves nothing.
inline std::optional<RandomVariable> falsify_aversity(const Envelope& env, int trials,
                                                      std::uint64_t seed,
                                                      const PolytopeLimits& limits = {}) {
  const ProbabilitySpace& space = env.space();
  const std::size_t n = space.atom_count();
  std::vector<RandomVariable> candidates;

  auto push_direction = [&](const Vec& a) {
    if (avdetail::row_parallel_to_probs(a, space.probs())) return;
    RandomVariable x{Vec(n)};
    for (std::size_t i = 0; i < n; ++i) x.values[i] = a[i] / space.prob(i);
    candidates.push_back(x);
    for (double& v : x.values) v = -v;
    candidates.push_back(std::move(x));
  };

  if (env.is_polyhedral()) {
    try {
      Envelope crep_env = std::holds_alternative<VertexRep>(env.rep())
                              ? to_constraint_rep(env, limits)
                              : env;
      const auto& rep = std::get<ConstraintRep>(crep_env.rep());
      for (const Vec& a : rep.eq_rows) push_direction(a);
      LinearProgram lp = envelope_row_lp(space, rep);
      for (std::size_t r : implicit_equalities(lp)) push_direction(lp.le_rows[r]);
    } catch (const SizeLimit&) {
      // fall through to random probing
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double ex_tol = 1e-9;
  auto is_counterexample = [&](const RandomVariable& x) {
    return avdetail::nonconstant(x) &&
           support(env, x).value <= expectation(space, x) + ex_tol;
  };

  for (const RandomVariable& x : candidates)
    if (is_counterexample(x)) return x;
  for (int t = 0; t < trials; ++t) {
    RandomVariable x{Vec(n)};
    for (double& v : x.values) v = gauss(rng);
    if (is_counterexample(x)) return x;
    for (double& v : x.values) v = -v;
    if (is_counterexample(x)) return x;
  }
  return std::nullopt;
}

/// Exact aversity decision for a finite space via the relative-interior
/// test, with a counterexample attached when the measure is not averse and
/// the search finds one.
inline AversityReport is_averse_finite(const Envelope& env, int trials = 2000,
                                       std::uint64_t seed = 42,
                                       const PolytopeLimits& limits = {}) {
  if (!is_nonempty(env)) throw EmptyEnvelope("is_averse_finite: envelope is empty");
  AversityReport report;
  report.necessary_holds = check_necessary(env);
  report.sufficient_holds = check_relative_interior(env, limits);
  report.verdict =
      report.sufficient_holds ? AversityVerdict::Averse : AversityVerdict::NotAverse;
  if (report.verdict == AversityVerdict::NotAverse)
    report.counterexample = falsify_aversity(env, trials, seed, limits);
  return report;
}

inline std::optional<RandomVariable> falsify_aversity(const MeasureSpec& spec,
                                                      const ProbabilitySpace& space,
                                                      int trials, std::uint64_t seed) {
  validate(spec, space);
  // Structured witnesses for the subdivided-future measure: block-constant
  // variables, including the classic increasing block labelling.
  if (const auto* sub = std::get_if<Subdivide>(&spec)) {
    std::vector<RandomVariable> structured;
    RandomVariable labels{Vec(space.atom_count(), 0.0)};
    RandomVariable separating{Vec(space.atom_count(), 0.0)};
    for (std::size_t k = 0; k < sub->cells.size(); ++k) {
      double block_prob = 0.0;
      for (std::size_t i : sub->cells[k]) block_prob += space.prob(i);
      for (std::size_t i : sub->cells[k]) {
        labels.values[i] = static_cast<double>(k + 1);
        separating.values[i] = block_prob - sub->weights[k];
      }
    }
    structured.push_back(std::move(labels));
    structured.push_back(std::move(separating));
    for (const RandomVariable& x : structured) {
      if (avdetail::nonconstant(x) &&
          eval_primal(spec, space, x) <= expectation(space, x) + 1e-9)
        return x;
    }
  }
  return falsify_aversity(envelope_of(spec, space), trials, seed);
}

inline AversityReport is_averse_finite(const MeasureSpec& spec,
                                       const ProbabilitySpace& space, int trials = 2000,
                                       std::uint64_t seed = 42,
                                       const PolytopeLimits& limits = {}) {
  Envelope env = envelope_of(spec, space);
  AversityReport report;
  report.necessary_holds = check_necessary(env);
  report.sufficient_holds = check_relative_interior(env, limits);
  report.verdict =
      report.sufficient_holds ? AversityVerdict::Averse : AversityVerdict::NotAverse;
  if (report.verdict == AversityVerdict::NotAverse)
    report.counterexample = falsify_aversity(spec, space, trials, seed);
  return report;
}

inline AversityReport is_averse_finite(const MeasureExpr& expr,
                                       const ProbabilitySpace& space, int trials = 2000,
                                       std::uint64_t seed = 42,
                                       const PolytopeLimits& limits = {}) {
  return is_averse_finite(envelope_of(expr, space, limits), trials, seed, limits);
}

}  // namespace riskenv
