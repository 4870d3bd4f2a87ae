#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "riskenv/common.hpp"
#include "riskenv/lp.hpp"
#include "riskenv/polytope.hpp"
#include "riskenv/space.hpp"

namespace riskenv {

/// Convex hull of an explicit list of densities.
struct VertexRep {
  std::vector<Density> vertices;
};

/// Linear rows added on top of the base density constraints
/// (q >= 0 and sum p_i q_i = 1, which are always implied).
struct ConstraintRep {
  Mat eq_rows;
  Vec eq_rhs;
  Mat le_rows;
  Vec le_rhs;
};

/// { Q >= 0 : E(Q) = 1, ||Q - essinf Q||_2 <= lambda } with lambda in [0,1].
/// The one non-polyhedral envelope; it is handled analytically throughout.
struct MeanDevBall {
  double lambda = 0.0;
};

/// A risk envelope: a convex set of densities over a fixed probability
/// space, in one of three representations. Envelopes are immutable values;
/// all operations on them are pure.
class Envelope {
 public:
  using Rep = std::variant<VertexRep, ConstraintRep, MeanDevBall>;

  Envelope(ProbabilitySpace space, VertexRep rep)
      : space_(std::move(space)), rep_(std::move(rep)) {
    for (const Density& v : std::get<VertexRep>(rep_).vertices)
      validate_density(space_, v);
  }

  Envelope(ProbabilitySpace space, ConstraintRep rep)
      : space_(std::move(space)), rep_(std::move(rep)) {
    const auto& c = std::get<ConstraintRep>(rep_);
    require_same_size(c.eq_rows.size(), c.eq_rhs.size(), "envelope eq rows vs rhs");
    require_same_size(c.le_rows.size(), c.le_rhs.size(), "envelope le rows vs rhs");
    for (const Vec& r : c.eq_rows)
      require_same_size(r.size(), space_.atom_count(), "envelope eq row vs space");
    for (const Vec& r : c.le_rows)
      require_same_size(r.size(), space_.atom_count(), "envelope le row vs space");
    // Feasibility is checked lazily; an infeasible system is simply empty.
  }

  Envelope(ProbabilitySpace space, MeanDevBall rep)
      : space_(std::move(space)), rep_(rep) {
    const double l = std::get<MeanDevBall>(rep_).lambda;
    require(l >= 0.0 && l <= 1.0, "mean-deviation ball needs lambda in [0,1]");
  }

  const ProbabilitySpace& space() const { return space_; }
  const Rep& rep() const { return rep_; }
  bool is_polyhedral() const { return !std::holds_alternative<MeanDevBall>(rep_); }

 private:
  ProbabilitySpace space_;
  Rep rep_;
};

struct SupportResult {
  double value = 0.0;
  Density maximizer;
};

/// The base density constraints plus the envelope's extra rows, as an LP
/// feasible region over q. The caller fills in the objective.
inline LinearProgram envelope_feasibility_lp(const ProbabilitySpace& space,
                                             const ConstraintRep& rep) {
  LinearProgram lp;
  const std::size_t n = space.atom_count();
  lp.objective.assign(n, 0.0);
  lp.eq_rows.push_back(space.probs());
  lp.eq_rhs.push_back(1.0);
  for (std::size_t r = 0; r < rep.eq_rows.size(); ++r) {
    lp.eq_rows.push_back(rep.eq_rows[r]);
    lp.eq_rhs.push_back(rep.eq_rhs[r]);
  }
  lp.le_rows = rep.le_rows;
  lp.le_rhs = rep.le_rhs;
  return lp;  // default lower bounds 0 carry q >= 0
}

/// Same feasible region with q >= 0 spelled out as explicit rows and free
/// variables, so the nonnegativity bounds take part in row-wise analyses
/// (implicit equalities, slack scans).
inline LinearProgram envelope_row_lp(const ProbabilitySpace& space,
                                     const ConstraintRep& rep) {
  LinearProgram lp = envelope_feasibility_lp(space, rep);
  const std::size_t n = space.atom_count();
  for (std::size_t i = 0; i < n; ++i) {
    Vec row(n, 0.0);
    row[i] = -1.0;
    lp.le_rows.push_back(std::move(row));
    lp.le_rhs.push_back(0.0);
  }
  lp.lower_bounds.assign(n, -kInf);
  return lp;
}

inline bool is_nonempty(const Envelope& env) {
  return std::visit(
      [&](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          return !rep.vertices.empty();
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          return is_feasible(envelope_feasibility_lp(env.space(), rep));
        } else {
          return true;  // the ball always contains Q = 1
        }
      },
      env.rep());
}

inline bool contains(const Envelope& env, const Density& q, double tol = kLpTol) {
  check_on_space(env.space(), q);
  const ProbabilitySpace& space = env.space();
  if (!is_valid_density(space, q, tol)) return false;
  return std::visit(
      [&](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          if (rep.vertices.empty()) return false;
          // Feasibility LP for convex-combination weights, with the target
          // relaxed by tol per coordinate.
          const std::size_t nv = rep.vertices.size();
          const std::size_t n = space.atom_count();
          LinearProgram lp;
          lp.objective.assign(nv, 0.0);
          Vec ones(nv, 1.0);
          lp.eq_rows.push_back(ones);
          lp.eq_rhs.push_back(1.0);
          for (std::size_t i = 0; i < n; ++i) {
            Vec row(nv);
            for (std::size_t j = 0; j < nv; ++j) row[j] = rep.vertices[j].weights[i];
            Vec neg(nv);
            for (std::size_t j = 0; j < nv; ++j) neg[j] = -row[j];
            lp.le_rows.push_back(row);
            lp.le_rhs.push_back(q.weights[i] + tol);
            lp.le_rows.push_back(std::move(neg));
            lp.le_rhs.push_back(-(q.weights[i] - tol));
          }
          return is_feasible(lp);
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          for (std::size_t r = 0; r < rep.eq_rows.size(); ++r)
            if (std::abs(dot(rep.eq_rows[r], q.weights) - rep.eq_rhs[r]) > tol)
              return false;
          for (std::size_t r = 0; r < rep.le_rows.size(); ++r)
            if (dot(rep.le_rows[r], q.weights) - rep.le_rhs[r] > tol) return false;
          return true;
        } else {
          double lo = kInf;
          for (double w : q.weights) lo = std::min(lo, w);
          Vec dev(q.weights.size());
          for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = q.weights[i] - lo;
          return l2_norm(space, dev) <= rep.lambda + tol;
        }
      },
      env.rep());
}

namespace envdetail {

inline SupportResult support_mean_dev(const ProbabilitySpace& space,
                                      const RandomVariable& x, double lambda) {
  const double mean = expectation(space, x);
  const std::size_t n = space.atom_count();
  Vec up(n);
  for (std::size_t i = 0; i < n; ++i) up[i] = std::max(x.values[i] - mean, 0.0);
  const double s = l2_norm(space, up);
  if (s == 0.0) return SupportResult{mean, unit_density(space)};  // constant X
  double up_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) up_mean += space.prob(i) * up[i];
  Density q0{Vec(n)};
  for (std::size_t i = 0; i < n; ++i)
    q0.weights[i] = 1.0 + lambda * (up[i] - up_mean) / s;
  return SupportResult{mean + lambda * s, std::move(q0)};
}

}  // namespace envdetail

/// Dual evaluation sup_{Q in env} E(XQ) together with a maximizing density.
/// The envelope, not the maximizer, is unique; any optimal vertex may come
/// back on degenerate instances.
inline SupportResult support(const Envelope& env, const RandomVariable& x) {
  const ProbabilitySpace& space = env.space();
  check_on_space(space, x);
  return std::visit(
      [&](const auto& rep) -> SupportResult {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          if (rep.vertices.empty()) throw EmptyEnvelope("support: empty vertex envelope");
          std::size_t best = 0;
          double best_val = -kInf;
          for (std::size_t j = 0; j < rep.vertices.size(); ++j) {
            const double v = expectation_under(space, x, rep.vertices[j]);
            if (v > best_val) {
              best_val = v;
              best = j;
            }
          }
          return SupportResult{best_val, rep.vertices[best]};
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          LinearProgram lp = envelope_feasibility_lp(space, rep);
          for (std::size_t i = 0; i < space.atom_count(); ++i)
            lp.objective[i] = space.prob(i) * x.values[i];
          LpResult res = maximize(lp);
          if (res.status == LpStatus::Infeasible)
            throw EmptyEnvelope("support: envelope constraint system is infeasible");
          if (res.status == LpStatus::Unbounded)
            throw NumericFailure("support: unbounded (base constraints violated?)");
          return SupportResult{res.value, Density{std::move(res.argmax)}};
        } else {
          return envdetail::support_mean_dev(space, x, rep.lambda);
        }
      },
      env.rep());
}

/// Exact halfspace form of a vertex envelope (affine-hull equalities plus
/// facets). Constraint envelopes pass through unchanged; the ball is not
/// polyhedral.
inline Envelope to_constraint_rep(const Envelope& env, const PolytopeLimits& limits = {}) {
  return std::visit(
      [&](const auto& rep) -> Envelope {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          if (rep.vertices.empty())
            throw EmptyEnvelope("to_constraint_rep: empty vertex envelope");
          std::vector<Vec> pts;
          pts.reserve(rep.vertices.size());
          for (const Density& v : rep.vertices) pts.push_back(v.weights);
          LinearSystem sys = facet_description(pts, limits);
          return Envelope(env.space(),
                          ConstraintRep{std::move(sys.eq_rows), std::move(sys.eq_rhs),
                                        std::move(sys.le_rows), std::move(sys.le_rhs)});
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          return env;
        } else {
          throw NotPolyhedral("to_constraint_rep: mean-deviation ball is not polyhedral");
        }
      },
      env.rep());
}

/// Vertex form of a polyhedral envelope, by active-set enumeration over the
/// base constraints plus the extra rows.
inline Envelope to_vertex_rep(const Envelope& env, const PolytopeLimits& limits = {}) {
  return std::visit(
      [&](const auto& rep) -> Envelope {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VertexRep>) {
          return env;
        } else if constexpr (std::is_same_v<T, ConstraintRep>) {
          const ProbabilitySpace& space = env.space();
          const std::size_t n = space.atom_count();
          LinearSystem sys;
          sys.eq_rows.push_back(space.probs());
          sys.eq_rhs.push_back(1.0);
          for (std::size_t r = 0; r < rep.eq_rows.size(); ++r) {
            sys.eq_rows.push_back(rep.eq_rows[r]);
            sys.eq_rhs.push_back(rep.eq_rhs[r]);
          }
          sys.le_rows = rep.le_rows;
          sys.le_rhs = rep.le_rhs;
          for (std::size_t i = 0; i < n; ++i) {
            Vec row(n, 0.0);
            row[i] = -1.0;
            sys.le_rows.push_back(std::move(row));
            sys.le_rhs.push_back(0.0);
          }
          std::vector<Vec> pts = enumerate_vertex_points(sys, n, kLpTol, limits);
          if (pts.empty()) throw EmptyEnvelope("to_vertex_rep: envelope is empty");
          VertexRep out;
          out.vertices.reserve(pts.size());
          for (Vec& p : pts) {
            // Clear active-set roundoff: clamp and put the mean back to 1.
            for (double& w : p) w = std::max(w, 0.0);
            const double mean = dot(space.probs(), p);
            if (mean <= 0.0) continue;
            for (double& w : p) w /= mean;
            out.vertices.push_back(Density{std::move(p)});
          }
          if (out.vertices.empty()) throw EmptyEnvelope("to_vertex_rep: envelope is empty");
          return Envelope(space, std::move(out));
        } else {
          throw NotPolyhedral("to_vertex_rep: mean-deviation ball is not polyhedral");
        }
      },
      env.rep());
}

}  // namespace riskenv
