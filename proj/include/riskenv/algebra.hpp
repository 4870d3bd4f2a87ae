#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "riskenv/common.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/measures.hpp"
#include "riskenv/space.hpp"

namespace riskenv {

struct MeasureExpr;

struct Leaf {
  MeasureSpec spec;
};

/// sum lambda_i R_i with lambda_i > 0 summing to 1; envelope is the
/// Minkowski combination of the children's envelopes.
struct ConvexCombo {
  Vec weights;
  std::vector<MeasureExpr> children;
};

/// max_i R_i; envelope is conv of the union of the children's envelopes.
struct MaxOf {
  std::vector<MeasureExpr> children;
};

/// Closed inf-convolution of the children; envelope is the intersection of
/// the children's envelopes, which must be nonempty.
struct InfConv {
  std::vector<MeasureExpr> children;
};

struct MeasureExpr {
  std::variant<Leaf, ConvexCombo, MaxOf, InfConv> node;

  static MeasureExpr leaf(MeasureSpec spec) { return MeasureExpr{Leaf{std::move(spec)}}; }
  static MeasureExpr combo(Vec weights, std::vector<MeasureExpr> children) {
    return MeasureExpr{ConvexCombo{std::move(weights), std::move(children)}};
  }
  static MeasureExpr max_of(std::vector<MeasureExpr> children) {
    return MeasureExpr{MaxOf{std::move(children)}};
  }
  static MeasureExpr inf_conv(std::vector<MeasureExpr> children) {
    return MeasureExpr{InfConv{std::move(children)}};
  }
};

inline void validate(const MeasureExpr& expr, const ProbabilitySpace& space) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Leaf>) {
          validate(node.spec, space);
        } else if constexpr (std::is_same_v<T, ConvexCombo>) {
          require(!node.children.empty(), "combo needs at least one child");
          require_same_size(node.weights.size(), node.children.size(),
                            "combo weights vs children");
          double sum = 0.0;
          for (double w : node.weights) {
            require(std::isfinite(w) && w > 0.0, "combo weights must be > 0");
            sum += w;
          }
          require(std::abs(sum - 1.0) <= kProbSumTol, "combo weights must sum to 1");
          for (const MeasureExpr& c : node.children) validate(c, space);
        } else {
          require(!node.children.empty(), "max/infconv needs at least one child");
          for (const MeasureExpr& c : node.children) validate(c, space);
        }
      },
      expr.node);
}

inline Envelope envelope_of(const MeasureExpr& expr, const ProbabilitySpace& space,
                            const PolytopeLimits& limits = {});

inline double eval(const MeasureExpr& expr, const ProbabilitySpace& space,
                   const RandomVariable& x) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Leaf>) {
          return eval_primal(node.spec, space, x);
        } else if constexpr (std::is_same_v<T, ConvexCombo>) {
          // Scalar identity; materializing the Minkowski sum is only a
          // verification path (see envelope_of).
          double s = 0.0;
          for (std::size_t i = 0; i < node.children.size(); ++i)
            s += node.weights[i] * eval(node.children[i], space, x);
          return s;
        } else if constexpr (std::is_same_v<T, MaxOf>) {
          double best = -kInf;
          for (const MeasureExpr& c : node.children)
            best = std::max(best, eval(c, space, x));
          return best;
        } else {
          return support(envelope_of(expr, space), x).value;
        }
      },
      expr.node);
}

inline Envelope envelope_of(const MeasureExpr& expr, const ProbabilitySpace& space,
                            const PolytopeLimits& limits) {
  validate(expr, space);
  return std::visit(
      [&](const auto& node) -> Envelope {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Leaf>) {
          return envelope_of(node.spec, space);
        } else if constexpr (std::is_same_v<T, ConvexCombo>) {
          // Minkowski combination: all weighted sums of child vertices.
          std::vector<VertexRep> parts;
          for (const MeasureExpr& c : node.children) {
            Envelope child_env = envelope_of(c, space, limits);
            if (!child_env.is_polyhedral())
              throw RepresentationUnsupported(
                  "combo envelope: mean-deviation ball children cannot be materialized");
            Envelope child = to_vertex_rep(child_env, limits);
            parts.push_back(std::get<VertexRep>(child.rep()));
          }
          double count = 1.0;
          for (const VertexRep& p : parts) count *= static_cast<double>(p.vertices.size());
          if (count > static_cast<double>(limits.max_combinations))
            throw SizeLimit("combo envelope: vertex product too large");
          std::vector<Density> out{Density{Vec(space.atom_count(), 0.0)}};
          for (std::size_t ci = 0; ci < parts.size(); ++ci) {
            std::vector<Density> next;
            next.reserve(out.size() * parts[ci].vertices.size());
            for (const Density& acc : out) {
              for (const Density& v : parts[ci].vertices) {
                Density d = acc;
                for (std::size_t j = 0; j < d.weights.size(); ++j)
                  d.weights[j] += node.weights[ci] * v.weights[j];
                next.push_back(std::move(d));
              }
            }
            out = std::move(next);
          }
          return Envelope(space, VertexRep{std::move(out)});
        } else if constexpr (std::is_same_v<T, MaxOf>) {
          // conv of the union: concatenated vertex lists, hull implicit.
          std::vector<Density> verts;
          for (const MeasureExpr& c : node.children) {
            Envelope child_env = envelope_of(c, space, limits);
            if (!child_env.is_polyhedral())
              throw RepresentationUnsupported(
                  "max envelope: mean-deviation ball children cannot be materialized");
            Envelope child = to_vertex_rep(child_env, limits);
            const auto& vr = std::get<VertexRep>(child.rep());
            verts.insert(verts.end(), vr.vertices.begin(), vr.vertices.end());
          }
          return Envelope(space, VertexRep{std::move(verts)});
        } else {
          // Intersection: concatenate constraint rows.
          ConstraintRep rep;
          for (const MeasureExpr& c : node.children) {
            Envelope child = envelope_of(c, space, limits);
            if (!child.is_polyhedral())
              throw RepresentationUnsupported(
                  "infconv: mean-deviation ball cannot be intersected");
            Envelope crep = to_constraint_rep(child, limits);
            const auto& cr = std::get<ConstraintRep>(crep.rep());
            rep.eq_rows.insert(rep.eq_rows.end(), cr.eq_rows.begin(), cr.eq_rows.end());
            rep.eq_rhs.insert(rep.eq_rhs.end(), cr.eq_rhs.begin(), cr.eq_rhs.end());
            rep.le_rows.insert(rep.le_rows.end(), cr.le_rows.begin(), cr.le_rows.end());
            rep.le_rhs.insert(rep.le_rhs.end(), cr.le_rhs.begin(), cr.le_rhs.end());
          }
          Envelope inter(space, std::move(rep));
          if (!is_nonempty(inter))
            throw EmptyIntersection(
                "infconv: intersection of the risk envelopes is empty");
          return inter;
        }
      },
      expr.node);
}

/// Brute-force upper bound on the two-term inf-convolution
/// inf { R_a(X1) + R_b(X - X1) } over a per-atom grid of X1 values spanning
/// [min x - span, max x + span] with span = max x - min x. The range padding
/// is heuristic coverage; the result converges to the true value from above
/// as the grid is refined.
inline double inf_convolution_oracle(const MeasureSpec& spec_a, const MeasureSpec& spec_b,
                                     const ProbabilitySpace& space, const RandomVariable& x,
                                     int grid_points_per_axis) {
  validate(spec_a, space);
  validate(spec_b, space);
  check_on_space(space, x);
  const std::size_t n = space.atom_count();
  if (n > 4) throw SizeLimit("inf_convolution_oracle: more than 4 atoms");
  require(grid_points_per_axis >= 2, "inf_convolution_oracle: need >= 2 grid points");
  const double k = static_cast<double>(grid_points_per_axis);
  if (std::pow(k, static_cast<double>(n)) > 2e6)
    throw SizeLimit("inf_convolution_oracle: grid too fine");

  const double lo0 = ess_inf(space, x), hi0 = ess_sup(space, x);
  const double span = hi0 - lo0;
  const double lo = lo0 - span, hi = hi0 + span;
  const double step = (hi - lo) / (k - 1.0);

  RandomVariable x1 = constant_variable(space, lo);
  RandomVariable x2 = x;
  std::vector<int> counter(n, 0);
  double best = kInf;
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      x1.values[i] = lo + step * counter[i];
      x2.values[i] = x.values[i] - x1.values[i];
    }
    best = std::min(best, eval_primal(spec_a, space, x1) + eval_primal(spec_b, space, x2));
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++counter[i] < grid_points_per_axis) break;
      counter[i] = 0;
    }
    if (i == n) break;
  }
  return best;
}

}  // namespace riskenv
