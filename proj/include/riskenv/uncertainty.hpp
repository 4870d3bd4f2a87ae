#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "riskenv/algebra.hpp"
#include "riskenv/common.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/lp.hpp"
#include "riskenv/measures.hpp"
#include "riskenv/polytope.hpp"
#include "riskenv/space.hpp"

namespace riskenv {

/// Basis random variables X_1..X_n generating the affine family
/// { a0 + sum a_i X_i }. All basis variables live on one space.
class AffineFamily {
 public:
  AffineFamily(ProbabilitySpace space, std::vector<RandomVariable> basis)
      : space_(std::move(space)), basis_(std::move(basis)) {
    require(!basis_.empty(), "affine family needs at least one basis variable");
    for (const RandomVariable& x : basis_) check_on_space(space_, x);
  }

  const ProbabilitySpace& space() const { return space_; }
  const std::vector<RandomVariable>& basis() const { return basis_; }
  std::size_t dim() const { return basis_.size(); }

  /// The member a0 + sum a_i X_i as a plain random variable.
  RandomVariable member(double a0, const Vec& a) const {
    require_same_size(a.size(), basis_.size(), "coefficients vs basis");
    RandomVariable x{Vec(space_.atom_count(), a0)};
    for (std::size_t i = 0; i < basis_.size(); ++i)
      for (std::size_t j = 0; j < x.values.size(); ++j)
        x.values[j] += a[i] * basis_[i].values[j];
    return x;
  }

 private:
  ProbabilitySpace space_;
  std::vector<RandomVariable> basis_;
};

struct UncertaintyVertices {
  std::vector<Vec> points;
};

struct UncertaintyFacets {
  Mat eq_rows;
  Vec eq_rhs;
  Mat le_rows;
  Vec le_rhs;
};

/// Convex polytope of expected-image vectors (E(X_1 Q), ..., E(X_n Q)) in
/// R^n, in vertex or facet form.
class UncertaintySet {
 public:
  using Rep = std::variant<UncertaintyVertices, UncertaintyFacets>;

  UncertaintySet(std::size_t dim, UncertaintyVertices rep)
      : dim_(dim), rep_(std::move(rep)) {
    const auto& pts = std::get<UncertaintyVertices>(rep_).points;
    require(!pts.empty(), "uncertainty set needs at least one point");
    for (const Vec& p : pts) require_same_size(p.size(), dim_, "point vs dimension");
  }

  UncertaintySet(std::size_t dim, UncertaintyFacets rep) : dim_(dim), rep_(std::move(rep)) {
    const auto& f = std::get<UncertaintyFacets>(rep_);
    require_same_size(f.eq_rows.size(), f.eq_rhs.size(), "facet eq rows vs rhs");
    require_same_size(f.le_rows.size(), f.le_rhs.size(), "facet le rows vs rhs");
    for (const Vec& r : f.eq_rows) require_same_size(r.size(), dim_, "facet row vs dim");
    for (const Vec& r : f.le_rows) require_same_size(r.size(), dim_, "facet row vs dim");
  }

  std::size_t dim() const { return dim_; }
  const Rep& rep() const { return rep_; }

 private:
  std::size_t dim_;
  Rep rep_;
};

namespace udetail {

inline LinearProgram facet_lp(const UncertaintyFacets& f, std::size_t dim) {
  LinearProgram lp;
  lp.objective.assign(dim, 0.0);
  lp.eq_rows = f.eq_rows;
  lp.eq_rhs = f.eq_rhs;
  lp.le_rows = f.le_rows;
  lp.le_rhs = f.le_rhs;
  lp.lower_bounds.assign(dim, -kInf);  // image coordinates are free
  return lp;
}

}  // namespace udetail

/// Expected image of the envelope under the family: one point per envelope
/// vertex; the convex hull of the list is the uncertainty set. Closure is
/// vacuous for finite vertex images.
inline UncertaintySet image_set(const Envelope& env, const AffineFamily& fam,
                                const PolytopeLimits& limits = {}) {
  require(env.space().same_as(fam.space()), "envelope and family on different spaces");
  if (!env.is_polyhedral())
    throw RepresentationUnsupported("image_set: mean-deviation ball is not polyhedral");
  Envelope verts = to_vertex_rep(env, limits);
  const auto& vr = std::get<VertexRep>(verts.rep());
  std::vector<Vec> points;
  points.reserve(vr.vertices.size());
  for (const Density& v : vr.vertices) {
    Vec z(fam.dim());
    for (std::size_t i = 0; i < fam.dim(); ++i)
      z[i] = expectation_under(fam.space(), fam.basis()[i], v);
    points.push_back(std::move(z));
  }
  return UncertaintySet(fam.dim(), UncertaintyVertices{std::move(points)});
}

inline UncertaintySet to_facet_form(const UncertaintySet& u, const PolytopeLimits& limits = {}) {
  if (std::holds_alternative<UncertaintyFacets>(u.rep())) return u;
  const auto& pts = std::get<UncertaintyVertices>(u.rep()).points;
  LinearSystem sys = facet_description(pts, limits);
  return UncertaintySet(u.dim(), UncertaintyFacets{std::move(sys.eq_rows), std::move(sys.eq_rhs),
                                                   std::move(sys.le_rows), std::move(sys.le_rhs)});
}

/// Vertex form of a facet-described set; assumes the set is bounded, which
/// every expected-image polytope is.
inline UncertaintySet to_vertex_form(const UncertaintySet& u, const PolytopeLimits& limits = {}) {
  if (std::holds_alternative<UncertaintyVertices>(u.rep())) return u;
  const auto& f = std::get<UncertaintyFacets>(u.rep());
  LinearSystem sys{f.eq_rows, f.eq_rhs, f.le_rows, f.le_rhs};
  std::vector<Vec> pts = enumerate_vertex_points(sys, u.dim(), kLpTol, limits);
  if (pts.empty())
    throw EmptyEnvelope("to_vertex_form: no vertices (set is empty or unbounded)");
  return UncertaintySet(u.dim(), UncertaintyVertices{std::move(pts)});
}

/// Densities whose expected-image vector lies in U: the base constraints
/// plus U's rows composed with the expectation map.
inline Envelope preimage_envelope(const UncertaintySet& u, const AffineFamily& fam,
                                  const PolytopeLimits& limits = {}) {
  require_same_size(u.dim(), fam.dim(), "uncertainty set vs family");
  UncertaintySet facets = to_facet_form(u, limits);
  const auto& f = std::get<UncertaintyFacets>(facets.rep());
  const ProbabilitySpace& space = fam.space();
  const std::size_t n = space.atom_count();

  auto compose = [&](const Vec& g) {
    // g.z <= h over z = (E(X_i Q))_i becomes a linear row over q.
    Vec row(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double coef = 0.0;
      for (std::size_t i = 0; i < fam.dim(); ++i) coef += g[i] * fam.basis()[i].values[j];
      row[j] = space.prob(j) * coef;
    }
    return row;
  };

  ConstraintRep rep;
  for (std::size_t r = 0; r < f.eq_rows.size(); ++r) {
    rep.eq_rows.push_back(compose(f.eq_rows[r]));
    rep.eq_rhs.push_back(f.eq_rhs[r]);
  }
  for (std::size_t r = 0; r < f.le_rows.size(); ++r) {
    rep.le_rows.push_back(compose(f.le_rows[r]));
    rep.le_rhs.push_back(f.le_rhs[r]);
  }
  return Envelope(space, std::move(rep));
}

/// a0 + sup_{z in U} sum a_i z_i.
inline double eval_on_affine(double a0, const Vec& a, const UncertaintySet& u) {
  require_same_size(a.size(), u.dim(), "coefficients vs uncertainty set");
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, UncertaintyVertices>) {
          double best = -kInf;
          for (const Vec& z : rep.points) best = std::max(best, dot(a, z));
          return a0 + best;
        } else {
          LinearProgram lp = udetail::facet_lp(rep, u.dim());
          lp.objective = a;
          LpResult res = maximize(lp);
          if (res.status == LpStatus::Infeasible)
            throw EmptyEnvelope("eval_on_affine: uncertainty set is empty");
          if (res.status == LpStatus::Unbounded)
            throw NumericFailure("eval_on_affine: uncertainty set is unbounded");
          return a0 + res.value;
        }
      },
      u.rep());
}

inline double support_value(const UncertaintySet& u, const Vec& direction) {
  return eval_on_affine(0.0, direction, u);
}

inline bool contains_point(const UncertaintySet& u, const Vec& z, double tol = kLpTol) {
  require_same_size(z.size(), u.dim(), "point vs uncertainty set");
  return std::visit(
      [&](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, UncertaintyVertices>) {
          const std::size_t nv = rep.points.size();
          LinearProgram lp;
          lp.objective.assign(nv, 0.0);
          lp.eq_rows.push_back(Vec(nv, 1.0));
          lp.eq_rhs.push_back(1.0);
          for (std::size_t i = 0; i < u.dim(); ++i) {
            Vec row(nv), neg(nv);
            for (std::size_t j = 0; j < nv; ++j) {
              row[j] = rep.points[j][i];
              neg[j] = -rep.points[j][i];
            }
            lp.le_rows.push_back(std::move(row));
            lp.le_rhs.push_back(z[i] + tol);
            lp.le_rows.push_back(std::move(neg));
            lp.le_rhs.push_back(-(z[i] - tol));
          }
          return is_feasible(lp);
        } else {
          for (std::size_t r = 0; r < rep.eq_rows.size(); ++r)
            if (std::abs(dot(rep.eq_rows[r], z) - rep.eq_rhs[r]) > tol) return false;
          for (std::size_t r = 0; r < rep.le_rows.size(); ++r)
            if (dot(rep.le_rows[r], z) - rep.le_rhs[r] > tol) return false;
          return true;
        }
      },
      u.rep());
}

/// The uncertainty set realizing the measure on the affine family, computed
/// as the expected image of the measure's envelope.
inline UncertaintySet canonical_uncertainty_set(const MeasureSpec& spec,
                                                const AffineFamily& fam,
                                                const PolytopeLimits& limits = {}) {
  return image_set(envelope_of(spec, fam.space()), fam, limits);
}

inline UncertaintySet canonical_uncertainty_set(const MeasureExpr& expr,
                                                const AffineFamily& fam,
                                                const PolytopeLimits& limits = {}) {
  return image_set(envelope_of(expr, fam.space(), limits), fam, limits);
}

}  // namespace riskenv
