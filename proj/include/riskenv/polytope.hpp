#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "riskenv/common.hpp"

namespace riskenv {

/// Hard limits for the small-dimension hull / vertex machinery. Facet and
/// vertex enumeration are combinatorial; anything past these limits throws
/// SizeLimit rather than grinding.
struct PolytopeLimits {
  std::size_t max_points = 64;
  std::size_t max_dim = 8;
  std::size_t max_combinations = 2'000'000;
};

/// Linear description of a polyhedron: A_eq x = b_eq and A_le x <= b_le.
struct LinearSystem {
  Mat eq_rows;
  Vec eq_rhs;
  Mat le_rows;
  Vec le_rhs;
};

namespace geo {

inline std::optional<Vec> solve_square(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-11) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Modified Gram-Schmidt; vectors below tolerance (relative to their own
// magnitude) are dropped. `basis` is extended in place.
inline void orthonormal_append(std::vector<Vec>& basis, const Vec& v, double tol = 1e-9) {
  Vec w = v;
  for (const Vec& u : basis) {
    const double c = dot(u, w);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * u[i];
  }
  const double n2 = norm_2(w);
  if (n2 <= tol * std::max(1.0, norm_2(v))) return;
  for (double& x : w) x /= n2;
  basis.push_back(std::move(w));
}

inline std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vs, double tol = 1e-9) {
  std::vector<Vec> basis;
  for (const Vec& v : vs) orthonormal_append(basis, v, tol);
  return basis;
}

inline std::vector<Vec> orthonormal_complement(std::vector<Vec> basis, std::size_t dim,
                                               double tol = 1e-9) {
  const std::size_t have = basis.size();
  for (std::size_t i = 0; i < dim && basis.size() < dim; ++i) {
    Vec e(dim, 0.0);
    e[i] = 1.0;
    orthonormal_append(basis, e, tol);
  }
  return std::vector<Vec>(basis.begin() + static_cast<std::ptrdiff_t>(have), basis.end());
}

template <typename F>
inline void for_each_combination(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (idx[i] != i + n - k) {
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        break;
      }
      if (i == 0) return;
    }
    if (k == 0) return;
  }
}

inline double binomial_capped(std::size_t n, std::size_t k, double cap) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (r > cap) return cap + 1.0;
  }
  return r;
}

inline std::vector<Vec> dedupe_points(const std::vector<Vec>& pts, double tol = 1e-9) {
  std::vector<Vec> out;
  for (const Vec& p : pts) {
    bool dup = false;
    for (const Vec& q : out) {
      double d = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - q[i]));
      if (d <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

}  // namespace geo

struct AffineHull {
  Vec origin;
  std::vector<Vec> directions;  // orthonormal basis of span(points - origin)
  std::vector<Vec> normals;     // orthonormal basis of the complement
};

inline AffineHull affine_hull_of(const std::vector<Vec>& points, double tol = 1e-9) {
  require(!points.empty(), "affine hull of an empty point set");
  AffineHull hull;
  hull.origin = points[0];
  std::vector<Vec> diffs;
  diffs.reserve(points.size());
  for (std::size_t i = 1; i < points.size(); ++i) {
    Vec d(points[i].size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = points[i][j] - hull.origin[j];
    diffs.push_back(std::move(d));
  }
  hull.directions = geo::orthonormal_basis(diffs, tol);
  hull.normals = geo::orthonormal_complement(hull.directions, hull.origin.size(), tol);
  return hull;
}

/// Exact halfspace description of conv(points): affine-hull equalities plus
/// one inequality per facet, found by brute force over point subsets of size
/// equal to the hull dimension. Intended for desk-scale inputs only.
inline LinearSystem facet_description(const std::vector<Vec>& raw_points,
                                      const PolytopeLimits& limits = {}) {
  std::vector<Vec> points = geo::dedupe_points(raw_points);
  require(!points.empty(), "facet description of an empty point set");
  const std::size_t n = points[0].size();
  if (points.size() > limits.max_points)
    throw SizeLimit("facet_description: too many points");
  if (n > limits.max_dim) throw SizeLimit("facet_description: dimension too large");

  AffineHull hull = affine_hull_of(points);
  LinearSystem sys;
  for (const Vec& u : hull.normals) {
    sys.eq_rows.push_back(u);
    sys.eq_rhs.push_back(dot(u, hull.origin));
  }
  const std::size_t d = hull.directions.size();
  if (d == 0) return sys;  // single point: equalities pin everything

  // Coordinates of each point in the hull basis.
  std::vector<Vec> coords(points.size(), Vec(d, 0.0));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) {
      double c = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        c += hull.directions[k][j] * (points[i][j] - hull.origin[j]);
      coords[i][k] = c;
    }

  if (geo::binomial_capped(points.size(), d, static_cast<double>(limits.max_combinations)) >
      static_cast<double>(limits.max_combinations))
    throw SizeLimit("facet_description: too many candidate facets");

  std::set<std::string> seen;
  geo::for_each_combination(points.size(), d, [&](const std::vector<std::size_t>& idx) {
    // Normal of the hyperplane through the d chosen points: the complement
    // of the span of their pairwise differences.
    std::vector<Vec> span;
    for (std::size_t i = 1; i < d; ++i) {
      Vec diff(d);
      for (std::size_t k = 0; k < d; ++k)
        diff[k] = coords[idx[i]][k] - coords[idx[0]][k];
      span.push_back(std::move(diff));
    }
    std::vector<Vec> base = geo::orthonormal_basis(span);
    if (base.size() != d - 1) return;  // affinely dependent subset
    std::vector<Vec> normal = geo::orthonormal_complement(std::move(base), d);
    if (normal.size() != 1) return;
    Vec g = normal[0];
    double h = dot(g, coords[idx[0]]);
    double lo = kInf, hi = -kInf;
    for (const Vec& t : coords) {
      const double v = dot(g, t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double tol = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    bool facet_le = hi <= h + tol;
    bool facet_ge = lo >= h - tol;
    if (!facet_le && !facet_ge) return;
    if (facet_ge && !facet_le) {
      for (double& v : g) v = -v;
      h = -h;
    }
    char key[512];
    int off = 0;
    for (std::size_t k = 0; k < d; ++k)
      off += std::snprintf(key + off, sizeof(key) - static_cast<std::size_t>(off),
                           "%.7f,", g[k]);
    std::snprintf(key + off, sizeof(key) - static_cast<std::size_t>(off), "|%.7f", h);
    if (!seen.insert(key).second) return;

    // Lift the facet back to ambient coordinates.
    Vec a(n, 0.0);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < n; ++j) a[j] += g[k] * hull.directions[k][j];
    sys.le_rows.push_back(a);
    sys.le_rhs.push_back(h + dot(a, hull.origin));
  });
  return sys;
}

/// All vertices of the polyhedron described by `sys` (bounds included as
/// inequality rows by the caller), by brute force over active sets: every
/// subset of inequalities completing the equality rows to full rank is
/// solved and kept when feasible. Independent of the simplex solver.
inline std::vector<Vec> enumerate_vertex_points(const LinearSystem& sys, std::size_t nvars,
                                                double feas_tol = 1e-8,
                                                const PolytopeLimits& limits = {}) {
  // Row-reduce the equality system to an independent subset.
  std::vector<std::size_t> eq_keep;
  {
    std::vector<Vec> basis;
    for (std::size_t r = 0; r < sys.eq_rows.size(); ++r) {
      const std::size_t before = basis.size();
      geo::orthonormal_append(basis, sys.eq_rows[r]);
      if (basis.size() > before) eq_keep.push_back(r);
    }
  }
  const std::size_t rank_eq = eq_keep.size();
  if (rank_eq > nvars) return {};
  const std::size_t k = nvars - rank_eq;
  if (geo::binomial_capped(sys.le_rows.size(), k,
                           static_cast<double>(limits.max_combinations)) >
      static_cast<double>(limits.max_combinations))
    throw SizeLimit("enumerate_vertex_points: too many active-set candidates");

  auto feasible = [&](const Vec& x) {
    for (std::size_t r = 0; r < sys.eq_rows.size(); ++r)
      if (std::abs(dot(sys.eq_rows[r], x) - sys.eq_rhs[r]) > feas_tol) return false;
    for (std::size_t r = 0; r < sys.le_rows.size(); ++r)
      if (dot(sys.le_rows[r], x) - sys.le_rhs[r] > feas_tol) return false;
    return true;
  };

  std::vector<Vec> verts;
  auto try_active_set = [&](const std::vector<std::size_t>& idx) {
    Mat a;
    Vec b;
    a.reserve(nvars);
    for (std::size_t r : eq_keep) {
      a.push_back(sys.eq_rows[r]);
      b.push_back(sys.eq_rhs[r]);
    }
    for (std::size_t r : idx) {
      a.push_back(sys.le_rows[r]);
      b.push_back(sys.le_rhs[r]);
    }
    std::optional<Vec> x = geo::solve_square(std::move(a), std::move(b));
    if (!x || !feasible(*x)) return;
    verts.push_back(std::move(*x));
  };
  if (k == 0) {
    try_active_set({});
  } else {
    geo::for_each_combination(sys.le_rows.size(), k, try_active_set);
  }
  return geo::dedupe_points(verts, 1e-7);
}

}  // namespace riskenv
