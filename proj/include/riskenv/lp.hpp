#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "riskenv/common.hpp"

namespace riskenv {

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Dense LP in the form
///   maximize c.x   s.t.  A_eq x = b_eq,  A_le x <= b_le,  x >= lower_bounds.
/// An empty lower_bounds vector means all-zero bounds; a bound of -infinity
/// marks the variable as free.
struct LinearProgram {
  Vec objective;
  Mat eq_rows;
  Vec eq_rhs;
  Mat le_rows;
  Vec le_rhs;
  Vec lower_bounds;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;  // meaningful iff status == Optimal
  Vec argmax;          // meaningful iff status == Optimal
};

namespace lpdetail {

inline constexpr double kPivotTol = 1e-9;
inline constexpr double kPhase1Tol = 1e-8;
inline constexpr std::size_t kMaxIter = 20000;

inline void validate(const LinearProgram& lp) {
  const std::size_t n = lp.objective.size();
  require(n > 0, "LP needs at least one variable");
  require_same_size(lp.eq_rows.size(), lp.eq_rhs.size(), "eq rows vs rhs");
  require_same_size(lp.le_rows.size(), lp.le_rhs.size(), "le rows vs rhs");
  for (const Vec& r : lp.eq_rows) require_same_size(r.size(), n, "eq row vs objective");
  for (const Vec& r : lp.le_rows) require_same_size(r.size(), n, "le row vs objective");
  if (!lp.lower_bounds.empty())
    require_same_size(lp.lower_bounds.size(), n, "lower bounds vs objective");
}

// Tableau over nonnegative columns: original variables shifted by their
// finite lower bound or split into a positive/negative pair when free,
// followed by one slack column per inequality row, then artificials.
struct Model {
  Mat rows;                // m x n_total
  Vec rhs;                 // m, kept >= 0
  std::vector<int> basis;  // column basic in each row
  std::size_t n_struct = 0;
  std::size_t n_total = 0;
  Vec cost;  // phase-2 cost per structural column
  // mapping back to original variables
  std::size_t n_orig = 0;
  std::vector<int> pos_col, neg_col;
  Vec shift;
};

inline Model build(const LinearProgram& lp) {
  validate(lp);
  Model m;
  m.n_orig = lp.objective.size();
  Vec lb = lp.lower_bounds.empty() ? Vec(m.n_orig, 0.0) : lp.lower_bounds;

  m.pos_col.assign(m.n_orig, -1);
  m.neg_col.assign(m.n_orig, -1);
  m.shift.assign(m.n_orig, 0.0);
  std::size_t col = 0;
  for (std::size_t j = 0; j < m.n_orig; ++j) {
    m.pos_col[j] = static_cast<int>(col++);
    if (lb[j] == -kInf) {
      m.neg_col[j] = static_cast<int>(col++);
    } else {
      require(std::isfinite(lb[j]), "lower bound must be finite or -inf");
      m.shift[j] = lb[j];
    }
  }
  const std::size_t n_le = lp.le_rows.size();
  const std::size_t n_eq = lp.eq_rows.size();
  const std::size_t var_cols = col;
  m.n_struct = var_cols + n_le;

  const std::size_t nrows = n_eq + n_le;
  m.rows.assign(nrows, Vec(m.n_struct, 0.0));
  m.rhs.assign(nrows, 0.0);
  m.basis.assign(nrows, -1);

  auto fill_row = [&](std::size_t r, const Vec& a, double b) {
    double adj = b;
    for (std::size_t j = 0; j < m.n_orig; ++j) {
      m.rows[r][static_cast<std::size_t>(m.pos_col[j])] = a[j];
      if (m.neg_col[j] >= 0) m.rows[r][static_cast<std::size_t>(m.neg_col[j])] = -a[j];
      adj -= a[j] * m.shift[j];
    }
    m.rhs[r] = adj;
  };
  for (std::size_t r = 0; r < n_eq; ++r) fill_row(r, lp.eq_rows[r], lp.eq_rhs[r]);
  for (std::size_t r = 0; r < n_le; ++r) {
    fill_row(n_eq + r, lp.le_rows[r], lp.le_rhs[r]);
    m.rows[n_eq + r][var_cols + r] = 1.0;  // slack
  }
  for (std::size_t r = 0; r < nrows; ++r) {
    if (m.rhs[r] < 0.0) {
      for (double& v : m.rows[r]) v = -v;
      m.rhs[r] = -m.rhs[r];
    }
  }
  // Initial basis: unflipped slack columns; artificial everywhere else.
  m.n_total = m.n_struct;
  for (std::size_t r = 0; r < nrows; ++r) {
    if (r >= n_eq) {
      std::size_t s = var_cols + (r - n_eq);
      if (m.rows[r][s] > 0.5) {
        m.basis[r] = static_cast<int>(s);
        continue;
      }
    }
    for (auto& row : m.rows) row.push_back(0.0);
    m.rows[r][m.n_total] = 1.0;
    m.basis[r] = static_cast<int>(m.n_total);
    ++m.n_total;
  }

  m.cost.assign(m.n_struct, 0.0);
  for (std::size_t j = 0; j < m.n_orig; ++j) {
    m.cost[static_cast<std::size_t>(m.pos_col[j])] = lp.objective[j];
    if (m.neg_col[j] >= 0)
      m.cost[static_cast<std::size_t>(m.neg_col[j])] = -lp.objective[j];
  }
  return m;
}

inline void pivot(Model& m, std::size_t r, std::size_t c) {
  const double piv = m.rows[r][c];
  for (double& v : m.rows[r]) v /= piv;
  m.rhs[r] /= piv;
  m.rows[r][c] = 1.0;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (i == r) continue;
    const double f = m.rows[i][c];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < m.rows[i].size(); ++j)
      m.rows[i][j] -= f * m.rows[r][j];
    m.rows[i][c] = 0.0;
    m.rhs[i] -= f * m.rhs[r];
    if (m.rhs[i] < 0.0 && m.rhs[i] > -kPivotTol) m.rhs[i] = 0.0;
  }
  m.basis[r] = static_cast<int>(c);
}

enum class CoreStatus { Optimal, Unbounded };

// Bland's rule throughout: smallest improving column enters, ratio ties are
// broken by the smallest basic column index, so cycling cannot occur.
// Reduced costs are recomputed from scratch each iteration; the instances
// here are small enough that robustness wins over speed.
inline CoreStatus run(Model& m, const Vec& cost, bool allow_artificial) {
  const std::size_t nrows = m.rows.size();
  std::vector<char> is_basic(m.n_total, 0);
  for (std::size_t it = 0; it < kMaxIter; ++it) {
    std::fill(is_basic.begin(), is_basic.end(), 0);
    for (std::size_t i = 0; i < nrows; ++i) is_basic[static_cast<std::size_t>(m.basis[i])] = 1;

    std::size_t entering = m.n_total;
    for (std::size_t j = 0; j < m.n_total; ++j) {
      if (is_basic[j]) continue;
      if (!allow_artificial && j >= m.n_struct) continue;
      double red = -cost[j];
      for (std::size_t i = 0; i < nrows; ++i)
        red += cost[static_cast<std::size_t>(m.basis[i])] * m.rows[i][j];
      if (red < -kPivotTol) {
        entering = j;
        break;
      }
    }
    if (entering == m.n_total) return CoreStatus::Optimal;

    std::size_t leaving = nrows;
    double best = kInf;
    for (std::size_t i = 0; i < nrows; ++i) {
      const double a = m.rows[i][entering];
      if (a <= kPivotTol) continue;
      const double t = m.rhs[i] / a;
      if (t < best - 1e-12 ||
          (t <= best + 1e-12 && (leaving == nrows || m.basis[i] < m.basis[leaving]))) {
        best = t;
        leaving = i;
      }
    }
    if (leaving == nrows) return CoreStatus::Unbounded;
    pivot(m, leaving, entering);
  }
  throw NumericFailure("simplex: iteration limit exceeded (anti-cycling guard)");
}

// Phase-1 objective: maximize -(sum of artificials).
inline double phase1(Model& m) {
  if (m.n_total == m.n_struct) return 0.0;  // all-slack basis, already feasible
  Vec cost(m.n_total, 0.0);
  for (std::size_t j = m.n_struct; j < m.n_total; ++j) cost[j] = -1.0;
  CoreStatus st = run(m, cost, true);
  if (st == CoreStatus::Unbounded)
    throw NumericFailure("simplex: phase 1 reported unbounded");
  double art_sum = 0.0;
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    if (m.basis[i] >= static_cast<int>(m.n_struct)) art_sum += m.rhs[i];
  return art_sum;
}

// Pivot artificials out of the basis; redundant rows are dropped.
inline void drop_artificials(Model& m) {
  for (std::size_t i = 0; i < m.rows.size();) {
    if (m.basis[i] < static_cast<int>(m.n_struct)) {
      ++i;
      continue;
    }
    std::size_t j = 0;
    for (; j < m.n_struct; ++j)
      if (std::abs(m.rows[i][j]) > kPivotTol) break;
    if (j < m.n_struct) {
      pivot(m, i, j);
      if (m.rhs[i] < 0.0) m.rhs[i] = 0.0;
      ++i;
    } else {
      m.rows.erase(m.rows.begin() + static_cast<std::ptrdiff_t>(i));
      m.rhs.erase(m.rhs.begin() + static_cast<std::ptrdiff_t>(i));
      m.basis.erase(m.basis.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
}

inline Vec extract(const Model& m) {
  Vec col_val(m.n_total, 0.0);
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    col_val[static_cast<std::size_t>(m.basis[i])] = m.rhs[i];
  Vec x(m.n_orig, 0.0);
  for (std::size_t j = 0; j < m.n_orig; ++j) {
    double v = col_val[static_cast<std::size_t>(m.pos_col[j])];
    if (m.neg_col[j] >= 0) v -= col_val[static_cast<std::size_t>(m.neg_col[j])];
    x[j] = v + m.shift[j];
  }
  return x;
}

}  // namespace lpdetail

inline LpResult maximize(const LinearProgram& lp) {
  lpdetail::Model m = lpdetail::build(lp);
  if (lpdetail::phase1(m) > lpdetail::kPhase1Tol) return LpResult{LpStatus::Infeasible, 0.0, {}};
  lpdetail::drop_artificials(m);
  Vec cost(m.n_total, 0.0);
  std::copy(m.cost.begin(), m.cost.end(), cost.begin());
  if (lpdetail::run(m, cost, false) == lpdetail::CoreStatus::Unbounded)
    return LpResult{LpStatus::Unbounded, 0.0, {}};
  Vec x = lpdetail::extract(m);
  return LpResult{LpStatus::Optimal, dot(lp.objective, x), std::move(x)};
}

/// Phase-1 feasibility of the constraint system; the objective is ignored.
inline bool is_feasible(const LinearProgram& lp) {
  lpdetail::Model m = lpdetail::build(lp);
  return lpdetail::phase1(m) <= lpdetail::kPhase1Tol;
}

/// Indices of inequality rows that hold with equality at every feasible
/// point, detected by maximizing each row's slack over the feasible set.
inline std::vector<std::size_t> implicit_equalities(const LinearProgram& lp) {
  if (!is_feasible(lp)) throw InfeasibleSystem("implicit_equalities: system is infeasible");
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < lp.le_rows.size(); ++r) {
    LinearProgram probe = lp;
    probe.objective.assign(lp.objective.size(), 0.0);
    for (std::size_t j = 0; j < probe.objective.size(); ++j)
      probe.objective[j] = -lp.le_rows[r][j];
    LpResult res = maximize(probe);
    if (res.status == LpStatus::Unbounded) continue;  // slack unbounded above
    if (res.status != LpStatus::Optimal)
      throw NumericFailure("implicit_equalities: probe solve failed");
    if (lp.le_rhs[r] + res.value <= kImplicitTol) out.push_back(r);
  }
  return out;
}

}  // namespace riskenv
