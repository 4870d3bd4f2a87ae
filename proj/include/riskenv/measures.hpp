#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "riskenv/common.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/space.hpp"

namespace riskenv {

struct Expectation {};

struct WorstCase {};

/// Weighted per-block worst case over a partition of the atoms.
struct Subdivide {
  std::vector<std::vector<std::size_t>> cells;
  Vec weights;
};

/// Optimized certainty equivalent with the piecewise-linear penalty
/// r(t) = gamma1 [t]_+ - gamma2 [-t]_+, 0 <= gamma2 < 1 < gamma1.
struct Oce {
  double gamma1 = 2.0;
  double gamma2 = 0.0;
};

/// Conditional value-at-risk at level alpha in [0,1); equivalent to
/// Oce{1/(1-alpha), 0}. alpha = 0 degenerates to the plain expectation.
struct Cvar {
  double alpha = 0.5;
};

/// E X + lambda ||(X - E X)_+||_2 with lambda in [0,1].
struct MeanDeviation {
  double lambda = 1.0;
};

using MeasureSpec =
    std::variant<Expectation, WorstCase, Subdivide, Oce, Cvar, MeanDeviation>;

inline void validate(const MeasureSpec& spec, const ProbabilitySpace& space) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Subdivide>) {
          require(!s.cells.empty(), "subdivide needs at least one cell");
          require_same_size(s.cells.size(), s.weights.size(), "cells vs weights");
          std::vector<char> hit(space.atom_count(), 0);
          for (const auto& cell : s.cells) {
            require(!cell.empty(), "subdivide cells must be nonempty");
            for (std::size_t i : cell) {
              require(i < space.atom_count(), "subdivide cell index out of range");
              require(!hit[i], "subdivide cells must be disjoint");
              hit[i] = 1;
            }
          }
          for (char h : hit) require(h, "subdivide cells must cover every atom");
          double sum = 0.0;
          for (double w : s.weights) {
            require(std::isfinite(w) && w > 0.0, "subdivide weights must be > 0");
            sum += w;
          }
          require(std::abs(sum - 1.0) <= kProbSumTol,
                  "subdivide weights must sum to 1");
        } else if constexpr (std::is_same_v<T, Oce>) {
          require(std::isfinite(s.gamma1) && std::isfinite(s.gamma2) &&
                      s.gamma2 >= 0.0 && s.gamma2 < 1.0 && s.gamma1 > 1.0,
                  "oce needs 0 <= gamma2 < 1 < gamma1");
        } else if constexpr (std::is_same_v<T, Cvar>) {
          require(std::isfinite(s.alpha) && s.alpha >= 0.0 && s.alpha < 1.0,
                  "cvar needs alpha in [0,1)");
        } else if constexpr (std::is_same_v<T, MeanDeviation>) {
          require(std::isfinite(s.lambda) && s.lambda >= 0.0 && s.lambda <= 1.0,
                  "mean-deviation needs lambda in [0,1]");
        }
      },
      spec);
}

namespace mdetail {

// Smallest atom value z with F(z) >= threshold. The cdf is a step function
// on the atom values, so the minimizer is always one of them.
inline double quantile_beta(const ProbabilitySpace& space, const RandomVariable& x,
                            double threshold) {
  Vec sorted = x.values;
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted)
    if (cdf(space, x, v) >= threshold) return v;
  return sorted.back();  // threshold < 1 guarantees we never get here
}

inline double oce_value_at(const ProbabilitySpace& space, const RandomVariable& x,
                           double beta, double gamma1, double gamma2) {
  double s = beta;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double d = x.values[i] - beta;
    s += space.prob(i) * (gamma1 * std::max(d, 0.0) - gamma2 * std::max(-d, 0.0));
  }
  return s;
}

}  // namespace mdetail

/// Minimizer of beta + E[gamma1 (X-beta)_+ - gamma2 (beta-X)_+], i.e. the
/// smallest z with F(z) >= (gamma1-1)/(gamma1-gamma2).
inline double oce_beta_star(const ProbabilitySpace& space, const RandomVariable& x,
                            double gamma1, double gamma2) {
  require(gamma2 >= 0.0 && gamma2 < 1.0 && gamma1 > 1.0,
          "oce_beta_star needs 0 <= gamma2 < 1 < gamma1");
  check_on_space(space, x);
  return mdetail::quantile_beta(space, x, (gamma1 - 1.0) / (gamma1 - gamma2));
}

inline double eval_primal(const MeasureSpec& spec, const ProbabilitySpace& space,
                          const RandomVariable& x) {
  validate(spec, space);
  check_on_space(space, x);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Expectation>) {
          return expectation(space, x);
        } else if constexpr (std::is_same_v<T, WorstCase>) {
          return ess_sup(space, x);
        } else if constexpr (std::is_same_v<T, Subdivide>) {
          double total = 0.0;
          for (std::size_t k = 0; k < s.cells.size(); ++k) {
            double worst = -kInf;
            for (std::size_t i : s.cells[k]) worst = std::max(worst, x.values[i]);
            total += s.weights[k] * worst;
          }
          return total;
        } else if constexpr (std::is_same_v<T, Oce>) {
          const double beta = oce_beta_star(space, x, s.gamma1, s.gamma2);
          return mdetail::oce_value_at(space, x, beta, s.gamma1, s.gamma2);
        } else if constexpr (std::is_same_v<T, Cvar>) {
          // threshold (gamma1-1)/gamma1 with gamma1 = 1/(1-alpha) is just alpha
          const double beta = mdetail::quantile_beta(space, x, s.alpha);
          return mdetail::oce_value_at(space, x, beta, 1.0 / (1.0 - s.alpha), 0.0);
        } else {
          const double mean = expectation(space, x);
          Vec up(x.values.size());
          for (std::size_t i = 0; i < up.size(); ++i)
            up[i] = std::max(x.values[i] - mean, 0.0);
          return mean + s.lambda * l2_norm(space, up);
        }
      },
      spec);
}

/// The risk envelope whose support function realizes eval_primal.
inline Envelope envelope_of(const MeasureSpec& spec, const ProbabilitySpace& space) {
  validate(spec, space);
  const std::size_t n = space.atom_count();
  return std::visit(
      [&](const auto& s) -> Envelope {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Expectation>) {
          return Envelope(space, VertexRep{{unit_density(space)}});
        } else if constexpr (std::is_same_v<T, WorstCase>) {
          return Envelope(space, ConstraintRep{});  // all of P
        } else if constexpr (std::is_same_v<T, Subdivide>) {
          // One block-mass equality per cell: sum_{i in cell_k} p_i q_i = w_k.
          ConstraintRep rep;
          for (std::size_t k = 0; k < s.cells.size(); ++k) {
            Vec row(n, 0.0);
            for (std::size_t i : s.cells[k]) row[i] = space.prob(i);
            rep.eq_rows.push_back(std::move(row));
            rep.eq_rhs.push_back(s.weights[k]);
          }
          return Envelope(space, std::move(rep));
        } else if constexpr (std::is_same_v<T, Oce>) {
          ConstraintRep rep;
          for (std::size_t i = 0; i < n; ++i) {
            Vec row(n, 0.0);
            row[i] = 1.0;
            rep.le_rows.push_back(std::move(row));
            rep.le_rhs.push_back(s.gamma1);
          }
          if (s.gamma2 > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
              Vec row(n, 0.0);
              row[i] = -1.0;
              rep.le_rows.push_back(std::move(row));
              rep.le_rhs.push_back(-s.gamma2);
            }
          }
          return Envelope(space, std::move(rep));
        } else if constexpr (std::is_same_v<T, Cvar>) {
          ConstraintRep rep;
          const double ub = 1.0 / (1.0 - s.alpha);
          for (std::size_t i = 0; i < n; ++i) {
            Vec row(n, 0.0);
            row[i] = 1.0;
            rep.le_rows.push_back(std::move(row));
            rep.le_rhs.push_back(ub);
          }
          return Envelope(space, std::move(rep));
        } else {
          return Envelope(space, MeanDevBall{s.lambda});
        }
      },
      spec);
}

/// The density attaining sup E(XQ) over the mean-deviation ball:
/// Q0 = 1 + lambda [(X - E X)_+ - E(X - E X)_+] / ||(X - E X)_+||_2.
inline Density mean_dev_maximizer(const ProbabilitySpace& space, const RandomVariable& x,
                                  double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "mean-deviation needs lambda in [0,1]");
  check_on_space(space, x);
  const double mean = expectation(space, x);
  Vec up(x.values.size());
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = std::max(x.values[i] - mean, 0.0);
  if (l2_norm(space, up) == 0.0)
    throw ConstantInput("mean_dev_maximizer: X is constant");
  return envdetail::support_mean_dev(space, x, lambda).maximizer;
}

inline std::string measure_name(const MeasureSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Expectation>) return "expectation";
        if constexpr (std::is_same_v<T, WorstCase>) return "worstcase";
        if constexpr (std::is_same_v<T, Subdivide>) return "subdivide";
        if constexpr (std::is_same_v<T, Oce>) return "oce";
        if constexpr (std::is_same_v<T, Cvar>) return "cvar";
        if constexpr (std::is_same_v<T, MeanDeviation>) return "meandev";
      },
      spec);
}

}  // namespace riskenv
