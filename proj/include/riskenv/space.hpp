#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "riskenv/common.hpp"

namespace riskenv {

/// Finite probability space: a list of atoms with strictly positive
/// probabilities summing to one. Atoms with zero probability are rejected at
/// construction; ingestion code is expected to merge or drop them first, so
/// essential suprema coincide with plain maxima everywhere downstream.
class ProbabilitySpace {
 public:
  explicit ProbabilitySpace(Vec probs) : probs_(std::move(probs)) {
    require(!probs_.empty(), "probability space needs at least one atom");
    double sum = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p <= 0.0)
        throw InvalidSpec("atom probabilities must be finite and > 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
      throw InvalidSpec("atom probabilities must sum to 1 (within 1e-12)");
  }

  static ProbabilitySpace uniform(std::size_t atom_count) {
    require(atom_count > 0, "probability space needs at least one atom");
    return ProbabilitySpace(Vec(atom_count, 1.0 / static_cast<double>(atom_count)));
  }

  std::size_t atom_count() const { return probs_.size(); }
  double prob(std::size_t i) const { return probs_[i]; }
  const Vec& probs() const { return probs_; }

  bool same_as(const ProbabilitySpace& other, double tol = kProbSumTol) const {
    if (probs_.size() != other.probs_.size()) return false;
    for (std::size_t i = 0; i < probs_.size(); ++i)
      if (std::abs(probs_[i] - other.probs_[i]) > tol) return false;
    return true;
  }

 private:
  Vec probs_;
};

/// One real loss value per atom.
struct RandomVariable {
  Vec values;
};

/// Per-atom reweighting of the base measure: Q >= 0 with E(Q) = 1.
struct Density {
  Vec weights;
};

inline RandomVariable constant_variable(const ProbabilitySpace& space, double c) {
  return RandomVariable{Vec(space.atom_count(), c)};
}

inline Density unit_density(const ProbabilitySpace& space) {
  return Density{Vec(space.atom_count(), 1.0)};
}

inline void check_on_space(const ProbabilitySpace& space, const RandomVariable& x) {
  require_same_size(x.values.size(), space.atom_count(), "random variable vs space");
}

inline void check_on_space(const ProbabilitySpace& space, const Density& q) {
  require_same_size(q.weights.size(), space.atom_count(), "density vs space");
}

inline bool is_valid_density(const ProbabilitySpace& space, const Density& q,
                             double tol = kDensityTol) {
  if (q.weights.size() != space.atom_count()) return false;
  double mean = 0.0;
  for (std::size_t i = 0; i < q.weights.size(); ++i) {
    if (q.weights[i] < -tol) return false;
    mean += space.prob(i) * q.weights[i];
  }
  return std::abs(mean - 1.0) <= tol;
}

inline void validate_density(const ProbabilitySpace& space, const Density& q,
                             double tol = kDensityTol) {
  check_on_space(space, q);
  if (!is_valid_density(space, q, tol))
    throw InvalidSpec("density must satisfy Q >= 0 and E(Q) = 1 (within tolerance)");
}

inline double expectation(const ProbabilitySpace& space, const RandomVariable& x) {
  check_on_space(space, x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) s += space.prob(i) * x.values[i];
  return s;
}

/// Expectation of X under the reweighted measure Q dP0, i.e. E(XQ).
inline double expectation_under(const ProbabilitySpace& space, const RandomVariable& x,
                                const Density& q) {
  check_on_space(space, x);
  check_on_space(space, q);
  double s = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i)
    s += space.prob(i) * x.values[i] * q.weights[i];
  return s;
}

// All atoms carry positive probability, so the essential supremum is the max.
inline double ess_sup(const ProbabilitySpace& space, const RandomVariable& x) {
  check_on_space(space, x);
  return *std::max_element(x.values.begin(), x.values.end());
}

inline double ess_inf(const ProbabilitySpace& space, const RandomVariable& x) {
  check_on_space(space, x);
  return *std::min_element(x.values.begin(), x.values.end());
}

/// Right-continuous step function F(z) = P0(X <= z).
inline double cdf(const ProbabilitySpace& space, const RandomVariable& x, double zeta) {
  check_on_space(space, x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i)
    if (x.values[i] <= zeta) s += space.prob(i);
  return s;
}

/// L2(P0) norm sqrt(E(Y^2)).
inline double l2_norm(const ProbabilitySpace& space, const Vec& values) {
  require_same_size(values.size(), space.atom_count(), "vector vs space");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += space.prob(i) * values[i] * values[i];
  return std::sqrt(s);
}

}  // namespace riskenv
