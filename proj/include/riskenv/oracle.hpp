#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "riskenv/common.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/space.hpp"

namespace riskenv {

/// Direction grid over the density cone: lattice points r in {0, 1/k, ..., 1}^n
/// rescaled so that E(Q) = 1, all-zero directions rejected. Only meant for
/// brute-force lower bounds on tiny spaces.
struct DensityGrid {
  ProbabilitySpace space;
  int resolution = 16;
};

/// Max of E(XQ) over grid densities inside the envelope: a lower bound on
/// the support value, converging as the resolution grows. Returns -inf when
/// no grid point lands inside (possible for lower-dimensional envelopes).
inline double brute_force_support(const Envelope& env, const RandomVariable& x,
                                  const DensityGrid& grid) {
  const ProbabilitySpace& space = grid.space;
  require(env.space().same_as(space), "envelope and grid on different spaces");
  check_on_space(space, x);
  const std::size_t n = space.atom_count();
  if (n > 4) throw SizeLimit("brute_force_support: more than 4 atoms");
  if (grid.resolution < 1 || grid.resolution > 64)
    throw SizeLimit("brute_force_support: resolution out of range (1..64)");

  const int k = grid.resolution;
  std::vector<int> counter(n, 0);
  Density q{Vec(n, 0.0)};
  double best = -kInf;
  while (true) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q.weights[i] = static_cast<double>(counter[i]) / static_cast<double>(k);
      mean += space.prob(i) * q.weights[i];
    }
    if (mean > 1e-12) {
      for (double& w : q.weights) w /= mean;
      if (contains(env, q, kDensityTol))
        best = std::max(best, expectation_under(space, x, q));
    }
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++counter[i] <= k) break;
      counter[i] = 0;
    }
    if (i == n) break;
  }
  return best;
}

struct AxiomCheck {
  bool pass = true;
  double worst_violation = 0.0;
};

struct AxiomReport {
  AxiomCheck constancy;       // R(C) = C
  AxiomCheck convexity;       // R((1-l)X + lY) <= (1-l)R(X) + lR(Y)
  AxiomCheck monotonicity;    // X <= Y pointwise implies R(X) <= R(Y)
  AxiomCheck homogeneity;     // R(lX) = lR(X) for l > 0
  std::optional<AxiomCheck> aversity;  // R(X) > E(X) on nonconstant samples

  bool all_pass() const {
    return constancy.pass && convexity.pass && monotonicity.pass && homogeneity.pass;
  }
};

/// Sampled verification of the coherence axioms for an arbitrary evaluator.
/// Closedness is sequence-quantified and is deliberately not tested here.
/// The aversity check is opt-in and only reports whether the sampling found
/// a violation; it can never prove aversity.
inline AxiomReport axiom_suite(const std::function<double(const RandomVariable&)>& risk,
                               const ProbabilitySpace& space, int trials,
                               std::uint64_t seed, bool include_aversity = false) {
  require(trials >= 1, "axiom_suite needs at least one trial");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uval(-10.0, 10.0);
  std::uniform_real_distribution<double> upos(0.0, 3.0);
  const std::size_t n = space.atom_count();
  const double tol = 1e-9;

  auto random_x = [&]() {
    RandomVariable x{Vec(n)};
    for (double& v : x.values) v = uval(rng);
    return x;
  };
  auto record = [&](AxiomCheck& c, double violation) {
    c.worst_violation = std::max(c.worst_violation, violation);
    if (violation > tol) c.pass = false;
  };

  AxiomReport report;
  if (include_aversity) report.aversity = AxiomCheck{};
  for (int t = 0; t < trials; ++t) {
    const double c = uval(rng);
    record(report.constancy, std::abs(risk(constant_variable(space, c)) - c));

    RandomVariable x = random_x();
    RandomVariable y = random_x();
    const double rx = risk(x), ry = risk(y);
    for (double l : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
      RandomVariable z{Vec(n)};
      for (std::size_t i = 0; i < n; ++i)
        z.values[i] = (1.0 - l) * x.values[i] + l * y.values[i];
      record(report.convexity, risk(z) - ((1.0 - l) * rx + l * ry));
    }

    RandomVariable above = x;
    for (double& v : above.values) v += upos(rng);
    record(report.monotonicity, rx - risk(above));

    for (double l : {0.5, 2.0, 10.0}) {
      RandomVariable z{Vec(n)};
      for (std::size_t i = 0; i < n; ++i) z.values[i] = l * x.values[i];
      record(report.homogeneity, std::abs(risk(z) - l * rx));
    }

    if (report.aversity) {
      double lo = kInf, hi = -kInf;
      for (double v : x.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > 1e-9) {
        // Strict inequality wanted: a gap at or below tolerance is a failure.
        const double gap = rx - expectation(space, x);
        if (gap <= tol) {
          report.aversity->pass = false;
          report.aversity->worst_violation =
              std::max(report.aversity->worst_violation, tol - gap);
        }
      }
    }
  }
  return report;
}

}  // namespace riskenv
