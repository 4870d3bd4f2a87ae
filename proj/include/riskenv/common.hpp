#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskenv {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

// Tolerances, layered by provenance: base probabilities are direct user
// input (tight), densities usually come out of LP solves and carry roundoff.
inline constexpr double kProbSumTol = 1e-12;   // |sum p - 1| at construction
inline constexpr double kIngestSumTol = 1e-6;  // renormalization window at ingestion
inline constexpr double kDensityTol = 1e-9;    // density feasibility slack
inline constexpr double kLpTol = 1e-8;         // LP feasibility / optimality reporting
inline constexpr double kImplicitTol = 1e-9;   // max-slack threshold for implicit equalities
inline constexpr double kStrictTol = 1e-9;     // minimum slack counted as "strict"

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class InvalidSpec : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};
class EmptyEnvelope : public Error {
 public:
  using Error::Error;
};
class EmptyIntersection : public Error {
 public:
  using Error::Error;
};
class NotPolyhedral : public Error {
 public:
  using Error::Error;
};
class RepresentationUnsupported : public Error {
 public:
  using Error::Error;
};
class SizeLimit : public Error {
 public:
  using Error::Error;
};
class ConstantInput : public Error {
 public:
  using Error::Error;
};
class InfeasibleSystem : public Error {
 public:
  using Error::Error;
};
class NumericFailure : public Error {
 public:
  using Error::Error;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(const Vec& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

inline double norm_2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidSpec(what);
}

inline void require_same_size(std::size_t a, std::size_t b, const std::string& what) {
  if (a != b) {
    throw DimensionMismatch(what + ": size " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace riskenv
