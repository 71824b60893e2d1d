#pragma once

#include <cmath>

#include "inrep/errors.hpp"

namespace inrep {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Standard normal density.
inline double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

// Upper tail of the standard normal, Q(t) = P(Z > t).
// Computed through erfc; accurate to ~1e-14 in relative terms away from 1.
inline double q_function(double t) {
  if (!std::isfinite(t)) throw domain_error("q_function: non-finite input");
  return 0.5 * std::erfc(t * kInvSqrt2);
}

// CDF of the standard normal.
inline double normal_cdf(double t) {
  if (!std::isfinite(t)) throw domain_error("normal_cdf: non-finite input");
  return 0.5 * std::erfc(-t * kInvSqrt2);
}

}  // namespace inrep
