#pragma once

#include <array>
#include <functional>
#include <vector>

#include "inrep/errors.hpp"
#include "inrep/normal.hpp"

namespace inrep {

// ---------------------------------------------------------------------------
// Gaussian-mixture generator trained against a Wasserstein critic plus an
// auxiliary classifier: the generator's objective collapses to a closed form
// in the generator's standard deviation v.
// ---------------------------------------------------------------------------
struct AcganLandscape {
  double lambda = 0.0;  // classification-term weight, >= 0

  explicit AcganLandscape(double lambda_) : lambda(lambda_) {
    if (!(lambda >= 0.0)) throw domain_error("AcganLandscape: lambda must be >= 0");
  }
};

// |1 - v| + lambda * (Q(1) + Q(1/v)); the additive constant is fixed to 0.
double acgan_loss(const AcganLandscape& land, double v);

// Subgradient of acgan_loss. At the kink v = 1 the left value is returned so
// descent continues toward the lambda-dependent minimum.
double acgan_grad(const AcganLandscape& land, double v);

// ---------------------------------------------------------------------------
// Separable two-class data, vertically uniform at x1 = +-d, against a linear
// classifier through the origin at angle alpha. Generator parameter
// l in [-0.9, 1] controls the fake support.
// ---------------------------------------------------------------------------
struct SeparableLandscape {
  double d;
  double lambda;

  explicit SeparableLandscape(double lambda_, double d_ = default_d())
      : d(d_), lambda(lambda_) {
    if (!(d > 0.0)) throw domain_error("SeparableLandscape: d must be > 0");
    if (!(lambda >= 0.0)) throw domain_error("SeparableLandscape: lambda must be >= 0");
  }

  static double default_d() { return std::sqrt(0.99 / 12.0); }
};

// Wasserstein term: (1-l)/sqrt(3) for l >= 0, sqrt(4d^2 + (0.1-l)^2/3) for l < 0.
// Continuous at l = 0 by the choice of d.
double separable_ls(const SeparableLandscape& land, double l);

// Classification-error term: real-data error (breakpoint alpha0 = atan(1/d))
// plus fake-data error (breakpoints alpha+ = atan(l/d) for l >= 0,
// alpha- = atan((0.9-|l|)/d) for l < 0). The classifier is the oriented line
// through the origin at angle alpha, i.e. yhat = sgn(sin(a) x1 - cos(a) x2).
double separable_lc(const SeparableLandscape& land, double l, double alpha);

// L_S + lambda * L_C.
double separable_total(const SeparableLandscape& land, double l, double alpha);

// Error of the oriented linear classifier on real data alone (exposed for the
// figure emitters; separable_lc is the sum of this and the fake term).
double separable_real_error(const SeparableLandscape& land, double alpha);
double separable_fake_error(const SeparableLandscape& land, double l, double alpha);

// Analytic subgradient of separable_total. The landscape is piecewise smooth;
// at a breakpoint whose one-sided slopes bracket zero the selected subgradient
// is zero (the point is coordinate-wise stationary), otherwise the two-sided
// average is returned.
std::array<double, 2> separable_grad(const SeparableLandscape& land, double l,
                                     double alpha);

// ---------------------------------------------------------------------------
// Projection-discriminator drift: the generator sits at the exact conditional
// distribution and keeps an additive mean offset; embeddings v0, v1 and the
// offset follow the derived alternating updates.
// ---------------------------------------------------------------------------
struct ProjganState {
  std::array<double, 2> v0{0.0, 0.0};
  std::array<double, 2> v1{0.0, 0.0};
  std::array<double, 2> offset{0.0, 0.0};  // generator mean minus truth; 0 at start
  double step = 0.0;                       // learning rate alpha
  long t = 0;
  // Update order: generator before embeddings (the derived order). The
  // reverse order is exposed for exploration only.
  bool generator_first = true;
};

// One alternating update:
//   offset <- offset + alpha (v0 + v1)
//   v_y    <- v_y - alpha/2 * offset_new   (mean difference = -offset)
ProjganState projgan_step(const ProjganState& state);

// ---------------------------------------------------------------------------
// Projected gradient descent over a box, with optional angle wrapping.
// ---------------------------------------------------------------------------
struct GdTrajectory {
  std::vector<std::vector<double>> params;  // iterate per step (includes x0)
  std::vector<double> losses;               // loss at each iterate
  bool converged = true;                    // false when a non-finite loss aborted the run
  std::vector<double> final;
};

struct GdProblem {
  std::function<double(const std::vector<double>&)> loss;
  // Optional analytic gradient; when absent, central differences (h = 1e-6).
  std::function<std::vector<double>(const std::vector<double>&)> grad;
  std::vector<double> lower, upper;  // projection box, one entry per coordinate
  std::vector<bool> wrap;            // wrap into [lower, upper) instead of clamping
};

GdTrajectory gd_minimize(const GdProblem& problem, std::vector<double> x0, double lr,
                         int steps);

// Ready-made problems for the two closed-form landscapes.
GdProblem acgan_gd_problem(const AcganLandscape& land);
GdProblem separable_gd_problem(const SeparableLandscape& land);

}  // namespace inrep
