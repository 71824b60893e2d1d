#include "inrep/landscape.hpp"

#include <algorithm>
#include <cmath>

namespace inrep {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

// P[misclassified] for one class of a vertically-uniform band of half-width s
// centered at x1 = c*d (c = +1 real/fake-aligned, -1 mirrored), against the
// oriented line at angle alpha. Collapses to the appendix case tables; s = 0
// (point mass) is handled by the clipped limit.
double band_error(double d, double s, double alpha, bool mirrored) {
  const double sn = std::sin(alpha);
  const double cs = std::cos(alpha);
  // Class y = +1 sits at x1 = +-d with x2 ~ Unif[-s, s]; error probability is
  // the mass on the wrong side of sn*x1 - cs*x2 = 0. By symmetry both classes
  // contribute the same value.
  const double x1 = mirrored ? -d : d;
  // Wrong side for y=+1: sn*x1 - cs*x2 < 0  <=>  cs*x2 > sn*x1.
  if (std::abs(cs) < 1e-300) return sn * x1 > 0.0 ? 0.0 : (sn * x1 < 0.0 ? 1.0 : 0.5);
  const double boundary = sn * x1 / cs;  // error: x2 > boundary (cs > 0) or x2 < boundary
  double frac;
  if (s <= 0.0) {
    // Point mass at x2 = 0.
    if (boundary == 0.0) return 0.5;
    frac = boundary > 0.0 ? 0.0 : 1.0;
    if (cs < 0.0) frac = 1.0 - frac;
    return frac;
  }
  if (cs > 0.0)
    frac = (s - boundary) / (2.0 * s);
  else
    frac = (boundary + s) / (2.0 * s);
  return std::clamp(frac, 0.0, 1.0);
}

}  // namespace

double acgan_loss(const AcganLandscape& land, double v) {
  if (!(v > 0.0)) throw domain_error("acgan_loss: v must be > 0");
  return std::abs(1.0 - v) + land.lambda * (q_function(1.0) + q_function(1.0 / v));
}

double acgan_grad(const AcganLandscape& land, double v) {
  if (!(v > 0.0)) throw domain_error("acgan_grad: v must be > 0");
  const double bump = land.lambda * normal_pdf(1.0 / v) / (v * v);
  // d|1-v|/dv is -1 below the kink, +1 above; the kink takes the left value.
  return (v <= 1.0 ? -1.0 : 1.0) + bump;
}

double separable_real_error(const SeparableLandscape& land, double alpha) {
  return band_error(land.d, 1.0, alpha, /*mirrored=*/false);
}

double separable_fake_error(const SeparableLandscape& land, double l, double alpha) {
  if (l >= 0.0) return band_error(land.d, l, alpha, /*mirrored=*/false);
  return band_error(land.d, 0.9 - std::abs(l), alpha, /*mirrored=*/true);
}

double separable_ls(const SeparableLandscape& land, double l) {
  if (!(l >= -0.9 && l <= 1.0)) throw domain_error("separable_ls: l outside [-0.9, 1]");
  if (l >= 0.0) return (1.0 - l) / std::sqrt(3.0);
  const double gap = 0.1 - l;
  return std::sqrt(4.0 * land.d * land.d + gap * gap / 3.0);
}

double separable_lc(const SeparableLandscape& land, double l, double alpha) {
  if (!(l >= -0.9 && l <= 1.0)) throw domain_error("separable_lc: l outside [-0.9, 1]");
  if (!(alpha >= 0.0 && alpha < kTwoPi)) throw domain_error("separable_lc: alpha outside [0, 2pi)");
  return separable_real_error(land, alpha) + separable_fake_error(land, l, alpha);
}

double separable_total(const SeparableLandscape& land, double l, double alpha) {
  return separable_ls(land, l) + land.lambda * separable_lc(land, l, alpha);
}

ProjganState projgan_step(const ProjganState& state) {
  ProjganState next = state;
  const double a = state.step;
  auto gen_update = [&] {
    for (int i = 0; i < 2; ++i) next.offset[i] += a * (next.v0[i] + next.v1[i]);
  };
  auto emb_update = [&] {
    // Conditional-mean difference (true minus generated) equals -offset.
    for (int i = 0; i < 2; ++i) {
      next.v0[i] -= 0.5 * a * next.offset[i];
      next.v1[i] -= 0.5 * a * next.offset[i];
    }
  };
  if (state.generator_first) {
    gen_update();
    emb_update();
  } else {
    emb_update();
    gen_update();
  }
  next.t = state.t + 1;
  return next;
}

GdTrajectory gd_minimize(const GdProblem& problem, std::vector<double> x0, double lr,
                         int steps) {
  if (!(lr > 0.0)) throw usage_error("gd_minimize: lr must be > 0");
  if (steps < 1) throw usage_error("gd_minimize: steps must be >= 1");
  const std::size_t dim = x0.size();

  auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < dim; ++i) {
      if (i < problem.wrap.size() && problem.wrap[i]) {
        const double lo = problem.lower[i], hi = problem.upper[i];
        double w = std::fmod(x[i] - lo, hi - lo);
        if (w < 0.0) w += hi - lo;
        x[i] = lo + w;
      } else if (i < problem.lower.size()) {
        x[i] = std::clamp(x[i], problem.lower[i], problem.upper[i]);
      }
    }
  };

  auto numeric_grad = [&](const std::vector<double>& x) {
    const double h = 1e-6;
    std::vector<double> g(dim, 0.0), xp = x, xm = x;
    for (std::size_t i = 0; i < dim; ++i) {
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      g[i] = (problem.loss(xp) - problem.loss(xm)) / (2.0 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    return g;
  };

  GdTrajectory traj;
  std::vector<double> x = std::move(x0);
  project(x);
  for (int s = 0; s <= steps; ++s) {
    const double loss = problem.loss(x);
    traj.params.push_back(x);
    traj.losses.push_back(loss);
    if (!std::isfinite(loss)) {
      traj.converged = false;
      break;
    }
    if (s == steps) break;
    std::vector<double> g = problem.grad ? problem.grad(x) : numeric_grad(x);
    for (std::size_t i = 0; i < dim; ++i) x[i] -= lr * g[i];
    project(x);
  }
  traj.final = traj.params.back();
  return traj;
}

GdProblem acgan_gd_problem(const AcganLandscape& land) {
  GdProblem p;
  // Clamped so finite-difference probes at the box edge stay in-domain.
  p.loss = [land](const std::vector<double>& x) {
    return acgan_loss(land, std::clamp(x[0], 1e-6, 10.0));
  };
  p.grad = [land](const std::vector<double>& x) {
    return std::vector<double>{acgan_grad(land, x[0])};
  };
  p.lower = {1e-6};
  p.upper = {10.0};
  p.wrap = {false};
  return p;
}

GdProblem separable_gd_problem(const SeparableLandscape& land) {
  GdProblem p;
  p.loss = [land](const std::vector<double>& x) {
    return separable_total(land, std::clamp(x[0], -0.9, 1.0), wrap_angle(x[1]));
  };
  // Piecewise closed forms with kinks: central differences are the honest
  // gradient here.
  p.lower = {-0.9, 0.0};
  p.upper = {1.0, kTwoPi};
  p.wrap = {false, true};
  return p;
}

}  // namespace inrep
