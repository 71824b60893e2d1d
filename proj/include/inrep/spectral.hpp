#pragma once

#include "inrep/tensor.hpp"

namespace inrep {

// Power-iteration estimate of the largest singular value of a [rows x cols]
// matrix. The start vector is derived deterministically from the shape, so the
// estimate is reproducible and non-decreasing in iters.
double spectral_norm(const Tensor& w, int iters);

// Same estimate with a caller-kept right singular vector for warm starts
// across training steps. u must have length cols (zero-initialised is fine).
double spectral_norm_warm(const Tensor& w, int iters, Tensor& u);

// Rescales w in place so its spectral norm is at most cap. Runs warm power
// iteration to tolerance before rescaling; returns the post-projection
// estimate.
double project_spectral(Tensor& w, double cap, Tensor& u);

}  // namespace inrep
