#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "inrep/mixture.hpp"
#include "inrep/rng.hpp"

namespace inrep {

// Deterministic noise-to-data map with a known pushforward, used to
// demonstrate noise reweighting without any learned networks.
struct OracleMap {
  std::size_t noise_dim = 1;
  std::size_t data_dim = 1;
  std::function<std::vector<double>(const std::vector<double>&)> push;
  std::function<double(const std::vector<double>&)> noise_pdf;
  std::function<std::vector<double>(Rng&)> sample_noise;
};

// Class posteriors p(y|x), continuous in x, with priors p(y).
struct Posterior {
  std::vector<double> priors;
  std::function<std::vector<double>(const std::vector<double>&)> probs;

  std::size_t num_classes() const { return priors.size(); }
  // Validates sum-to-one at a point (tolerance 1e-9) and returns the row.
  std::vector<double> at(const std::vector<double>& x) const;
};

// p_z(z) * p(y | G(z)) / p(y).
double reweighted_density(const OracleMap& g, const Posterior& post, std::size_t y,
                          const std::vector<double>& z);

struct RejectionResult {
  std::vector<std::vector<double>> samples;  // accepted noise points
  std::size_t proposals = 0;
  double acceptance_rate = 0.0;
};

// Exact sampler for the reweighted noise: propose z ~ p_z, accept with
// probability p(y | G(z)). Valid because p(y|.) <= 1, so 1/p(y) dominates the
// density ratio; the acceptance rate concentrates at p(y).
RejectionResult rejection_sample(const OracleMap& g, const Posterior& post, std::size_t y,
                                 std::size_t n, std::uint64_t seed);

// Ready-made 1D oracle: z ~ N(0,1), x = F^{-1}(Phi(z)) for a two-mode mixture.
OracleMap oracle_map_1d(const Mixture1D& mixture);

// Bayes posterior of a 1D mixture whose components carry the given labels.
Posterior mixture_posterior_1d(const Mixture1D& mixture, const std::vector<std::size_t>& labels);

// Hard threshold posterior: class 0 iff x < threshold.
Posterior hard_posterior_1d(const Mixture1D& mixture, double threshold);

}  // namespace inrep
