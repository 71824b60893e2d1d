#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "inrep/errors.hpp"

namespace inrep {

struct PuConfig {
  double pi = 0.0;         // class fraction among generated data, in [0, 1]
  bool clip = true;        // negativity-clip the empirical residual term
  bool saturating = true;  // generator descends the same V (vs. ascending log D)

  PuConfig() = default;
  PuConfig(double pi_, bool clip_ = true, bool saturating_ = true)
      : pi(pi_), clip(clip_), saturating(saturating_) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw domain_error("PuConfig: pi outside [0, 1]");
  }
};

// Finite distribution on shared abstract atoms; probs sum to 1.
struct DiscreteDist {
  std::vector<double> probs;

  explicit DiscreteDist(std::vector<double> p) : probs(std::move(p)) { validate(); }

  void validate() const {
    double sum = 0.0;
    for (double q : probs) {
      if (!(q >= 0.0)) throw domain_error("DiscreteDist: negative probability");
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw domain_error("DiscreteDist: probs must sum to 1");
  }

  std::size_t size() const { return probs.size(); }
};

// Population objective over shared atoms:
//   (1+pi) E_data[log D] + E_gen[log(1-D)] - pi E_data[log(1-D)].
// Scores must be strictly inside (0,1).
double pu_value_population(const DiscreteDist& p_data, const DiscreteDist& p_gen,
                           const std::vector<double>& d_scores, const PuConfig& cfg);

// Empirical estimator; with cfg.clip the generated-minus-correction residual is
// gated at zero:
//   (1+pi) mean(log r) + min{0, mean(log(1-f)) - pi mean(log(1-r))}.
double pu_value_empirical(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores, const PuConfig& cfg);

// Closed-form maximizer of the population objective at one atom:
//   (1+pi) p_data / ((1+pi) p_data + (1-pi) p_gf).
double optimal_discriminator(double p_data_at_x, double p_gf_at_x, double pi);

// Objective value at the equilibrium p_gf = p_data:
//   (1+pi) log((1+pi)/2) + (1-pi) log((1-pi)/2), with 0 log 0 = 0.
double equilibrium_value(double pi);

struct BruteforceResult {
  DiscreteDist best_gf;
  double best_value;
};

// Enumerates candidate p_gf on the probability simplex with the given grid
// step, scores each at its optimal discriminator, and returns the candidate
// the generator side prefers (minimal discriminator-optimal value).
// Deterministic tie-break: lexicographically smallest grid point.
BruteforceResult bruteforce_equilibrium(const DiscreteDist& p_data, double pi,
                                        double grid_step);

}  // namespace inrep
