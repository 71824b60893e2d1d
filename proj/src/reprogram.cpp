#include "inrep/reprogram.hpp"

#include <cmath>

#include "inrep/errors.hpp"
#include "inrep/normal.hpp"

namespace inrep {

std::vector<double> Posterior::at(const std::vector<double>& x) const {
  std::vector<double> p = probs(x);
  if (p.size() != priors.size()) throw usage_error("Posterior: class count mismatch");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0 + 1e-12)) throw domain_error("Posterior: probability outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw domain_error("Posterior: probabilities do not sum to 1");
  return p;
}

double reweighted_density(const OracleMap& g, const Posterior& post, std::size_t y,
                          const std::vector<double>& z) {
  if (y >= post.num_classes()) throw usage_error("reweighted_density: class id out of range");
  if (!(post.priors[y] > 0.0)) throw domain_error("reweighted_density: p(y) = 0");
  const std::vector<double> x = g.push(z);
  return g.noise_pdf(z) * post.at(x)[y] / post.priors[y];
}

RejectionResult rejection_sample(const OracleMap& g, const Posterior& post, std::size_t y,
                                 std::size_t n, std::uint64_t seed) {
  if (y >= post.num_classes()) throw usage_error("rejection_sample: class id out of range");
  if (post.priors[y] < 1e-6) throw usage_error("rejection_sample: degenerate acceptance (p(y) < 1e-6)");
  RejectionResult result;
  result.samples.reserve(n);
  Rng rng = Rng::substream(seed, "rejection", y);
  while (result.samples.size() < n) {
    std::vector<double> z = g.sample_noise(rng);
    ++result.proposals;
    const double accept = post.at(g.push(z))[y];
    if (rng.uniform() < accept) result.samples.push_back(std::move(z));
  }
  result.acceptance_rate =
      static_cast<double>(result.samples.size()) / static_cast<double>(result.proposals);
  return result;
}

OracleMap oracle_map_1d(const Mixture1D& mixture) {
  OracleMap map;
  map.noise_dim = 1;
  map.data_dim = 1;
  map.push = [mixture](const std::vector<double>& z) {
    const double p = std::min(std::max(normal_cdf(z[0]), 1e-300), 1.0 - 1e-16);
    return std::vector<double>{mixture.quantile(p)};
  };
  map.noise_pdf = [](const std::vector<double>& z) { return normal_pdf(z[0]); };
  map.sample_noise = [](Rng& rng) { return std::vector<double>{rng.normal()}; };
  return map;
}

Posterior mixture_posterior_1d(const Mixture1D& mixture,
                               const std::vector<std::size_t>& labels) {
  if (labels.size() != mixture.means.size())
    throw usage_error("mixture_posterior_1d: label count mismatch");
  std::size_t classes = 0;
  for (std::size_t l : labels) classes = std::max(classes, l + 1);
  Posterior post;
  post.priors.assign(classes, 0.0);
  for (std::size_t k = 0; k < labels.size(); ++k) post.priors[labels[k]] += mixture.weights[k];
  post.probs = [mixture, labels, classes](const std::vector<double>& x) {
    std::vector<double> out(classes, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < mixture.means.size(); ++k) {
      const double mass = mixture.weights[k] *
                          normal_pdf((x[0] - mixture.means[k]) / mixture.sigmas[k]) /
                          mixture.sigmas[k];
      out[labels[k]] += mass;
      total += mass;
    }
    if (total <= 0.0) {
      out.assign(classes, 0.0);
      out[0] = 1.0;
      return out;
    }
    for (double& v : out) v /= total;
    return out;
  };
  return post;
}

Posterior hard_posterior_1d(const Mixture1D& mixture, double threshold) {
  Posterior post;
  post.priors = {mixture.cdf(threshold), 1.0 - mixture.cdf(threshold)};
  post.probs = [threshold](const std::vector<double>& x) {
    return x[0] < threshold ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  return post;
}

}  // namespace inrep
