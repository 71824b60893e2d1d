#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "inrep/rng.hpp"
#include "inrep/tensor.hpp"

namespace inrep {

// One-dimensional Gaussian mixture with pdf/cdf/quantile; the quantile is
// solved by safeguarded Newton on the cdf.
struct Mixture1D {
  std::vector<double> means, sigmas, weights;

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
};

struct MixtureComponent {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<std::array<double, 2>, 2> cov{{{1.0, 0.0}, {0.0, 1.0}}};
  double weight = 1.0;
  std::size_t label = 0;
};

// Ground-truth 2D data model: labelled Gaussian components.
struct GaussianMixtureSpec {
  std::vector<MixtureComponent> components;

  void validate() const;
  std::size_t num_classes() const;
  double pdf(double x1, double x2) const;
  double component_pdf(std::size_t k, double x1, double x2) const;
  // Bayes posterior over labels at a point.
  std::vector<double> posterior(double x1, double x2) const;
  std::vector<double> class_priors() const;

  // The four unit-variance modes at (0,2), (-2,0), (0,-2), (2,0).
  static GaussianMixtureSpec four_modes();
};

struct LabeledDataset {
  Tensor x;                        // [n x 2]
  std::vector<std::size_t> y;      // class ids
  std::vector<bool> flipped;       // provenance: label was corrupted

  std::size_t size() const { return y.size(); }
  std::vector<std::size_t> indices_of_class(std::size_t cls) const;
  std::size_t num_classes() const;
};

// i.i.d. draws; component chosen by weight, label = component label.
LabeledDataset sample_mixture(const GaussianMixtureSpec& spec, std::size_t n,
                              std::uint64_t seed);

// Draws one point from component k into (x1, x2).
void sample_component(const MixtureComponent& comp, Rng& rng, double& x1, double& x2);

}  // namespace inrep
