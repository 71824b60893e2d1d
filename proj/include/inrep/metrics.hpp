#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "inrep/mixture.hpp"
#include "inrep/tensor.hpp"

namespace inrep {

// Gaussian fitted to a 2D sample; covariance is jitter-regularised.
struct GaussianFit {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<std::array<double, 2>, 2> cov{{{1.0, 0.0}, {0.0, 1.0}}};

  static GaussianFit from_samples(const Tensor& x);
  static GaussianFit from_component(const MixtureComponent& c);
};

inline constexpr double kCovJitter = 1e-9;

// sqrt((m1-m2)^2 + (s1-s2)^2).
double w2_gaussian_1d(double m1, double s1, double m2, double s2);

// Frechet distance between 2D Gaussians; matrix square roots via symmetric
// eigendecomposition.
double w2_gaussian_2d(const GaussianFit& a, const GaussianFit& b);

// Coverage of real samples by the union of k-th-neighbour balls around the
// fake samples. Empty real set counts as fully covered.
double knn_recall(const Tensor& real, const Tensor& fake, std::size_t k);

// Fraction of generated samples whose nearest component mean carries the
// conditioning label.
double conditional_accuracy(const Tensor& generated, const std::vector<std::size_t>& labels,
                            const GaussianMixtureSpec& spec);

// Accuracy on real_test of a multinomial logistic regression trained on the
// generated labelled sample (fixed full-batch recipe).
double cas_lite(const Tensor& generated, const std::vector<std::size_t>& gen_labels,
                const Tensor& real_test, const std::vector<std::size_t>& real_labels);

struct MetricsReport {
  double overall_w2 = 0.0;
  std::vector<double> per_class_w2;
  double recall = 0.0;
  double conditional_acc = 0.0;
  double cas = 0.0;

  double per_class_w2_max() const;
  double per_class_w2_mean() const;
};

// Bundled evaluation of a conditional sampler against the ground truth.
MetricsReport evaluate_conditional(const Tensor& generated,
                                   const std::vector<std::size_t>& labels,
                                   const GaussianMixtureSpec& spec, std::uint64_t seed,
                                   std::size_t real_n = 2000, std::size_t knn_k = 3);

}  // namespace inrep
