#include "inrep/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "inrep/errors.hpp"
#include "inrep/normal.hpp"

namespace inrep {

double Mixture1D::pdf(double x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k)
    acc += weights[k] * normal_pdf((x - means[k]) / sigmas[k]) / sigmas[k];
  return acc;
}

double Mixture1D::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k)
    acc += weights[k] * normal_cdf((x - means[k]) / sigmas[k]);
  return acc;
}

double Mixture1D::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("Mixture1D::quantile: p outside (0,1)");
  double lo = means[0], hi = means[0], smax = sigmas[0];
  for (std::size_t k = 0; k < means.size(); ++k) {
    lo = std::min(lo, means[k]);
    hi = std::max(hi, means[k]);
    smax = std::max(smax, sigmas[k]);
  }
  lo -= 40.0 * smax;
  hi += 40.0 * smax;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double err = cdf(x) - p;
    if (err > 0.0)
      hi = x;
    else
      lo = x;
    const double f = pdf(x);
    double next = f > 1e-300 ? x - err / f : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-13 * (1.0 + std::abs(x)) && std::abs(err) < 1e-13) return next;
    x = next;
  }
  return x;
}

void GaussianMixtureSpec::validate() const {
  if (components.empty()) throw usage_error("GaussianMixtureSpec: no components");
  double wsum = 0.0;
  for (const MixtureComponent& c : components) {
    if (!(c.weight >= 0.0)) throw usage_error("GaussianMixtureSpec: negative weight");
    const double a = c.cov[0][0], b = c.cov[0][1], b2 = c.cov[1][0], d = c.cov[1][1];
    if (std::abs(b - b2) > 1e-12) throw usage_error("GaussianMixtureSpec: asymmetric covariance");
    if (!(a > 0.0 && a * d - b * b > 0.0))
      throw usage_error("GaussianMixtureSpec: covariance not positive definite");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw usage_error("GaussianMixtureSpec: weights must sum to 1");
}

std::size_t GaussianMixtureSpec::num_classes() const {
  std::size_t top = 0;
  for (const MixtureComponent& c : components) top = std::max(top, c.label + 1);
  return top;
}

double GaussianMixtureSpec::component_pdf(std::size_t k, double x1, double x2) const {
  const MixtureComponent& c = components[k];
  const double a = c.cov[0][0], b = c.cov[0][1], d = c.cov[1][1];
  const double det = a * d - b * b;
  const double dx = x1 - c.mean[0], dy = x2 - c.mean[1];
  const double quad = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
  return std::exp(-0.5 * quad) / (6.28318530717958647692 * std::sqrt(det));
}

double GaussianMixtureSpec::pdf(double x1, double x2) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k)
    acc += components[k].weight * component_pdf(k, x1, x2);
  return acc;
}

std::vector<double> GaussianMixtureSpec::posterior(double x1, double x2) const {
  std::vector<double> post(num_classes(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double mass = components[k].weight * component_pdf(k, x1, x2);
    post[components[k].label] += mass;
    total += mass;
  }
  if (total <= 0.0) {
    // Far tail: fall back to the nearest component to avoid 0/0.
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t k = 0; k < components.size(); ++k) {
      const double dx = x1 - components[k].mean[0], dy = x2 - components[k].mean[1];
      if (dx * dx + dy * dy < best_d) {
        best_d = dx * dx + dy * dy;
        best = k;
      }
    }
    post.assign(num_classes(), 0.0);
    post[components[best].label] = 1.0;
    return post;
  }
  for (double& p : post) p /= total;
  return post;
}

std::vector<double> GaussianMixtureSpec::class_priors() const {
  std::vector<double> priors(num_classes(), 0.0);
  for (const MixtureComponent& c : components) priors[c.label] += c.weight;
  return priors;
}

GaussianMixtureSpec GaussianMixtureSpec::four_modes() {
  GaussianMixtureSpec spec;
  const double means[4][2] = {{0.0, 2.0}, {-2.0, 0.0}, {0.0, -2.0}, {2.0, 0.0}};
  for (std::size_t k = 0; k < 4; ++k) {
    MixtureComponent c;
    c.mean = {means[k][0], means[k][1]};
    c.cov = {{{1.0, 0.0}, {0.0, 1.0}}};
    c.weight = 0.25;
    c.label = k;
    spec.components.push_back(c);
  }
  return spec;
}

std::vector<std::size_t> LabeledDataset::indices_of_class(std::size_t cls) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == cls) out.push_back(i);
  return out;
}

std::size_t LabeledDataset::num_classes() const {
  std::size_t top = 0;
  for (std::size_t cls : y) top = std::max(top, cls + 1);
  return top;
}

void sample_component(const MixtureComponent& comp, Rng& rng, double& x1, double& x2) {
  // Cholesky of the 2x2 covariance.
  const double a = comp.cov[0][0], b = comp.cov[0][1], d = comp.cov[1][1];
  const double l11 = std::sqrt(a);
  const double l21 = b / l11;
  const double l22 = std::sqrt(d - l21 * l21);
  const double z1 = rng.normal(), z2 = rng.normal();
  x1 = comp.mean[0] + l11 * z1;
  x2 = comp.mean[1] + l21 * z1 + l22 * z2;
}

LabeledDataset sample_mixture(const GaussianMixtureSpec& spec, std::size_t n,
                              std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw usage_error("sample_mixture: n must be >= 1");
  Rng rng = Rng::substream(seed, "sample_mixture");
  LabeledDataset data;
  data.x = Tensor({n, 2});
  data.y.resize(n);
  data.flipped.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform();
    double acc = 0.0;
    std::size_t pick = spec.components.size() - 1;
    for (std::size_t k = 0; k < spec.components.size(); ++k) {
      acc += spec.components[k].weight;
      if (r < acc) {
        pick = k;
        break;
      }
    }
    double x1 = 0.0, x2 = 0.0;
    sample_component(spec.components[pick], rng, x1, x2);
    data.x.at(i, 0) = x1;
    data.x.at(i, 1) = x2;
    data.y[i] = spec.components[pick].label;
  }
  return data;
}

}  // namespace inrep
