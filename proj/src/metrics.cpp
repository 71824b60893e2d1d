#include "inrep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inrep/errors.hpp"

namespace inrep {

namespace {

// Eigendecomposition of a symmetric 2x2 matrix [[a,b],[b,c]].
struct Eig2 {
  double l1, l2;         // eigenvalues, l1 >= l2
  double c, s;           // rotation: v1 = (c, s), v2 = (-s, c)
};

Eig2 eig_sym2(double a, double b, double c) {
  Eig2 e;
  const double tr = a + c;
  const double diff = a - c;
  const double disc = std::sqrt(diff * diff + 4.0 * b * b);
  e.l1 = 0.5 * (tr + disc);
  e.l2 = 0.5 * (tr - disc);
  if (std::abs(b) < 1e-300 && diff >= 0.0) {
    e.c = 1.0;
    e.s = 0.0;
  } else if (std::abs(b) < 1e-300) {
    e.c = 0.0;
    e.s = 1.0;
  } else {
    const double vx = e.l1 - c, vy = b;
    const double n = std::hypot(vx, vy);
    e.c = vx / n;
    e.s = vy / n;
  }
  return e;
}

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 sqrt_spd2(const Mat2& m) {
  Eig2 e = eig_sym2(m[0][0], m[0][1], m[1][1]);
  if (!(e.l2 > -1e-12)) throw domain_error("sqrt_spd2: matrix not positive semidefinite");
  const double r1 = std::sqrt(std::max(e.l1, 0.0));
  const double r2 = std::sqrt(std::max(e.l2, 0.0));
  Mat2 out;
  out[0][0] = r1 * e.c * e.c + r2 * e.s * e.s;
  out[0][1] = (r1 - r2) * e.c * e.s;
  out[1][0] = out[0][1];
  out[1][1] = r1 * e.s * e.s + r2 * e.c * e.c;
  return out;
}

Mat2 mul2(const Mat2& a, const Mat2& b) {
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return out;
}

double sq_dist(const double* a, const double* b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

}  // namespace

GaussianFit GaussianFit::from_samples(const Tensor& x) {
  if (x.rank() != 2 || x.cols() != 2 || x.rows() < 2)
    throw usage_error("GaussianFit: need an [n x 2] sample with n >= 2");
  const std::size_t n = x.rows();
  GaussianFit fit;
  for (std::size_t i = 0; i < n; ++i) {
    fit.mean[0] += x.at(i, 0);
    fit.mean[1] += x.at(i, 1);
  }
  fit.mean[0] /= static_cast<double>(n);
  fit.mean[1] /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x.at(i, 0) - fit.mean[0];
    const double dy = x.at(i, 1) - fit.mean[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double denom = static_cast<double>(n - 1);
  fit.cov[0][0] = sxx / denom + kCovJitter;
  fit.cov[0][1] = sxy / denom;
  fit.cov[1][0] = fit.cov[0][1];
  fit.cov[1][1] = syy / denom + kCovJitter;
  return fit;
}

GaussianFit GaussianFit::from_component(const MixtureComponent& c) {
  GaussianFit fit;
  fit.mean = c.mean;
  fit.cov = c.cov;
  return fit;
}

double w2_gaussian_1d(double m1, double s1, double m2, double s2) {
  if (!(s1 >= 0.0 && s2 >= 0.0)) throw domain_error("w2_gaussian_1d: negative sigma");
  const double dm = m1 - m2, ds = s1 - s2;
  return std::sqrt(dm * dm + ds * ds);
}

double w2_gaussian_2d(const GaussianFit& a, const GaussianFit& b) {
  for (const GaussianFit* f : {&a, &b}) {
    Eig2 e = eig_sym2(f->cov[0][0], f->cov[0][1], f->cov[1][1]);
    if (!(e.l2 > 0.0)) throw domain_error("w2_gaussian_2d: covariance not SPD");
    if (std::abs(f->cov[0][1] - f->cov[1][0]) > 1e-9)
      throw domain_error("w2_gaussian_2d: covariance not symmetric");
  }
  const double dm0 = a.mean[0] - b.mean[0], dm1 = a.mean[1] - b.mean[1];
  const Mat2 ra = sqrt_spd2(a.cov);
  const Mat2 inner = mul2(mul2(ra, b.cov), ra);
  const Mat2 rinner = sqrt_spd2(inner);
  const double tr = a.cov[0][0] + a.cov[1][1] + b.cov[0][0] + b.cov[1][1] -
                    2.0 * (rinner[0][0] + rinner[1][1]);
  return std::sqrt(std::max(0.0, dm0 * dm0 + dm1 * dm1 + tr));
}

double knn_recall(const Tensor& real, const Tensor& fake, std::size_t k) {
  if (fake.rank() != 2 || fake.cols() != 2 || real.cols() != 2)
    throw usage_error("knn_recall: expected [n x 2] samples");
  const std::size_t nf = fake.rows();
  if (nf <= k) throw usage_error("knn_recall: need more fake samples than k");
  if (real.rows() == 0) return 1.0;  // vacuous coverage

  // Radius of each fake ball: distance to its k-th nearest fake (self excluded).
  std::vector<double> radius2(nf);
  std::vector<double> dists;
  dists.reserve(nf - 1);
  for (std::size_t i = 0; i < nf; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < nf; ++j) {
      if (j == i) continue;
      dists.push_back(sq_dist(fake.data() + 2 * i, fake.data() + 2 * j));
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    radius2[i] = dists[k - 1];
  }

  std::size_t covered = 0;
  const std::size_t nr = real.rows();
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t i = 0; i < nf; ++i) {
      if (sq_dist(real.data() + 2 * r, fake.data() + 2 * i) <= radius2[i]) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(nr);
}

double conditional_accuracy(const Tensor& generated, const std::vector<std::size_t>& labels,
                            const GaussianMixtureSpec& spec) {
  if (generated.rows() != labels.size())
    throw usage_error("conditional_accuracy: label count mismatch");
  if (generated.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < generated.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_label = 0;
    for (const MixtureComponent& c : spec.components) {
      const double dx = generated.at(i, 0) - c.mean[0];
      const double dy = generated.at(i, 1) - c.mean[1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        best_label = c.label;
      }
    }
    if (best_label == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(generated.rows());
}

double cas_lite(const Tensor& generated, const std::vector<std::size_t>& gen_labels,
                const Tensor& real_test, const std::vector<std::size_t>& real_labels) {
  if (generated.rows() != gen_labels.size() || real_test.rows() != real_labels.size())
    throw usage_error("cas_lite: label count mismatch");
  std::size_t classes = 0;
  for (std::size_t y : gen_labels) classes = std::max(classes, y + 1);
  for (std::size_t y : real_labels) classes = std::max(classes, y + 1);
  {
    std::vector<bool> seen(classes, false);
    std::size_t distinct = 0;
    for (std::size_t y : gen_labels)
      if (!seen[y]) {
        seen[y] = true;
        ++distinct;
      }
    if (distinct < 2) throw usage_error("cas_lite: generated set must contain >= 2 classes");
  }

  // Standardise features on the training split.
  const std::size_t n = generated.rows();
  double mu[2] = {0.0, 0.0}, sd[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) mu[j] += generated.at(i, j);
  for (int j = 0; j < 2; ++j) mu[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) {
      const double d = generated.at(i, j) - mu[j];
      sd[j] += d * d;
    }
  for (int j = 0; j < 2; ++j) sd[j] = std::max(1e-9, std::sqrt(sd[j] / static_cast<double>(n)));

  // Multinomial logistic regression, full-batch gradient descent.
  std::vector<double> w(2 * classes, 0.0), bias(classes, 0.0);
  std::vector<double> logits(classes), probs(classes);
  const double lr = 0.5;
  const int epochs = 300;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> gw(2 * classes, 0.0), gb(classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double f0 = (generated.at(i, 0) - mu[0]) / sd[0];
      const double f1 = (generated.at(i, 1) - mu[1]) / sd[1];
      double mx = -1e300;
      for (std::size_t c = 0; c < classes; ++c) {
        logits[c] = w[2 * c] * f0 + w[2 * c + 1] * f1 + bias[c];
        mx = std::max(mx, logits[c]);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        probs[c] = std::exp(logits[c] - mx);
        z += probs[c];
      }
      for (std::size_t c = 0; c < classes; ++c) {
        const double err = probs[c] / z - (gen_labels[i] == c ? 1.0 : 0.0);
        gw[2 * c] += err * f0;
        gw[2 * c + 1] += err * f1;
        gb[c] += err;
      }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < classes; ++c) {
      w[2 * c] -= lr * gw[2 * c] * inv;
      w[2 * c + 1] -= lr * gw[2 * c + 1] * inv;
      bias[c] -= lr * gb[c] * inv;
    }
  }

  std::size_t hits = 0;
  for (std::size_t i = 0; i < real_test.rows(); ++i) {
    const double f0 = (real_test.at(i, 0) - mu[0]) / sd[0];
    const double f1 = (real_test.at(i, 1) - mu[1]) / sd[1];
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t c = 0; c < classes; ++c) {
      const double v = w[2 * c] * f0 + w[2 * c + 1] * f1 + bias[c];
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    if (best == real_labels[i]) ++hits;
  }
  return real_test.rows() == 0
             ? 0.0
             : static_cast<double>(hits) / static_cast<double>(real_test.rows());
}

double MetricsReport::per_class_w2_max() const {
  double worst = 0.0;
  for (double v : per_class_w2) worst = std::max(worst, v);
  return worst;
}

double MetricsReport::per_class_w2_mean() const {
  if (per_class_w2.empty()) return 0.0;
  double acc = 0.0;
  for (double v : per_class_w2) acc += v;
  return acc / static_cast<double>(per_class_w2.size());
}

MetricsReport evaluate_conditional(const Tensor& generated,
                                   const std::vector<std::size_t>& labels,
                                   const GaussianMixtureSpec& spec, std::uint64_t seed,
                                   std::size_t real_n, std::size_t knn_k) {
  MetricsReport report;
  LabeledDataset real = sample_mixture(spec, real_n, Rng::mix(seed, Rng::hash_tag("metrics_real")));

  report.overall_w2 =
      w2_gaussian_2d(GaussianFit::from_samples(generated), GaussianFit::from_samples(real.x));

  const std::size_t classes = spec.num_classes();
  report.per_class_w2.assign(classes, 0.0);
  for (std::size_t cls = 0; cls < classes; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    if (idx.size() < 2) {
      report.per_class_w2[cls] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    Tensor sub({idx.size(), 2});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      sub.at(i, 0) = generated.at(idx[i], 0);
      sub.at(i, 1) = generated.at(idx[i], 1);
    }
    // Intra analogue: fitted class Gaussian against the true component with
    // that label (first match; the default spec has one component per class).
    const MixtureComponent* target = nullptr;
    for (const MixtureComponent& c : spec.components)
      if (c.label == cls) {
        target = &c;
        break;
      }
    report.per_class_w2[cls] =
        target ? w2_gaussian_2d(GaussianFit::from_samples(sub), GaussianFit::from_component(*target))
               : std::numeric_limits<double>::quiet_NaN();
  }

  report.recall = knn_recall(real.x, generated, knn_k);
  report.conditional_acc = conditional_accuracy(generated, labels, spec);
  report.cas = cas_lite(generated, labels, real.x, real.y);
  return report;
}

}  // namespace inrep
