#include "inrep/generator.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "inrep/errors.hpp"
#include "inrep/normal.hpp"

namespace inrep {

namespace {

// Conditional distribution of x2 given x1 for one component:
// x2 | x1 ~ N(m(x1), s^2) with m = mu2 + (b/a)(x1 - mu1), s^2 = c - b^2/a.
struct CondComponent {
  double slope;   // b/a
  double sigma;   // sqrt(c - b^2/a)
  double mu1, mu2;
  double a;       // marginal variance of x1
};

}  // namespace

struct TransportGenerator::CondParts {
  std::vector<CondComponent> comps;
  std::vector<double> weights;
};

TransportGenerator::TransportGenerator(GaussianMixtureSpec spec, std::size_t noise_dim)
    : spec_(std::move(spec)), noise_dim_(noise_dim) {
  spec_.validate();
  if (noise_dim_ < 2) throw usage_error("TransportGenerator: noise_dim must be >= 2");
  for (const MixtureComponent& c : spec_.components) {
    marginal1_.means.push_back(c.mean[0]);
    marginal1_.sigmas.push_back(std::sqrt(c.cov[0][0]));
    marginal1_.weights.push_back(c.weight);
  }
}

void TransportGenerator::push_point(double z1, double z2, double& x1, double& x2,
                                    double jac[2][2]) const {
  const double p1 = normal_cdf(z1);
  x1 = marginal1_.quantile(std::min(std::max(p1, 1e-300), 1.0 - 1e-16));
  const double f1 = marginal1_.pdf(x1);

  // Conditional mixture of x2 | x1.
  const std::size_t n = spec_.components.size();
  std::vector<double> wtil(n), m(n), s(n), dlog(n);
  double wsum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const MixtureComponent& c = spec_.components[k];
    const double a = c.cov[0][0], b = c.cov[0][1], cc = c.cov[1][1];
    const double sd1 = std::sqrt(a);
    const double lk = c.weight * normal_pdf((x1 - c.mean[0]) / sd1) / sd1;
    wtil[k] = lk;
    wsum += lk;
    m[k] = c.mean[1] + (b / a) * (x1 - c.mean[0]);
    s[k] = std::sqrt(cc - b * b / a);
    dlog[k] = -(x1 - c.mean[0]) / a;  // d log N(x1; mu1, a) / dx1
  }
  for (std::size_t k = 0; k < n; ++k) wtil[k] /= wsum;

  Mixture1D cond;
  cond.means.assign(m.begin(), m.end());
  cond.sigmas.assign(s.begin(), s.end());
  cond.weights.assign(wtil.begin(), wtil.end());
  const double p2 = normal_cdf(z2);
  x2 = cond.quantile(std::min(std::max(p2, 1e-300), 1.0 - 1e-16));

  if (jac) {
    const double f2 = cond.pdf(x2);
    const double dx1_dz1 = normal_pdf(z1) / f1;
    const double dx2_dz2 = normal_pdf(z2) / f2;
    // dF2/dx1 at fixed x2: weight drift plus conditional-mean drift.
    double dbar = 0.0;
    for (std::size_t k = 0; k < n; ++k) dbar += wtil[k] * dlog[k];
    double dF2_dx1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = (x2 - m[k]) / s[k];
      const double dw = wtil[k] * (dlog[k] - dbar);
      const MixtureComponent& c = spec_.components[k];
      const double slope = c.cov[0][1] / c.cov[0][0];
      dF2_dx1 += dw * normal_cdf(t) + wtil[k] * normal_pdf(t) * (-slope / s[k]);
    }
    const double dx2_dx1 = -dF2_dx1 / f2;
    jac[0][0] = dx1_dz1;
    jac[0][1] = 0.0;
    jac[1][0] = dx2_dx1 * dx1_dz1;
    jac[1][1] = dx2_dz2;
  }
}

Tensor TransportGenerator::eval(const Tensor& z) const {
  if (z.rank() != 2 || z.cols() != noise_dim_)
    throw usage_error("TransportGenerator: noise width mismatch");
  const std::size_t nrows = z.rows();
  Tensor out({nrows, 2});
  for (std::size_t i = 0; i < nrows; ++i) {
    double x1 = 0.0, x2 = 0.0;
    push_point(z.at(i, 0), z.at(i, 1), x1, x2);
    out.at(i, 0) = x1;
    out.at(i, 1) = x2;
  }
  return out;
}

Var TransportGenerator::forward(Tape& tape, Var z) const {
  const Tensor& Z = z.value();
  if (Z.rank() != 2 || Z.cols() != noise_dim_)
    throw usage_error("TransportGenerator: noise width mismatch");
  const std::size_t nrows = Z.rows();
  Tensor out({nrows, 2});
  // Jacobians are cached for the backward pass.
  auto jac = std::make_shared<std::vector<std::array<double, 4>>>(nrows);
  for (std::size_t i = 0; i < nrows; ++i) {
    double x1 = 0.0, x2 = 0.0;
    double J[2][2];
    push_point(Z.at(i, 0), Z.at(i, 1), x1, x2, J);
    out.at(i, 0) = x1;
    out.at(i, 1) = x2;
    (*jac)[i] = {J[0][0], J[0][1], J[1][0], J[1][1]};
  }
  return tape.custom(
      {z}, std::move(out),
      [jac, nrows](const Tensor& out_grad, std::vector<Tensor*>& parent_grads,
                   const std::vector<const Tensor*>& parent_values) {
        (void)parent_values;
        if (!parent_grads[0]) return;
        Tensor& gz = *parent_grads[0];
        const std::size_t cols = gz.cols();
        for (std::size_t i = 0; i < nrows; ++i) {
          const auto& J = (*jac)[i];
          const double g1 = out_grad.at(i, 0), g2 = out_grad.at(i, 1);
          gz.data()[i * cols + 0] += g1 * J[0] + g2 * J[2];
          gz.data()[i * cols + 1] += g1 * J[1] + g2 * J[3];
        }
      });
}

std::string TransportGenerator::digest() const {
  std::vector<double> flat;
  for (const MixtureComponent& c : spec_.components) {
    flat.push_back(c.mean[0]);
    flat.push_back(c.mean[1]);
    flat.push_back(c.cov[0][0]);
    flat.push_back(c.cov[0][1]);
    flat.push_back(c.cov[1][1]);
    flat.push_back(c.weight);
    flat.push_back(static_cast<double>(c.label));
  }
  flat.push_back(static_cast<double>(noise_dim_));
  Tensor t({flat.size()}, flat);
  return parameter_digest(std::vector<const Tensor*>{&t});
}

std::unique_ptr<Generator> make_oracle_generator(const GaussianMixtureSpec& spec,
                                                 std::size_t noise_dim) {
  return std::make_unique<TransportGenerator>(spec, noise_dim);
}

}  // namespace inrep
