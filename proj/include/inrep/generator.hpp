#pragma once

#include <memory>
#include <string>

#include "inrep/checkpoint.hpp"
#include "inrep/mixture.hpp"
#include "inrep/mlp.hpp"
#include "inrep/tape.hpp"

namespace inrep {

// Frozen noise-to-data map. Recorded forwards propagate gradients to the
// noise input only; the map's own parameters never receive gradients.
class Generator {
public:
  virtual ~Generator() = default;
  virtual std::size_t noise_dim() const = 0;
  virtual std::size_t data_dim() const = 0;
  virtual Tensor eval(const Tensor& z) const = 0;
  virtual Var forward(Tape& tape, Var z) const = 0;
  virtual std::string digest() const = 0;
};

// Trained MLP generator; weights are bound to the tape as constants.
class MlpGenerator : public Generator {
public:
  explicit MlpGenerator(Mlp net) : net_(std::move(net)) {}

  std::size_t noise_dim() const override { return net_.in_dim(); }
  std::size_t data_dim() const override { return net_.out_dim(); }
  Tensor eval(const Tensor& z) const override { return net_.eval(z); }
  Var forward(Tape& tape, Var z) const override {
    return net_.forward(tape, net_.bind(tape, /*trainable=*/false), z);
  }
  std::string digest() const override { return parameter_digest(net_.params()); }

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

private:
  Mlp net_;
};

// Exact sampler for a 2D Gaussian mixture: the smooth triangular
// (conditional-quantile) transport of the first two noise coordinates,
//   x1 = F1^{-1}(Phi(z1)),  x2 = F2^{-1}(Phi(z2) | x1),
// which pushes N(0, I) forward to the mixture exactly and is differentiable
// in (z1, z2). Remaining noise coordinates are ignored.
class TransportGenerator : public Generator {
public:
  TransportGenerator(GaussianMixtureSpec spec, std::size_t noise_dim);

  std::size_t noise_dim() const override { return noise_dim_; }
  std::size_t data_dim() const override { return 2; }
  Tensor eval(const Tensor& z) const override;
  Var forward(Tape& tape, Var z) const override;
  std::string digest() const override;

  const GaussianMixtureSpec& spec() const { return spec_; }

  // Maps one noise point; fills the 2x2 Jacobian w.r.t. (z1, z2) when asked.
  void push_point(double z1, double z2, double& x1, double& x2,
                  double jac[2][2] = nullptr) const;

private:
  struct CondParts;
  GaussianMixtureSpec spec_;
  std::size_t noise_dim_;
  Mixture1D marginal1_;
};

std::unique_ptr<Generator> make_oracle_generator(const GaussianMixtureSpec& spec,
                                                 std::size_t noise_dim);

}  // namespace inrep
