#pragma once

#include <vector>

#include "inrep/rng.hpp"
#include "inrep/tape.hpp"
#include "inrep/tensor.hpp"

namespace inrep {

enum class Activation { identity, relu, tanh, sigmoid };

// Dense feed-forward stack. The activation applies to hidden layers; the
// output layer stays linear unless activate_output is set.
struct Mlp {
  std::vector<std::size_t> widths;
  Activation act = Activation::tanh;
  bool activate_output = false;
  std::vector<Tensor> weights;  // [in x out] per layer
  std::vector<Tensor> biases;   // [out] per layer

  static Mlp make(std::vector<std::size_t> widths, Activation act, Rng& rng,
                  bool activate_output = false);

  std::size_t in_dim() const { return widths.front(); }
  std::size_t out_dim() const { return widths.back(); }
  std::size_t layer_count() const { return weights.size(); }

  // Plain evaluation, no recording. x is [batch x in].
  Tensor eval(const Tensor& x) const;

  // Parameters registered on a tape for one step.
  struct Bound {
    std::vector<Var> w, b;
  };
  Bound bind(Tape& tape, bool trainable) const;

  // Recorded forward pass using previously bound parameters.
  Var forward(Tape& tape, const Bound& bound, Var x) const;

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
};

Var apply_activation(Tape& tape, Activation act, Var x);
double activation_scalar(Activation act, double x);

}  // namespace inrep
