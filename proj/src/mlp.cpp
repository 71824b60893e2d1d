#include "inrep/mlp.hpp"

#include <cmath>

namespace inrep {

Var apply_activation(Tape& tape, Activation act, Var x) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::relu: return tape.relu(x);
    case Activation::tanh: return tape.tanh_(x);
    case Activation::sigmoid: return tape.sigmoid(x);
  }
  throw usage_error("apply_activation: unknown activation");
}

double activation_scalar(Activation act, double x) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  throw usage_error("activation_scalar: unknown activation");
}

Mlp Mlp::make(std::vector<std::size_t> widths, Activation act, Rng& rng,
              bool activate_output) {
  if (widths.size() < 2) throw usage_error("Mlp: need at least input and output widths");
  Mlp net;
  net.widths = std::move(widths);
  net.act = act;
  net.activate_output = activate_output;
  for (std::size_t layer = 0; layer + 1 < net.widths.size(); ++layer) {
    const std::size_t fan_in = net.widths[layer], fan_out = net.widths[layer + 1];
    Tensor w({fan_in, fan_out});
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Tensor({fan_out}));
  }
  return net;
}

Tensor Mlp::eval(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != in_dim())
    throw usage_error("Mlp::eval: input width mismatch");
  Tensor cur = x;
  for (std::size_t layer = 0; layer < weights.size(); ++layer) {
    const Tensor& w = weights[layer];
    const Tensor& b = biases[layer];
    const std::size_t n = cur.rows(), k = w.rows(), m = w.cols();
    Tensor next({n, m});
    for (std::size_t i = 0; i < n; ++i) {
      const double* crow = cur.data() + i * k;
      double* nrow = next.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) nrow[j] = b[j];
      for (std::size_t p = 0; p < k; ++p) {
        const double cv = crow[p];
        if (cv == 0.0) continue;
        const double* wrow = w.data() + p * m;
        for (std::size_t j = 0; j < m; ++j) nrow[j] += cv * wrow[j];
      }
    }
    const bool last = layer + 1 == weights.size();
    if (!last || activate_output)
      for (std::size_t i = 0; i < next.numel(); ++i)
        next[i] = activation_scalar(act, next[i]);
    cur = std::move(next);
  }
  return cur;
}

Mlp::Bound Mlp::bind(Tape& tape, bool trainable) const {
  Bound bound;
  for (std::size_t layer = 0; layer < weights.size(); ++layer) {
    bound.w.push_back(tape.leaf(weights[layer], trainable));
    bound.b.push_back(tape.leaf(biases[layer], trainable));
  }
  return bound;
}

Var Mlp::forward(Tape& tape, const Bound& bound, Var x) const {
  if (x.value().rank() != 2 || x.value().cols() != in_dim())
    throw usage_error("Mlp::forward: input width mismatch");
  Var cur = x;
  for (std::size_t layer = 0; layer < weights.size(); ++layer) {
    cur = tape.add_bias(tape.matmul(cur, bound.w[layer]), bound.b[layer]);
    const bool last = layer + 1 == weights.size();
    if (!last || activate_output) cur = apply_activation(tape, act, cur);
  }
  return cur;
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back(&weights[i]);
    out.push_back(&biases[i]);
  }
  return out;
}

std::vector<const Tensor*> Mlp::params() const {
  std::vector<const Tensor*> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back(&weights[i]);
    out.push_back(&biases[i]);
  }
  return out;
}

}  // namespace inrep
