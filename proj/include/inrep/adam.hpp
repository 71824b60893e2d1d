#pragma once

#include <vector>

#include "inrep/tensor.hpp"

namespace inrep {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter moment accumulators.
struct AdamState {
  AdamConfig cfg;
  Tensor m, v;
  long step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg_, const std::vector<std::size_t>& shape)
      : cfg(cfg_), m(shape), v(shape) {}
};

// Standard update with bias correction; param -= lr * mhat / (sqrt(vhat) + eps).
void adam_step(AdamState& state, Tensor& param, const Tensor& grad);

// Convenience wrapper over a parameter group.
class AdamOpt {
public:
  AdamOpt() = default;
  AdamOpt(std::vector<Tensor*> params, AdamConfig cfg);
  void step(const std::vector<const Tensor*>& grads);
  std::size_t size() const { return params_.size(); }

private:
  std::vector<Tensor*> params_;
  std::vector<AdamState> states_;
};

}  // namespace inrep
