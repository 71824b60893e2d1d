#include "inrep/adam.hpp"

#include <cmath>

#include "inrep/errors.hpp"

namespace inrep {

void adam_step(AdamState& state, Tensor& param, const Tensor& grad) {
  if (!param.same_shape(grad) || !param.same_shape(state.m))
    throw usage_error("adam_step: shape mismatch");
  state.step += 1;
  const AdamConfig& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < param.numel(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    param[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

AdamOpt::AdamOpt(std::vector<Tensor*> params, AdamConfig cfg) : params_(std::move(params)) {
  for (Tensor* p : params_) states_.emplace_back(cfg, p->shape());
}

void AdamOpt::step(const std::vector<const Tensor*>& grads) {
  if (grads.size() != params_.size()) throw usage_error("AdamOpt: gradient count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i)
    adam_step(states_[i], *params_[i], *grads[i]);
}

}  // namespace inrep
