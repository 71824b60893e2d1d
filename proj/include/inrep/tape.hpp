#pragma once

#include <functional>
#include <vector>

#include "inrep/errors.hpp"
#include "inrep/tensor.hpp"

namespace inrep {

class Tape;

// Handle to a recorded tensor on a tape.
class Var {
public:
  Var() = default;
  const Tensor& value() const;
  const Tensor& grad() const;
  bool valid() const { return tape_ != nullptr && id_ >= 0; }

private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape over dense tensors. One tape records one training step;
// leaves marked trainable receive gradients, constant leaves never do.
class Tape {
public:
  Var leaf(Tensor value, bool requires_grad);

  // Linear algebra. Weights are stored [in x out] so activations compose as
  // X [n x in] * W [in x out].
  Var matmul(Var a, Var b);
  Var add_bias(Var x, Var bias);  // broadcast a length-m bias over n rows
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double c);
  Var add_const(Var a, double c);
  Var one_minus(Var a);  // 1 - a

  // Nonlinearities.
  Var relu(Var a);
  Var tanh_(Var a);
  Var sigmoid(Var a);
  Var log_(Var a);
  Var clamp(Var a, double lo, double hi);  // zero gradient outside [lo, hi]

  // Reductions and shape ops.
  Var mean_all(Var a);
  Var sum_all(Var a);
  Var concat_cols(Var a, Var b);
  Var select_rows(Var table, std::vector<std::size_t> ids);
  Var clip_nonpositive(Var a);  // min(0, a) on a scalar

  // Escape hatch for maps with hand-written Jacobians (the exact-sampler
  // generator). backward receives (output grad, parent grads to add into).
  using CustomBackward =
      std::function<void(const Tensor& out_grad, std::vector<Tensor*>& parent_grads,
                         const std::vector<const Tensor*>& parent_values)>;
  Var custom(const std::vector<Var>& parents, Tensor value, CustomBackward backward);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every recorded
  // node that needs them. loss must be a scalar recorded on this tape.
  void backward(Var loss);

  const Tensor& value_of(Var v) const { return node(v).value; }
  const Tensor& grad_of(Var v) const { return node(v).grad; }
  std::size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Tape&)> backward;  // distributes this node's grad to parents
  };

  Node& node(Var v) {
    check_owned(v);
    return nodes_[static_cast<std::size_t>(v.id_)];
  }
  const Node& node(Var v) const {
    check_owned(v);
    return nodes_[static_cast<std::size_t>(v.id_)];
  }
  void check_owned(Var v) const {
    if (v.tape_ != this || v.id_ < 0 || v.id_ >= static_cast<int>(nodes_.size()))
      throw usage_error("Tape: variable does not belong to this tape");
  }

  Var push(Tensor value, bool needs_grad, std::function<void(Tape&)> backward);
  bool needs(Var v) const { return node(v).needs_grad; }

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const {
  if (!valid()) throw usage_error("Var: unrecorded variable");
  return tape_->value_of(*this);
}
inline const Tensor& Var::grad() const {
  if (!valid()) throw usage_error("Var: unrecorded variable");
  return tape_->grad_of(*this);
}

}  // namespace inrep
