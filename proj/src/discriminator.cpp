#include "inrep/discriminator.hpp"

#include <cmath>
#include <string>

namespace inrep {

DiscriminatorBank::DiscriminatorBank(std::size_t data_dim,
                                     std::vector<std::size_t> trunk_hidden,
                                     std::size_t num_classes, Rng& rng) {
  std::vector<std::size_t> widths{data_dim};
  for (std::size_t h : trunk_hidden) widths.push_back(h);
  trunk = Mlp::make(widths, Activation::tanh, rng, /*activate_output=*/true);
  const std::size_t feat = trunk.out_dim();
  const double bound = std::sqrt(6.0 / static_cast<double>(feat + 1));
  for (std::size_t cls = 0; cls < num_classes; ++cls) {
    Tensor w({feat, 1});
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
    head_w.push_back(std::move(w));
    head_b.push_back(Tensor({1}));
  }
}

std::vector<double> DiscriminatorBank::scores(const Tensor& x, std::size_t cls) const {
  if (cls >= num_classes()) throw usage_error("DiscriminatorBank: class id out of range");
  Tensor feat = trunk.eval(x);
  const std::size_t n = feat.rows(), d = feat.cols();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double logit = head_b[cls][0];
    for (std::size_t j = 0; j < d; ++j) logit += feat.at(i, j) * head_w[cls][j];
    const double s = 1.0 / (1.0 + std::exp(-logit));
    out[i] = std::min(std::max(s, kScoreClamp), 1.0 - kScoreClamp);
  }
  return out;
}

DiscriminatorBank::Bound DiscriminatorBank::bind(Tape& tape, bool trainable_trunk,
                                                 const std::vector<bool>& trainable_heads) const {
  if (trainable_heads.size() != num_classes())
    throw usage_error("DiscriminatorBank::bind: head flag count mismatch");
  Bound bound;
  bound.trunk = trunk.bind(tape, trainable_trunk);
  for (std::size_t cls = 0; cls < num_classes(); ++cls) {
    bound.head_w.push_back(tape.leaf(head_w[cls], trainable_heads[cls]));
    bound.head_b.push_back(tape.leaf(head_b[cls], trainable_heads[cls]));
  }
  return bound;
}

DiscriminatorBank::Bound DiscriminatorBank::bind_all(Tape& tape, bool trainable) const {
  return bind(tape, trainable, std::vector<bool>(num_classes(), trainable));
}

Var DiscriminatorBank::score_var(Tape& tape, const Bound& bound, Var x,
                                 std::size_t cls) const {
  if (cls >= num_classes()) throw usage_error("DiscriminatorBank: class id out of range");
  Var feat = trunk.forward(tape, bound.trunk, x);
  Var logit = tape.add_bias(tape.matmul(feat, bound.head_w[cls]), bound.head_b[cls]);
  return tape.clamp(tape.sigmoid(logit), kScoreClamp, 1.0 - kScoreClamp);
}

std::vector<Tensor*> DiscriminatorBank::class_params(std::size_t cls) {
  std::vector<Tensor*> out = trunk.params();
  out.push_back(&head_w[cls]);
  out.push_back(&head_b[cls]);
  return out;
}

std::vector<Tensor*> DiscriminatorBank::params() {
  std::vector<Tensor*> out = trunk.params();
  for (std::size_t cls = 0; cls < num_classes(); ++cls) {
    out.push_back(&head_w[cls]);
    out.push_back(&head_b[cls]);
  }
  return out;
}

Checkpoint DiscriminatorBank::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "discriminator_bank";
  for (std::size_t l = 0; l < trunk.weights.size(); ++l) {
    ckpt.add("trunk.w" + std::to_string(l), trunk.weights[l]);
    ckpt.add("trunk.b" + std::to_string(l), trunk.biases[l]);
  }
  for (std::size_t cls = 0; cls < num_classes(); ++cls) {
    ckpt.add("head" + std::to_string(cls) + ".w", head_w[cls]);
    ckpt.add("head" + std::to_string(cls) + ".b", head_b[cls]);
  }
  return ckpt;
}

DiscriminatorBank DiscriminatorBank::from_checkpoint(const Checkpoint& ckpt) {
  DiscriminatorBank bank;
  std::vector<std::size_t> widths;
  std::size_t layer = 0;
  while (ckpt.has("trunk.w" + std::to_string(layer))) {
    const Tensor& w = ckpt.get("trunk.w" + std::to_string(layer));
    if (layer == 0) widths.push_back(w.rows());
    widths.push_back(w.cols());
    ++layer;
  }
  Rng rng(1);
  bank.trunk = Mlp::make(widths, Activation::tanh, rng, /*activate_output=*/true);
  for (std::size_t l = 0; l < bank.trunk.weights.size(); ++l) {
    bank.trunk.weights[l] = ckpt.get("trunk.w" + std::to_string(l));
    bank.trunk.biases[l] = ckpt.get("trunk.b" + std::to_string(l));
  }
  std::size_t cls = 0;
  while (ckpt.has("head" + std::to_string(cls) + ".w")) {
    bank.head_w.push_back(ckpt.get("head" + std::to_string(cls) + ".w"));
    bank.head_b.push_back(ckpt.get("head" + std::to_string(cls) + ".b"));
    ++cls;
  }
  return bank;
}

}  // namespace inrep
