#include "inrep/modifier.hpp"

#include <cmath>
#include <string>

namespace inrep {

LabelEmbedding::LabelEmbedding(std::size_t num_classes, std::size_t d_y, Rng& rng)
    : table({num_classes, d_y}) {
  // One-hot-like start keeps classes separated from the first step; extra
  // coordinates (if any) get small noise.
  for (std::size_t y = 0; y < num_classes; ++y)
    for (std::size_t j = 0; j < d_y; ++j)
      table.at(y, j) = (j == y % d_y ? 1.0 : 0.0) + 0.05 * rng.normal();
}

std::vector<double> LabelEmbedding::embed(std::size_t y) const {
  if (y >= num_classes()) throw usage_error("LabelEmbedding: class id out of range");
  std::vector<double> row(dim());
  for (std::size_t j = 0; j < dim(); ++j) row[j] = table.at(y, j);
  return row;
}

InvertibleBlock::InvertibleBlock(std::size_t d_z, std::size_t hidden, double cap_, Rng& rng)
    : residual(Mlp::make({d_z, hidden, d_z}, Activation::tanh, rng)), cap(cap_) {
  for (const Tensor& w : residual.weights) power_state.emplace_back(Tensor({w.cols()}));
  enforce_cap();
}

double InvertibleBlock::enforce_cap() {
  double worst = 0.0;
  for (std::size_t i = 0; i < residual.weights.size(); ++i) {
    if (cap > 0.0)
      worst = std::max(worst, project_spectral(residual.weights[i], cap, power_state[i]));
    else
      worst = std::max(worst, spectral_norm(residual.weights[i], 50));
  }
  return worst;
}

double InvertibleBlock::max_weight_norm(int iters) const {
  double worst = 0.0;
  for (const Tensor& w : residual.weights) worst = std::max(worst, spectral_norm(w, iters));
  return worst;
}

Tensor InvertibleBlock::eval(const Tensor& x) const {
  Tensor fx = residual.eval(x);
  for (std::size_t i = 0; i < fx.numel(); ++i) fx[i] += x[i];
  return fx;
}

InvertibleBlock::Bound InvertibleBlock::bind(Tape& tape, bool trainable) const {
  return Bound{residual.bind(tape, trainable)};
}

Var InvertibleBlock::forward(Tape& tape, const Bound& bound, Var x) const {
  return tape.add(x, residual.forward(tape, bound.f, x));
}

Tensor InvertibleBlock::invert(const Tensor& target, double tol, int max_iters) const {
  Tensor x = target;
  double delta = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Tensor fx = residual.eval(x);
    delta = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const double next = target[i] - fx[i];
      delta += (next - x[i]) * (next - x[i]);
      x[i] = next;
    }
    delta = std::sqrt(delta);
    if (delta <= tol) return x;
  }
  throw convergence_error(
      "InvertibleBlock::invert: fixed point did not converge (Lipschitz cap violated?)",
      delta);
}

ModifierNet::ModifierNet(const ModifierConfig& cfg, Rng& rng)
    : embedding(cfg.num_classes, cfg.d_y, rng), d_u(cfg.d_u), d_y(cfg.d_y) {
  for (std::size_t i = 0; i < cfg.blocks; ++i)
    blocks.emplace_back(d_z(), cfg.block_hidden, cfg.lipschitz_cap, rng);
}

Tensor ModifierNet::eval(const Tensor& u, const std::vector<std::size_t>& labels) const {
  if (u.rank() != 2 || u.cols() != d_u) throw usage_error("ModifierNet: noise width mismatch");
  if (u.rows() != labels.size()) throw usage_error("ModifierNet: label count mismatch");
  const std::size_t n = u.rows();
  Tensor z({n, d_z()});
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= num_classes()) throw usage_error("ModifierNet: class id out of range");
    for (std::size_t j = 0; j < d_u; ++j) z.at(i, j) = u.at(i, j);
    for (std::size_t j = 0; j < d_y; ++j) z.at(i, d_u + j) = embedding.table.at(labels[i], j);
  }
  for (const InvertibleBlock& block : blocks) z = block.eval(z);
  return z;
}

ModifierNet::Bound ModifierNet::bind(Tape& tape, bool trainable) const {
  Bound bound;
  bound.table = tape.leaf(embedding.table, trainable);
  for (const InvertibleBlock& block : blocks) bound.blocks.push_back(block.bind(tape, trainable));
  return bound;
}

Var ModifierNet::forward(Tape& tape, const Bound& bound, Var u,
                         const std::vector<std::size_t>& labels) const {
  if (u.value().cols() != d_u) throw usage_error("ModifierNet: noise width mismatch");
  if (u.value().rows() != labels.size()) throw usage_error("ModifierNet: label count mismatch");
  for (std::size_t y : labels)
    if (y >= num_classes()) throw usage_error("ModifierNet: class id out of range");
  Var emb = tape.select_rows(bound.table, labels);
  Var z = tape.concat_cols(u, emb);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    z = blocks[i].forward(tape, bound.blocks[i], z);
  return z;
}

Tensor ModifierNet::invert(const Tensor& z_y, double tol, int max_iters) const {
  if (z_y.rank() != 2 || z_y.cols() != d_z())
    throw usage_error("ModifierNet::invert: width mismatch");
  Tensor x = z_y;
  for (std::size_t i = blocks.size(); i-- > 0;) x = blocks[i].invert(x, tol, max_iters);
  return x;
}

double ModifierNet::enforce_caps() {
  double worst = 0.0;
  for (InvertibleBlock& block : blocks) worst = std::max(worst, block.enforce_cap());
  return worst;
}

double ModifierNet::audit_cap(int iters) const {
  double worst = 0.0;
  for (const InvertibleBlock& block : blocks)
    worst = std::max(worst, block.max_weight_norm(iters));
  return worst;
}

std::vector<Tensor*> ModifierNet::params() {
  std::vector<Tensor*> out{&embedding.table};
  for (InvertibleBlock& block : blocks)
    for (Tensor* p : block.residual.params()) out.push_back(p);
  return out;
}

std::vector<const Tensor*> ModifierNet::params() const {
  std::vector<const Tensor*> out{&embedding.table};
  for (const InvertibleBlock& block : blocks)
    for (const Tensor* p : block.residual.params()) out.push_back(p);
  return out;
}

Checkpoint ModifierNet::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "modifier";
  ckpt.add("embedding", embedding.table);
  Tensor meta({4}, {static_cast<double>(d_u), static_cast<double>(d_y),
                    static_cast<double>(blocks.size()),
                    blocks.empty() ? 0.0 : blocks.front().cap});
  ckpt.add("meta", meta);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Mlp& f = blocks[b].residual;
    for (std::size_t l = 0; l < f.weights.size(); ++l) {
      ckpt.add("block" + std::to_string(b) + ".w" + std::to_string(l), f.weights[l]);
      ckpt.add("block" + std::to_string(b) + ".b" + std::to_string(l), f.biases[l]);
    }
  }
  return ckpt;
}

ModifierNet ModifierNet::from_checkpoint(const Checkpoint& ckpt) {
  const Tensor& meta = ckpt.get("meta");
  ModifierConfig cfg;
  cfg.d_u = static_cast<std::size_t>(meta[0]);
  cfg.d_y = static_cast<std::size_t>(meta[1]);
  cfg.blocks = static_cast<std::size_t>(meta[2]);
  cfg.lipschitz_cap = meta[3];
  const Tensor& emb = ckpt.get("embedding");
  cfg.num_classes = emb.rows();
  // Hidden width comes from the stored block weights.
  if (cfg.blocks > 0) cfg.block_hidden = ckpt.get("block0.w0").cols();
  Rng rng(1);
  ModifierNet net(cfg, rng);
  net.embedding.table = emb;
  for (std::size_t b = 0; b < net.blocks.size(); ++b) {
    Mlp& f = net.blocks[b].residual;
    for (std::size_t l = 0; l < f.weights.size(); ++l) {
      f.weights[l] = ckpt.get("block" + std::to_string(b) + ".w" + std::to_string(l));
      f.biases[l] = ckpt.get("block" + std::to_string(b) + ".b" + std::to_string(l));
    }
  }
  return net;
}

}  // namespace inrep
