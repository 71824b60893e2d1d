#pragma once

#include <vector>

#include "inrep/checkpoint.hpp"
#include "inrep/mlp.hpp"
#include "inrep/rng.hpp"
#include "inrep/spectral.hpp"
#include "inrep/tape.hpp"
#include "inrep/tensor.hpp"

namespace inrep {

// Learnable per-class embedding table [num_classes x d_y].
struct LabelEmbedding {
  Tensor table;

  LabelEmbedding() = default;
  LabelEmbedding(std::size_t num_classes, std::size_t d_y, Rng& rng);

  std::size_t num_classes() const { return table.rows(); }
  std::size_t dim() const { return table.cols(); }

  std::vector<double> embed(std::size_t y) const;
};

// Residual block x -> x + F(x) whose subnet weights are kept under a spectral
// cap so F is a contraction and the block is invertible by fixed-point
// iteration.
struct InvertibleBlock {
  Mlp residual;           // d_z -> hidden -> d_z, tanh hidden, linear out
  double cap = 0.9;       // Lipschitz budget per weight matrix; <= 0 disables
  std::vector<Tensor> power_state;  // warm right-vector per weight matrix

  InvertibleBlock() = default;
  InvertibleBlock(std::size_t d_z, std::size_t hidden, double cap, Rng& rng);

  // Rescales every weight matrix to spectral norm <= cap. Returns the largest
  // post-projection estimate. No-op (returns raw max) when cap <= 0.
  double enforce_cap();
  double max_weight_norm(int iters) const;

  Tensor eval(const Tensor& x) const;

  struct Bound {
    Mlp::Bound f;
  };
  Bound bind(Tape& tape, bool trainable) const;
  Var forward(Tape& tape, const Bound& bound, Var x) const;

  // Solve x + F(x) = target per row via x <- target - F(x).
  Tensor invert(const Tensor& target, double tol, int max_iters) const;
};

struct ModifierConfig {
  std::size_t d_u = 8;
  std::size_t d_y = 4;
  std::size_t num_classes = 4;
  std::size_t blocks = 3;
  std::size_t block_hidden = 24;
  double lipschitz_cap = 0.9;
};

// Conditional modifier: z = concat(u, E(y)) passed through invertible blocks.
struct ModifierNet {
  LabelEmbedding embedding;
  std::vector<InvertibleBlock> blocks;
  std::size_t d_u = 0;
  std::size_t d_y = 0;

  ModifierNet() = default;
  ModifierNet(const ModifierConfig& cfg, Rng& rng);

  std::size_t d_z() const { return d_u + d_y; }
  std::size_t num_classes() const { return embedding.num_classes(); }

  // u is [n x d_u]; labels has n entries. Result is [n x d_z].
  Tensor eval(const Tensor& u, const std::vector<std::size_t>& labels) const;

  struct Bound {
    Var table;
    std::vector<InvertibleBlock::Bound> blocks;
  };
  Bound bind(Tape& tape, bool trainable) const;
  Var forward(Tape& tape, const Bound& bound, Var u,
              const std::vector<std::size_t>& labels) const;

  // Preimage of z_y under the block stack (the concat input, embedding slice
  // included). Round-trip error is bounded by tol * (1 + ||z_y||).
  Tensor invert(const Tensor& z_y, double tol = 1e-9, int max_iters = 200) const;

  // Projects every block; returns the largest post-projection weight norm.
  double enforce_caps();
  double audit_cap(int iters = 100) const;

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;

  Checkpoint to_checkpoint() const;
  static ModifierNet from_checkpoint(const Checkpoint& ckpt);
};

}  // namespace inrep
