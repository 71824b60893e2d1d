#pragma once

#include <vector>

#include "inrep/checkpoint.hpp"
#include "inrep/mlp.hpp"
#include "inrep/rng.hpp"
#include "inrep/tape.hpp"

namespace inrep {

// Weight-shared conditional discriminator: a common trunk with one linear
// head per class, D_y(x) = sigmoid(H_y(trunk(x))).
struct DiscriminatorBank {
  Mlp trunk;                    // data_dim -> ... -> feature_dim, activated output
  std::vector<Tensor> head_w;   // [feature_dim x 1] per class
  std::vector<Tensor> head_b;   // [1] per class

  DiscriminatorBank() = default;
  DiscriminatorBank(std::size_t data_dim, std::vector<std::size_t> trunk_hidden,
                    std::size_t num_classes, Rng& rng);

  std::size_t num_classes() const { return head_w.size(); }
  std::size_t feature_dim() const { return trunk.out_dim(); }

  // Scores in (0,1), one per row of x.
  std::vector<double> scores(const Tensor& x, std::size_t cls) const;

  struct Bound {
    Mlp::Bound trunk;
    std::vector<Var> head_w, head_b;
  };
  // trainable_heads selects which heads get gradients; the trunk follows
  // trainable_trunk. Untouched heads stay constant on the tape.
  Bound bind(Tape& tape, bool trainable_trunk, const std::vector<bool>& trainable_heads) const;
  Bound bind_all(Tape& tape, bool trainable) const;

  // Recorded scores for one class; clamped to [eps, 1-eps] before any log.
  Var score_var(Tape& tape, const Bound& bound, Var x, std::size_t cls) const;

  std::vector<Tensor*> class_params(std::size_t cls);  // trunk + head cls
  std::vector<Tensor*> params();

  Checkpoint to_checkpoint() const;
  static DiscriminatorBank from_checkpoint(const Checkpoint& ckpt);
};

inline constexpr double kScoreClamp = 1e-7;

}  // namespace inrep
