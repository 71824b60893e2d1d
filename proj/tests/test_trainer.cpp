#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "inrep/trainer.hpp"

using namespace inrep;

namespace {

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.iters = 60;
  cfg.critic_steps = 2;
  cfg.batch = 32;
  cfg.snapshot_every = 30;
  cfg.snapshot_n_per_class = 150;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("make_scenario imbalance subsamples exactly") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  LabeledDataset data = sample_mixture(spec, 4000, 1);
  Scenario sc;
  sc.kind = ScenarioKind::imbalance;
  sc.minor_classes = {0};
  sc.keep_fraction = 0.1;
  const std::size_t before = data.indices_of_class(0).size();
  LabeledDataset out = make_scenario(data, sc, 2);
  const std::size_t after = out.indices_of_class(0).size();
  CHECK(after == static_cast<std::size_t>(std::llround(0.1 * before)));
  // Other classes unchanged.
  for (std::size_t cls = 1; cls < 4; ++cls)
    CHECK(out.indices_of_class(cls).size() == data.indices_of_class(cls).size());

  Scenario empty = sc;
  empty.keep_fraction = 1e-9;
  CHECK_THROWS_AS(make_scenario(data, empty, 3), usage_error);
}

TEST_CASE("make_scenario label noise flips within binomial bounds") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  LabeledDataset data = sample_mixture(spec, 40000, 4);
  Scenario sc;
  sc.kind = ScenarioKind::noise;
  sc.flip_pairs = {{0, 1}};
  sc.flip_prob = 0.4;
  LabeledDataset out = make_scenario(data, sc, 5);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.flipped[i]) {
      ++flipped;
      CHECK(out.y[i] == 1);
      CHECK(data.y[i] == 0);
    }
  const double n0 = static_cast<double>(data.indices_of_class(0).size());
  const double sigma = std::sqrt(0.4 * 0.6 * n0);
  CHECK(std::abs(static_cast<double>(flipped) - 0.4 * n0) <= 3.0 * sigma);

  // Zero probability leaves the dataset unchanged.
  Scenario nop = sc;
  nop.flip_prob = 0.0;
  LabeledDataset same = make_scenario(data, nop, 6);
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(same.y[i] == data.y[i]);
}

TEST_CASE("generate_conditional determinism and edge cases") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  auto gen = make_oracle_generator(spec, 12);
  Rng rng(9);
  ModifierConfig mcfg;
  ModifierNet modifier(mcfg, rng);
  Tensor a = generate_conditional(*gen, modifier, 2, 50, 123);
  Tensor b = generate_conditional(*gen, modifier, 2, 50, 123);
  REQUIRE(a.rows() == 50);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
  Tensor none = generate_conditional(*gen, modifier, 0, 0, 1);
  CHECK(none.rows() == 0);
  CHECK_THROWS_AS(generate_conditional(*gen, modifier, 9, 5, 1), usage_error);
}

TEST_CASE("train_inrep freezes the generator and keeps the cap") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  auto gen = make_oracle_generator(spec, 12);
  LabeledDataset data = sample_mixture(spec, 400, 10);
  TrainResult res = train_inrep(*gen, data, small_config(11), spec);
  CHECK_FALSE(res.report.aborted);
  CHECK(res.report.ugan_digest_before == res.report.ugan_digest_after);
  CHECK(res.report.spectral_cap_max <= 0.901);
  CHECK(res.modifier.audit_cap(200) <= 0.901);
  CHECK(res.report.iters_run == 60);
  CHECK(res.report.clip_total > 0);
  CHECK(res.report.snapshots.size() >= 2);
}

TEST_CASE("train_inrep is deterministic given the config") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  auto gen = make_oracle_generator(spec, 12);
  LabeledDataset data = sample_mixture(spec, 400, 12);
  TrainResult a = train_inrep(*gen, data, small_config(13), spec);
  TrainResult b = train_inrep(*gen, data, small_config(13), spec);
  REQUIRE(a.report.snapshots.size() == b.report.snapshots.size());
  for (std::size_t i = 0; i < a.report.snapshots.size(); ++i) {
    CHECK(a.report.snapshots[i].metrics.conditional_acc ==
          b.report.snapshots[i].metrics.conditional_acc);
    CHECK(a.report.snapshots[i].metrics.overall_w2 ==
          b.report.snapshots[i].metrics.overall_w2);
  }
  // And the trained parameters agree bit-for-bit.
  const std::string da = parameter_digest(
      std::vector<const Tensor*>(a.modifier.params().begin(), a.modifier.params().end()));
  const std::string db = parameter_digest(
      std::vector<const Tensor*>(b.modifier.params().begin(), b.modifier.params().end()));
  CHECK(da == db);
}

TEST_CASE("per-class critic updates touch only that head") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  Rng rng(21);
  DiscriminatorBank bank(2, {16, 8}, 4, rng);
  LabeledDataset data = sample_mixture(spec, 64, 22);

  Tape tape;
  DiscriminatorBank::Bound bound = bank.bind_all(tape, true);
  Var x = tape.leaf(data.x, false);
  Var s = bank.score_var(tape, bound, x, 1);
  Var loss = tape.scale(tape.mean_all(tape.log_(s)), -1.0);
  tape.backward(loss);

  auto grad_norm = [](const Tensor& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.numel(); ++i) acc += std::abs(g[i]);
    return acc;
  };
  CHECK(grad_norm(bound.head_w[1].grad()) > 0.0);
  for (std::size_t cls : {0u, 2u, 3u}) {
    CHECK(grad_norm(bound.head_w[cls].grad()) == 0.0);
    CHECK(grad_norm(bound.head_b[cls].grad()) == 0.0);
  }
  // Trunk is shared: it must receive gradient.
  double trunk_total = 0.0;
  for (const Var& w : bound.trunk.w) trunk_total += grad_norm(w.grad());
  CHECK(trunk_total > 0.0);
}

TEST_CASE("modifier-phase gradients do not reach frozen generator or critic") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  Rng rng(23);
  Mlp gen_net = Mlp::make({12, 16, 2}, Activation::tanh, rng);
  MlpGenerator gen(gen_net);
  ModifierConfig mcfg;
  ModifierNet modifier(mcfg, rng);
  DiscriminatorBank bank(2, {16, 8}, 4, rng);

  Tape tape;
  ModifierNet::Bound mbound = modifier.bind(tape, true);
  // Bind generator weights explicitly as constants to observe their grads.
  Mlp::Bound gbound = gen_net.bind(tape, false);
  DiscriminatorBank::Bound dbound = bank.bind_all(tape, false);
  Tensor u({8, mcfg.d_u});
  for (std::size_t i = 0; i < u.numel(); ++i) u[i] = rng.normal();
  Var z = modifier.forward(tape, mbound, tape.leaf(u, false),
                           std::vector<std::size_t>(8, 0));
  Var xf = gen_net.forward(tape, gbound, z);
  Var s = bank.score_var(tape, dbound, xf, 0);
  Var loss = tape.mean_all(tape.log_(tape.one_minus(s)));
  tape.backward(loss);

  auto grad_norm = [](const Tensor& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.numel(); ++i) acc += std::abs(g[i]);
    return acc;
  };
  for (const Var& w : gbound.w) CHECK(grad_norm(w.grad()) == 0.0);
  for (const Var& w : dbound.trunk.w) CHECK(grad_norm(w.grad()) == 0.0);
  CHECK(grad_norm(mbound.table.grad()) > 0.0);
  double block_total = 0.0;
  for (const InvertibleBlock::Bound& bb : mbound.blocks)
    for (const Var& w : bb.f.w) block_total += grad_norm(w.grad());
  CHECK(block_total > 0.0);
}

TEST_CASE("train_inrep rejects an absent class and bad dimensions") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  auto gen = make_oracle_generator(spec, 12);
  LabeledDataset data = sample_mixture(spec, 200, 30);
  // Remove class 3 entirely.
  LabeledDataset broken;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.y[i] != 3) kept.push_back(i);
  broken.x = Tensor({kept.size(), 2});
  for (std::size_t i = 0; i < kept.size(); ++i) {
    broken.x.at(i, 0) = data.x.at(kept[i], 0);
    broken.x.at(i, 1) = data.x.at(kept[i], 1);
    broken.y.push_back(data.y[kept[i]]);
    broken.flipped.push_back(false);
  }
  TrainConfig cfg = small_config(31);
  cfg.modifier.num_classes = 4;
  CHECK_THROWS_AS(train_inrep(*gen, broken, cfg, spec), usage_error);

  TrainConfig bad_dims = small_config(32);
  bad_dims.modifier.d_u = 4;  // 4 + 4 != 12
  CHECK_THROWS_AS(train_inrep(*gen, data, bad_dims, spec), usage_error);
}

TEST_CASE("pretrain_ugan is deterministic and learns the mixture shape") {
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  UganConfig cfg;
  cfg.steps = 3000;
  cfg.seed = 7;
  Mlp g1 = pretrain_ugan(spec, cfg);
  Mlp g2 = pretrain_ugan(spec, cfg);
  const std::string d1 = parameter_digest(
      std::vector<const Tensor*>(g1.params().begin(), g1.params().end()));
  const std::string d2 = parameter_digest(
      std::vector<const Tensor*>(g2.params().begin(), g2.params().end()));
  CHECK(d1 == d2);

  // Mode coverage of the trained sampler.
  MlpGenerator gen(g1);
  Rng rng(40);
  Tensor z({2000, 12});
  for (std::size_t i = 0; i < z.numel(); ++i) z[i] = rng.normal();
  Tensor x = gen.eval(z);
  LabeledDataset real = sample_mixture(spec, 2000, 41);
  const double recall = knn_recall(real.x, x, 3);
  CHECK(recall >= 0.9);
}
