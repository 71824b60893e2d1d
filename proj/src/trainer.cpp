#include "inrep/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "inrep/adam.hpp"
#include "inrep/errors.hpp"

namespace inrep {

namespace {

Tensor rows_subset(const Tensor& x, const std::vector<std::size_t>& idx) {
  const std::size_t cols = x.cols();
  Tensor out({idx.size(), cols});
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = x.at(idx[i], j);
  return out;
}

Tensor normal_noise(Rng& rng, std::size_t n, std::size_t dim) {
  Tensor out({n, dim});
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = rng.normal();
  return out;
}

// Stratified batch: ~m/C indices per class, sampled with replacement.
std::vector<std::size_t> stratified_batch(const std::vector<std::vector<std::size_t>>& by_class,
                                          std::size_t m, Rng& rng) {
  const std::size_t classes = by_class.size();
  std::vector<std::size_t> out;
  out.reserve(m);
  for (std::size_t cls = 0; cls < classes; ++cls) {
    const std::size_t share = m / classes + (cls < m % classes ? 1 : 0);
    const auto& pool = by_class[cls];
    for (std::size_t i = 0; i < share; ++i) out.push_back(pool[rng.below(pool.size())]);
  }
  return out;
}

std::vector<double> class_priors_of(const LabeledDataset& data, std::size_t classes) {
  std::vector<double> priors(classes, 0.0);
  for (std::size_t y : data.y) priors[y] += 1.0;
  for (double& p : priors) p /= static_cast<double>(data.size());
  return priors;
}

}  // namespace

Mlp pretrain_ugan(const GaussianMixtureSpec& spec, const UganConfig& cfg) {
  spec.validate();
  Rng init_rng = Rng::substream(cfg.seed, "ugan_init");
  Rng data_rng = Rng::substream(cfg.seed, "ugan_data");
  Rng noise_rng = Rng::substream(cfg.seed, "ugan_noise");

  std::vector<std::size_t> g_widths{cfg.noise_dim};
  for (std::size_t h : cfg.gen_hidden) g_widths.push_back(h);
  g_widths.push_back(2);
  Mlp gen = Mlp::make(g_widths, Activation::tanh, init_rng);

  std::vector<std::size_t> d_widths{2};
  for (std::size_t h : cfg.disc_hidden) d_widths.push_back(h);
  d_widths.push_back(1);
  Mlp disc = Mlp::make(d_widths, Activation::tanh, init_rng);

  AdamConfig copt{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8};
  AdamOpt gen_opt(gen.params(), copt);
  AdamOpt disc_opt(disc.params(), copt);

  auto draw_real = [&](std::size_t n) {
    Tensor x({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
      const double r = data_rng.uniform();
      double acc = 0.0;
      std::size_t pick = spec.components.size() - 1;
      for (std::size_t k = 0; k < spec.components.size(); ++k) {
        acc += spec.components[k].weight;
        if (r < acc) {
          pick = k;
          break;
        }
      }
      double x1 = 0.0, x2 = 0.0;
      sample_component(spec.components[pick], data_rng, x1, x2);
      x.at(i, 0) = x1;
      x.at(i, 1) = x2;
    }
    return x;
  };

  const double clampv = kScoreClamp;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    // Discriminator: maximize log D(x) + log(1 - D(G(z))).
    {
      Tape tape;
      Mlp::Bound db = disc.bind(tape, true);
      Var x_real = tape.leaf(draw_real(cfg.batch), false);
      Var x_fake = tape.leaf(gen.eval(normal_noise(noise_rng, cfg.batch, cfg.noise_dim)), false);
      Var s_real = tape.clamp(tape.sigmoid(disc.forward(tape, db, x_real)), clampv, 1.0 - clampv);
      Var s_fake = tape.clamp(tape.sigmoid(disc.forward(tape, db, x_fake)), clampv, 1.0 - clampv);
      Var value = tape.add(tape.mean_all(tape.log_(s_real)),
                           tape.mean_all(tape.log_(tape.one_minus(s_fake))));
      Var loss = tape.scale(value, -1.0);
      if (!std::isfinite(loss.value()[0]))
        throw numerical_error("pretrain_ugan: non-finite discriminator loss at step " +
                              std::to_string(step));
      tape.backward(loss);
      std::vector<const Tensor*> grads;
      for (std::size_t l = 0; l < db.w.size(); ++l) {
        grads.push_back(&db.w[l].grad());
        grads.push_back(&db.b[l].grad());
      }
      disc_opt.step(grads);
    }
    // Generator: maximize log D(G(z)) (non-saturating).
    {
      Tape tape;
      Mlp::Bound gb = gen.bind(tape, true);
      Mlp::Bound db = disc.bind(tape, false);
      Var z = tape.leaf(normal_noise(noise_rng, cfg.batch, cfg.noise_dim), false);
      Var x_fake = gen.forward(tape, gb, z);
      Var s_fake = tape.clamp(tape.sigmoid(disc.forward(tape, db, x_fake)), clampv, 1.0 - clampv);
      Var loss = tape.scale(tape.mean_all(tape.log_(s_fake)), -1.0);
      if (!std::isfinite(loss.value()[0]))
        throw numerical_error("pretrain_ugan: non-finite generator loss at step " +
                              std::to_string(step));
      tape.backward(loss);
      std::vector<const Tensor*> grads;
      for (std::size_t l = 0; l < gb.w.size(); ++l) {
        grads.push_back(&gb.w[l].grad());
        grads.push_back(&gb.b[l].grad());
      }
      gen_opt.step(grads);
    }
  }
  return gen;
}

LabeledDataset make_scenario(const LabeledDataset& data, const Scenario& scenario,
                             std::uint64_t seed) {
  if (scenario.kind == ScenarioKind::clean) return data;
  Rng rng = Rng::substream(seed, "scenario");
  if (scenario.kind == ScenarioKind::imbalance) {
    std::vector<bool> keep(data.size(), true);
    for (std::size_t cls : scenario.minor_classes) {
      std::vector<std::size_t> idx = data.indices_of_class(cls);
      if (idx.empty()) throw usage_error("make_scenario: minor class absent");
      const std::size_t n_keep = static_cast<std::size_t>(
          std::llround(scenario.keep_fraction * static_cast<double>(idx.size())));
      if (n_keep == 0) throw usage_error("make_scenario: keep fraction empties a class");
      // Seeded partial Fisher-Yates; kept indices stay in original order.
      for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        const std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
      for (std::size_t i = n_keep; i < idx.size(); ++i) keep[idx[i]] = false;
    }
    LabeledDataset out;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (keep[i]) kept.push_back(i);
    out.x = rows_subset(data.x, kept);
    for (std::size_t i : kept) {
      out.y.push_back(data.y[i]);
      out.flipped.push_back(data.flipped[i]);
    }
    return out;
  }
  // noise
  LabeledDataset out = data;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& [from, to] : scenario.flip_pairs) {
      if (out.y[i] == from && !out.flipped[i]) {
        if (rng.uniform() < scenario.flip_prob) {
          out.y[i] = to;
          out.flipped[i] = true;
        }
        break;  // each sample is considered for its own source pair only
      }
    }
  }
  // A flip may not empty the source class.
  for (const auto& [from, to] : scenario.flip_pairs)
    if (out.indices_of_class(from).empty())
      throw usage_error("make_scenario: flipping emptied a class");
  return out;
}

Tensor generate_conditional(const Generator& g, const ModifierNet& m, std::size_t y,
                            std::size_t n, std::uint64_t seed) {
  if (y >= m.num_classes()) throw usage_error("generate_conditional: class id out of range");
  if (n == 0) return Tensor({0, g.data_dim()});
  Rng rng = Rng::substream(seed, "generate", y);
  Tensor u = normal_noise(rng, n, m.d_u);
  return g.eval(m.eval(u, std::vector<std::size_t>(n, y)));
}

std::pair<Tensor, std::vector<std::size_t>> generate_all_classes(
    const Generator& g, const ModifierNet& m, std::size_t n_per_class, std::uint64_t seed) {
  const std::size_t classes = m.num_classes();
  Tensor all({classes * n_per_class, g.data_dim()});
  std::vector<std::size_t> labels(classes * n_per_class);
  for (std::size_t cls = 0; cls < classes; ++cls) {
    Tensor x = generate_conditional(g, m, cls, n_per_class, Rng::mix(seed, cls));
    for (std::size_t i = 0; i < n_per_class; ++i) {
      for (std::size_t j = 0; j < g.data_dim(); ++j)
        all.at(cls * n_per_class + i, j) = x.at(i, j);
      labels[cls * n_per_class + i] = cls;
    }
  }
  return {std::move(all), std::move(labels)};
}

TrainResult train_inrep(const Generator& g, const LabeledDataset& data,
                        const TrainConfig& cfg, const GaussianMixtureSpec& eval_spec) {
  const auto t_start = std::chrono::steady_clock::now();
  if (data.size() == 0) throw usage_error("train_inrep: empty dataset");

  ModifierConfig mcfg = cfg.modifier;
  if (mcfg.num_classes != data.num_classes()) mcfg.num_classes = data.num_classes();
  const std::size_t classes = mcfg.num_classes;
  if (mcfg.d_u + mcfg.d_y != g.noise_dim())
    throw usage_error("train_inrep: d_u + d_y must equal the generator noise dimension");

  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t cls = 0; cls < classes; ++cls) {
    by_class[cls] = data.indices_of_class(cls);
    if (by_class[cls].empty()) throw usage_error("train_inrep: class absent from labeled data");
  }
  const std::vector<double> priors = class_priors_of(data, classes);

  Rng init_rng = Rng::substream(cfg.seed, "inrep_init");
  ModifierNet modifier(mcfg, init_rng);
  DiscriminatorBank bank(g.data_dim(), cfg.trunk_hidden, classes, init_rng);

  AdamConfig d_adam{cfg.lr_discriminator, cfg.adam_beta1, cfg.adam_beta2, 1e-8};
  AdamConfig m_adam{cfg.lr_modifier, cfg.adam_beta1, cfg.adam_beta2, 1e-8};
  AdamOpt trunk_opt(bank.trunk.params(), d_adam);
  std::vector<AdamOpt> head_opts;
  for (std::size_t cls = 0; cls < classes; ++cls)
    head_opts.emplace_back(std::vector<Tensor*>{&bank.head_w[cls], &bank.head_b[cls]}, d_adam);
  AdamOpt mod_opt(modifier.params(), m_adam);

  Rng batch_rng = Rng::substream(cfg.seed, "inrep_batch");
  Rng noise_rng = Rng::substream(cfg.seed, "inrep_noise");

  RunReport report;
  report.ugan_digest_before = g.digest();
  report.spectral_cap_max = modifier.enforce_caps();

  auto snapshot_metrics = [&](std::size_t iter) {
    auto [samples, labels] =
        generate_all_classes(g, modifier, cfg.snapshot_n_per_class, Rng::mix(cfg.metrics_seed, iter));
    Snapshot snap;
    snap.iter = iter;
    snap.metrics = evaluate_conditional(samples, labels, eval_spec, cfg.metrics_seed);
    report.snapshots.push_back(snap);
    return snap.metrics;
  };

  auto thresholds_met = [&](const MetricsReport& mr) {
    if (cfg.stop_accuracy < 0.0 && cfg.stop_w2 < 0.0 && cfg.stop_recall < 0.0) return false;
    if (cfg.stop_accuracy >= 0.0 && mr.conditional_acc < cfg.stop_accuracy) return false;
    if (cfg.stop_w2 >= 0.0 && mr.per_class_w2_max() > cfg.stop_w2) return false;
    if (cfg.stop_recall >= 0.0 && mr.recall < cfg.stop_recall) return false;
    return true;
  };

  const double clampv = kScoreClamp;
  Tensor stale_fakes;                 // critic-phase fakes, for the literal reading
  std::vector<std::size_t> stale_labels;
  bool done = false;

  for (std::size_t iter = 0; iter < cfg.iters && !done; ++iter) {
    // ---- critic phases -----------------------------------------------------
    for (std::size_t step = 0; step < cfg.critic_steps; ++step) {
      const std::vector<std::size_t> batch = stratified_batch(by_class, cfg.batch, batch_rng);
      std::vector<std::size_t> batch_labels(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) batch_labels[i] = data.y[batch[i]];
      Tensor u = normal_noise(noise_rng, batch.size(), mcfg.d_u);
      Tensor fakes = g.eval(modifier.eval(u, batch_labels));  // constants for the critic
      if (cfg.literal_stale_fakes && step + 1 == cfg.critic_steps) {
        stale_fakes = fakes;
        stale_labels = batch_labels;
      }

      for (std::size_t cls = 0; cls < classes; ++cls) {
        std::vector<std::size_t> real_rows, fake_rows;
        for (std::size_t i = 0; i < batch.size(); ++i)
          if (batch_labels[i] == cls) {
            real_rows.push_back(batch[i]);
            fake_rows.push_back(i);
          }
        if (real_rows.empty()) continue;  // cannot happen with stratified batches
        const double pi = cfg.pi.value(priors[cls], iter, cfg.iters);

        Tape tape;
        std::vector<bool> head_mask(classes, false);
        head_mask[cls] = true;
        DiscriminatorBank::Bound bound = bank.bind(tape, true, head_mask);
        Var x_real = tape.leaf(rows_subset(data.x, real_rows), false);
        Var x_fake = tape.leaf(rows_subset(fakes, fake_rows), false);
        Var s_real = bank.score_var(tape, bound, x_real, cls);
        Var s_fake = bank.score_var(tape, bound, x_fake, cls);
        Var log_real = tape.mean_all(tape.log_(s_real));
        Var log_1m_fake = tape.mean_all(tape.log_(tape.one_minus(s_fake)));
        Var log_1m_real = tape.mean_all(tape.log_(tape.one_minus(s_real)));
        Var residual = tape.sub(log_1m_fake, tape.scale(log_1m_real, pi));
        if (cfg.clip) residual = tape.clip_nonpositive(residual);
        Var value = tape.add(tape.scale(log_real, 1.0 + pi), residual);
        Var loss = tape.scale(value, -1.0);
        if (!std::isfinite(loss.value()[0])) {
          report.aborted = true;
          report.abort_reason = "non-finite critic loss at iter " + std::to_string(iter);
          done = true;
          break;
        }
        tape.backward(loss);
        std::vector<const Tensor*> trunk_grads;
        for (std::size_t l = 0; l < bound.trunk.w.size(); ++l) {
          trunk_grads.push_back(&bound.trunk.w[l].grad());
          trunk_grads.push_back(&bound.trunk.b[l].grad());
        }
        trunk_opt.step(trunk_grads);
        head_opts[cls].step({&bound.head_w[cls].grad(), &bound.head_b[cls].grad()});
      }
      if (done) break;
    }
    if (done) break;

    // ---- modifier phase ----------------------------------------------------
    Tensor u_hat = normal_noise(noise_rng, cfg.batch, mcfg.d_u);
    // Fresh stratified real batch for the correction terms.
    const std::vector<std::size_t> real_batch = stratified_batch(by_class, cfg.batch, batch_rng);
    for (std::size_t cls = 0; cls < classes && !done; ++cls) {
      const double pi = cfg.pi.value(priors[cls], iter, cfg.iters);
      std::vector<std::size_t> real_rows;
      for (std::size_t idx : real_batch)
        if (data.y[idx] == cls) real_rows.push_back(idx);

      // Real-score terms are constant w.r.t. the modifier.
      const Tensor reals = rows_subset(data.x, real_rows);
      const std::vector<double> rs = bank.scores(reals, cls);
      double mean_log_real = 0.0, mean_log_1m_real = 0.0;
      for (double s : rs) {
        mean_log_real += std::log(s);
        mean_log_1m_real += std::log(1.0 - s);
      }
      mean_log_real /= static_cast<double>(rs.size());
      mean_log_1m_real /= static_cast<double>(rs.size());

      Tape tape;
      ModifierNet::Bound mbound = modifier.bind(tape, true);
      DiscriminatorBank::Bound dbound = bank.bind_all(tape, false);
      Var s_fake;
      if (cfg.literal_stale_fakes && stale_fakes.rows() > 0) {
        // Literal algorithm-box reading: reuse the critic-phase fakes; no
        // gradient reaches the modifier through them.
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < stale_labels.size(); ++i)
          if (stale_labels[i] == cls) rows.push_back(i);
        Var x_fake = tape.leaf(rows_subset(stale_fakes, rows), false);
        s_fake = bank.score_var(tape, dbound, x_fake, cls);
      } else {
        Var u_var = tape.leaf(u_hat, false);
        Var z_y = modifier.forward(tape, mbound, u_var,
                                   std::vector<std::size_t>(u_hat.rows(), cls));
        Var x_fake = g.forward(tape, z_y);
        s_fake = bank.score_var(tape, dbound, x_fake, cls);
      }
      Var log_1m_fake = tape.mean_all(tape.log_(tape.one_minus(s_fake)));
      Var loss;
      if (cfg.saturating) {
        Var residual = tape.add_const(log_1m_fake, -pi * mean_log_1m_real);
        if (cfg.clip) {
          report.clip_total += 1;
          if (residual.value()[0] >= 0.0) report.clip_active += 1;
          residual = tape.clip_nonpositive(residual);
        }
        // Descend V; the (1+pi) real term is a constant shift.
        loss = tape.add_const(residual, (1.0 + pi) * mean_log_real);
      } else {
        loss = tape.scale(tape.mean_all(tape.log_(s_fake)), -1.0);
      }
      if (!std::isfinite(loss.value()[0])) {
        report.aborted = true;
        report.abort_reason = "non-finite modifier loss at iter " + std::to_string(iter);
        done = true;
        break;
      }
      tape.backward(loss);
      std::vector<const Tensor*> grads;
      grads.push_back(&mbound.table.grad());
      for (const InvertibleBlock::Bound& bb : mbound.blocks)
        for (std::size_t l = 0; l < bb.f.w.size(); ++l) {
          grads.push_back(&bb.f.w[l].grad());
          grads.push_back(&bb.f.b[l].grad());
        }
      mod_opt.step(grads);
      report.spectral_cap_max = std::max(report.spectral_cap_max, modifier.enforce_caps());
    }
    report.iters_run = iter + 1;

    if (cfg.snapshot_every > 0 && ((iter + 1) % cfg.snapshot_every == 0)) {
      const MetricsReport mr = snapshot_metrics(iter + 1);
      if (thresholds_met(mr)) done = true;
    }
  }

  if (report.snapshots.empty() ||
      report.snapshots.back().iter != report.iters_run) {
    if (!report.aborted) snapshot_metrics(report.iters_run);
  }
  if (!report.snapshots.empty()) report.final_metrics = report.snapshots.back().metrics;
  report.ugan_digest_after = g.digest();

  auto [fig_x, fig_y] = generate_all_classes(g, modifier, 200, Rng::mix(cfg.seed, 0xf16));
  report.figure_samples = std::move(fig_x);
  report.figure_labels = std::move(fig_y);

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return TrainResult{std::move(modifier), std::move(bank), std::move(report)};
}

}  // namespace inrep
