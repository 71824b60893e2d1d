#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "inrep/discriminator.hpp"
#include "inrep/generator.hpp"
#include "inrep/metrics.hpp"
#include "inrep/mixture.hpp"
#include "inrep/modifier.hpp"

namespace inrep {

enum class ScenarioKind { clean, imbalance, noise };

struct Scenario {
  ScenarioKind kind = ScenarioKind::clean;
  // imbalance: each minor class is subsampled to the keep fraction.
  std::vector<std::size_t> minor_classes;
  double keep_fraction = 0.1;
  // noise: each ordered pair's source label flips to its target with flip_prob.
  std::vector<std::pair<std::size_t, std::size_t>> flip_pairs;
  double flip_prob = 0.4;
};

enum class PiScheduleKind { constant, linear };

// Per-class weight pi_y for the PU loss. A negative start means "use the
// labelled-data class prior".
struct PiSchedule {
  PiScheduleKind kind = PiScheduleKind::constant;
  double start = -1.0;
  double end = 0.9;

  double value(double prior, std::size_t iter, std::size_t total_iters) const {
    const double s = start < 0.0 ? prior : start;
    if (kind == PiScheduleKind::constant) return s;
    if (total_iters <= 1) return s;
    const double t = static_cast<double>(iter) / static_cast<double>(total_iters - 1);
    return s + (end - s) * t;
  }
};

struct TrainConfig {
  std::size_t batch = 64;          // m
  std::size_t critic_steps = 5;    // k
  std::size_t iters = 20000;       // t
  double lr_modifier = 2e-4;
  double lr_discriminator = 2e-5;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  PiSchedule pi;
  std::uint64_t seed = 1;
  double labeled_fraction = 1.0;   // recorded; subsampling happens upstream
  Scenario scenario;
  bool clip = true;
  bool saturating = true;
  // Algorithm-box literal reading: evaluate the modifier phase on the critic
  // phase's stale fakes instead of the freshly drawn ones.
  bool literal_stale_fakes = false;
  ModifierConfig modifier;
  std::vector<std::size_t> trunk_hidden{48, 24};
  std::size_t snapshot_every = 500;          // 0 disables periodic metrics
  std::size_t snapshot_n_per_class = 500;
  std::uint64_t metrics_seed = 777;
  // Early stop once a snapshot clears every enabled threshold (negative = off).
  double stop_accuracy = -1.0;
  double stop_w2 = -1.0;
  double stop_recall = -1.0;
};

struct Snapshot {
  std::size_t iter = 0;
  MetricsReport metrics;
};

struct RunReport {
  std::vector<Snapshot> snapshots;
  MetricsReport final_metrics;
  std::size_t iters_run = 0;
  double wall_seconds = 0.0;
  std::string ugan_digest_before, ugan_digest_after;
  std::size_t clip_active = 0;   // modifier-phase clip gate engaged
  std::size_t clip_total = 0;
  double spectral_cap_max = 0.0;  // largest audited weight norm after any step
  bool aborted = false;
  std::string abort_reason;
  // Small labelled sample for scatter figures.
  Tensor figure_samples;
  std::vector<std::size_t> figure_labels;
};

struct TrainResult {
  ModifierNet modifier;
  DiscriminatorBank bank;
  RunReport report;
};

struct UganConfig {
  std::size_t noise_dim = 12;
  std::vector<std::size_t> gen_hidden{48, 48};
  std::vector<std::size_t> disc_hidden{48, 48};
  std::size_t steps = 10000;
  std::size_t batch = 64;
  double lr = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  std::uint64_t seed = 1;
};

// Unconditional GAN pretraining on unlabelled draws from the spec
// (non-saturating loss, Adam). Throws numerical_error on divergence.
Mlp pretrain_ugan(const GaussianMixtureSpec& spec, const UganConfig& cfg);

// Applies the scenario transformation; flags record corrupted labels.
LabeledDataset make_scenario(const LabeledDataset& data, const Scenario& scenario,
                             std::uint64_t seed);

// The full conditioning loop against a frozen generator. eval_spec is the
// ground truth used for metric snapshots.
TrainResult train_inrep(const Generator& g, const LabeledDataset& data,
                        const TrainConfig& cfg, const GaussianMixtureSpec& eval_spec);

// x = G(M(concat(u, E(y)))) for n seeded noise draws.
Tensor generate_conditional(const Generator& g, const ModifierNet& m, std::size_t y,
                            std::size_t n, std::uint64_t seed);

// Balanced conditional sample across all classes (n per class), with labels.
std::pair<Tensor, std::vector<std::size_t>> generate_all_classes(
    const Generator& g, const ModifierNet& m, std::size_t n_per_class, std::uint64_t seed);

}  // namespace inrep
