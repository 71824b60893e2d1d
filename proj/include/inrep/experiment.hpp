#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "inrep/config.hpp"
#include "inrep/report.hpp"
#include "inrep/trainer.hpp"

namespace inrep {

enum class UganMode { oracle, trained };

// Declarative description of a run matrix: labeled fraction x scenario x seed.
struct ExperimentConfig {
  std::string id = "experiment";
  std::string out_dir = "out";
  GaussianMixtureSpec spec = GaussianMixtureSpec::four_modes();
  UganMode ugan_mode = UganMode::oracle;
  UganConfig ugan;
  TrainConfig train;
  std::size_t data_n = 10000;  // unlabeled pool size per seed
  std::vector<double> fractions{0.01};
  std::vector<std::string> scenarios{"clean"};
  Scenario imbalance;  // parameters used when a cell says "imbalance"
  Scenario noise;      // parameters used when a cell says "noise"
  std::vector<std::uint64_t> seeds{1};
  std::size_t workers = 1;

  static ExperimentConfig from_kv(const KvConfig& kv);
  static const std::vector<std::string>& schema();
  std::string to_kv_text() const;  // reproducible config snapshot
};

struct CellResult {
  std::string scenario;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunReport report;

  std::string name() const;
};

// Builds the labeled dataset for one cell (subsample + scenario transform).
LabeledDataset cell_dataset(const ExperimentConfig& cfg, const std::string& scenario,
                            double fraction, std::uint64_t seed);

// Executes every cell (optionally in a small worker pool), persists one
// RunReport JSON per cell under out_dir, and returns the results in a
// deterministic order. Cell failures are recorded, not thrown.
std::vector<CellResult> run_matrix(const ExperimentConfig& cfg);

// Aggregate table: one row per (scenario, fraction) with mean +- std across
// seeds; failed cells leave gaps flagged in the last column.
std::string aggregate_csv(const std::vector<CellResult>& cells);

// Scatter overlays per cell plus metric-vs-fraction line charts.
void emit_figures(const std::vector<CellResult>& cells, const ExperimentConfig& cfg,
                  const std::string& dir);

std::unique_ptr<Generator> make_cell_generator(const ExperimentConfig& cfg,
                                               std::uint64_t seed);

}  // namespace inrep
