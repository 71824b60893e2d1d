#include "inrep/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "inrep/errors.hpp"
#include "inrep/svg.hpp"

namespace inrep {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Scenario scenario_by_name(const ExperimentConfig& cfg, const std::string& name) {
  if (name == "clean") return Scenario{};
  if (name == "imbalance") {
    Scenario s = cfg.imbalance;
    s.kind = ScenarioKind::imbalance;
    return s;
  }
  if (name == "noise") {
    Scenario s = cfg.noise;
    s.kind = ScenarioKind::noise;
    return s;
  }
  throw config_error("experiment: unknown scenario '" + name + "'");
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::schema() {
  static const std::vector<std::string> keys = {
      "schema_version", "experiment.id", "experiment.out_dir", "experiment.data_n",
      "experiment.fractions", "experiment.scenarios", "experiment.seeds",
      "experiment.workers", "mixture.preset", "ugan.mode", "ugan.steps", "ugan.batch",
      "ugan.lr", "ugan.noise_dim", "train.batch", "train.critic_steps", "train.iters",
      "train.lr_modifier", "train.lr_discriminator", "train.adam_beta1", "train.adam_beta2",
      "train.pi_mode", "train.pi_start", "train.pi_end", "train.clip", "train.saturating",
      "train.literal_stale_fakes", "train.snapshot_every", "train.snapshot_n_per_class",
      "train.stop_accuracy", "train.stop_w2", "train.stop_recall", "modifier.d_u",
      "modifier.d_y", "modifier.blocks", "modifier.block_hidden", "modifier.lipschitz_cap",
      "trunk.hidden", "imbalance.minor_classes", "imbalance.keep_fraction",
      "noise.flip_from", "noise.flip_to", "noise.flip_prob"};
  return keys;
}

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
  kv.enforce_schema(schema());
  const std::size_t version = kv.get_size("schema_version", 1);
  if (version != 1) throw config_error("experiment: unsupported schema_version");

  ExperimentConfig cfg;
  cfg.id = kv.get_string("experiment.id", cfg.id);
  cfg.out_dir = kv.get_string("experiment.out_dir", cfg.out_dir);
  cfg.data_n = kv.get_size("experiment.data_n", cfg.data_n);
  cfg.fractions = kv.get_doubles("experiment.fractions", cfg.fractions);
  {
    const std::string raw = kv.get_string("experiment.scenarios", "clean");
    cfg.scenarios.clear();
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
      if (!item.empty()) cfg.scenarios.push_back(item);
    }
    if (cfg.scenarios.empty()) cfg.scenarios.push_back("clean");
  }
  cfg.seeds = kv.get_u64s("experiment.seeds", cfg.seeds);
  cfg.workers = kv.get_size("experiment.workers", cfg.workers);

  const std::string preset = kv.get_string("mixture.preset", "four_modes");
  if (preset != "four_modes") throw config_error("experiment: unknown mixture preset");
  cfg.spec = GaussianMixtureSpec::four_modes();

  const std::string mode = kv.get_string("ugan.mode", "oracle");
  if (mode == "oracle")
    cfg.ugan_mode = UganMode::oracle;
  else if (mode == "trained")
    cfg.ugan_mode = UganMode::trained;
  else
    throw config_error("experiment: ugan.mode must be oracle or trained");
  cfg.ugan.steps = kv.get_size("ugan.steps", cfg.ugan.steps);
  cfg.ugan.batch = kv.get_size("ugan.batch", cfg.ugan.batch);
  cfg.ugan.lr = kv.get_double("ugan.lr", cfg.ugan.lr);
  cfg.ugan.noise_dim = kv.get_size("ugan.noise_dim", cfg.ugan.noise_dim);

  cfg.train.batch = kv.get_size("train.batch", cfg.train.batch);
  cfg.train.critic_steps = kv.get_size("train.critic_steps", cfg.train.critic_steps);
  cfg.train.iters = kv.get_size("train.iters", cfg.train.iters);
  cfg.train.lr_modifier = kv.get_double("train.lr_modifier", cfg.train.lr_modifier);
  cfg.train.lr_discriminator =
      kv.get_double("train.lr_discriminator", cfg.train.lr_discriminator);
  cfg.train.adam_beta1 = kv.get_double("train.adam_beta1", cfg.train.adam_beta1);
  cfg.train.adam_beta2 = kv.get_double("train.adam_beta2", cfg.train.adam_beta2);
  const std::string pi_mode = kv.get_string("train.pi_mode", "constant");
  if (pi_mode == "constant")
    cfg.train.pi.kind = PiScheduleKind::constant;
  else if (pi_mode == "linear")
    cfg.train.pi.kind = PiScheduleKind::linear;
  else
    throw config_error("experiment: train.pi_mode must be constant or linear");
  cfg.train.pi.start = kv.get_double("train.pi_start", cfg.train.pi.start);
  cfg.train.pi.end = kv.get_double("train.pi_end", cfg.train.pi.end);
  cfg.train.clip = kv.get_bool("train.clip", cfg.train.clip);
  cfg.train.saturating = kv.get_bool("train.saturating", cfg.train.saturating);
  cfg.train.literal_stale_fakes =
      kv.get_bool("train.literal_stale_fakes", cfg.train.literal_stale_fakes);
  cfg.train.snapshot_every = kv.get_size("train.snapshot_every", cfg.train.snapshot_every);
  cfg.train.snapshot_n_per_class =
      kv.get_size("train.snapshot_n_per_class", cfg.train.snapshot_n_per_class);
  cfg.train.stop_accuracy = kv.get_double("train.stop_accuracy", cfg.train.stop_accuracy);
  cfg.train.stop_w2 = kv.get_double("train.stop_w2", cfg.train.stop_w2);
  cfg.train.stop_recall = kv.get_double("train.stop_recall", cfg.train.stop_recall);

  cfg.train.modifier.d_u = kv.get_size("modifier.d_u", cfg.train.modifier.d_u);
  cfg.train.modifier.d_y = kv.get_size("modifier.d_y", cfg.train.modifier.d_y);
  cfg.train.modifier.blocks = kv.get_size("modifier.blocks", cfg.train.modifier.blocks);
  cfg.train.modifier.block_hidden =
      kv.get_size("modifier.block_hidden", cfg.train.modifier.block_hidden);
  cfg.train.modifier.lipschitz_cap =
      kv.get_double("modifier.lipschitz_cap", cfg.train.modifier.lipschitz_cap);
  {
    std::vector<double> hidden;
    for (std::size_t h : cfg.train.trunk_hidden) hidden.push_back(static_cast<double>(h));
    hidden = kv.get_doubles("trunk.hidden", hidden);
    cfg.train.trunk_hidden.clear();
    for (double h : hidden) cfg.train.trunk_hidden.push_back(static_cast<std::size_t>(h));
  }

  {
    std::vector<double> minors{0.0};
    minors = kv.get_doubles("imbalance.minor_classes", minors);
    cfg.imbalance.minor_classes.clear();
    for (double m : minors) cfg.imbalance.minor_classes.push_back(static_cast<std::size_t>(m));
    cfg.imbalance.keep_fraction = kv.get_double("imbalance.keep_fraction", 0.1);
    cfg.noise.flip_pairs = {{kv.get_size("noise.flip_from", 0), kv.get_size("noise.flip_to", 1)}};
    cfg.noise.flip_prob = kv.get_double("noise.flip_prob", 0.4);
  }
  return cfg;
}

std::string ExperimentConfig::to_kv_text() const {
  std::ostringstream out;
  out << "schema_version = 1\n";
  out << "experiment.id = " << id << "\n";
  out << "experiment.out_dir = " << out_dir << "\n";
  out << "experiment.data_n = " << data_n << "\n";
  out << "experiment.fractions = ";
  for (std::size_t i = 0; i < fractions.size(); ++i)
    out << (i ? "," : "") << fmt(fractions[i]);
  out << "\n";
  out << "experiment.scenarios = ";
  for (std::size_t i = 0; i < scenarios.size(); ++i) out << (i ? "," : "") << scenarios[i];
  out << "\n";
  out << "experiment.seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\n";
  out << "experiment.workers = " << workers << "\n";
  out << "mixture.preset = four_modes\n";
  out << "ugan.mode = " << (ugan_mode == UganMode::oracle ? "oracle" : "trained") << "\n";
  out << "ugan.steps = " << ugan.steps << "\n";
  out << "ugan.batch = " << ugan.batch << "\n";
  out << "ugan.lr = " << fmt(ugan.lr) << "\n";
  out << "ugan.noise_dim = " << ugan.noise_dim << "\n";
  out << "train.batch = " << train.batch << "\n";
  out << "train.critic_steps = " << train.critic_steps << "\n";
  out << "train.iters = " << train.iters << "\n";
  out << "train.lr_modifier = " << fmt(train.lr_modifier) << "\n";
  out << "train.lr_discriminator = " << fmt(train.lr_discriminator) << "\n";
  out << "train.adam_beta1 = " << fmt(train.adam_beta1) << "\n";
  out << "train.adam_beta2 = " << fmt(train.adam_beta2) << "\n";
  out << "train.pi_mode = "
      << (train.pi.kind == PiScheduleKind::constant ? "constant" : "linear") << "\n";
  out << "train.pi_start = " << fmt(train.pi.start) << "\n";
  out << "train.pi_end = " << fmt(train.pi.end) << "\n";
  out << "train.clip = " << (train.clip ? "true" : "false") << "\n";
  out << "train.saturating = " << (train.saturating ? "true" : "false") << "\n";
  out << "train.literal_stale_fakes = " << (train.literal_stale_fakes ? "true" : "false")
      << "\n";
  out << "train.snapshot_every = " << train.snapshot_every << "\n";
  out << "train.snapshot_n_per_class = " << train.snapshot_n_per_class << "\n";
  out << "train.stop_accuracy = " << fmt(train.stop_accuracy) << "\n";
  out << "train.stop_w2 = " << fmt(train.stop_w2) << "\n";
  out << "train.stop_recall = " << fmt(train.stop_recall) << "\n";
  out << "modifier.d_u = " << train.modifier.d_u << "\n";
  out << "modifier.d_y = " << train.modifier.d_y << "\n";
  out << "modifier.blocks = " << train.modifier.blocks << "\n";
  out << "modifier.block_hidden = " << train.modifier.block_hidden << "\n";
  out << "modifier.lipschitz_cap = " << fmt(train.modifier.lipschitz_cap) << "\n";
  out << "trunk.hidden = ";
  for (std::size_t i = 0; i < train.trunk_hidden.size(); ++i)
    out << (i ? "," : "") << train.trunk_hidden[i];
  out << "\n";
  out << "imbalance.minor_classes = ";
  for (std::size_t i = 0; i < imbalance.minor_classes.size(); ++i)
    out << (i ? "," : "") << imbalance.minor_classes[i];
  out << "\n";
  out << "imbalance.keep_fraction = " << fmt(imbalance.keep_fraction) << "\n";
  if (!noise.flip_pairs.empty()) {
    out << "noise.flip_from = " << noise.flip_pairs[0].first << "\n";
    out << "noise.flip_to = " << noise.flip_pairs[0].second << "\n";
  }
  out << "noise.flip_prob = " << fmt(noise.flip_prob) << "\n";
  return out.str();
}

std::string CellResult::name() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s_f%g_s%llu", scenario.c_str(), fraction,
                static_cast<unsigned long long>(seed));
  return buf;
}

LabeledDataset cell_dataset(const ExperimentConfig& cfg, const std::string& scenario,
                            double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw config_error("experiment: fraction outside (0, 1]");
  LabeledDataset pool = sample_mixture(cfg.spec, cfg.data_n, Rng::mix(seed, 0xda7a));
  const std::size_t n_labeled = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cfg.data_n))));
  // Seeded subset; indices kept sorted for reproducibility.
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng = Rng::substream(seed, "labeled_subset");
  for (std::size_t i = 0; i + 1 < idx.size() && i < n_labeled; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n_labeled);
  std::sort(idx.begin(), idx.end());
  LabeledDataset labeled;
  labeled.x = Tensor({n_labeled, 2});
  for (std::size_t i = 0; i < n_labeled; ++i) {
    labeled.x.at(i, 0) = pool.x.at(idx[i], 0);
    labeled.x.at(i, 1) = pool.x.at(idx[i], 1);
    labeled.y.push_back(pool.y[idx[i]]);
    labeled.flipped.push_back(false);
  }
  return make_scenario(labeled, scenario_by_name(cfg, scenario), Rng::mix(seed, 0x5ce2));
}

std::unique_ptr<Generator> make_cell_generator(const ExperimentConfig& cfg,
                                               std::uint64_t seed) {
  if (cfg.ugan_mode == UganMode::oracle)
    return make_oracle_generator(cfg.spec, cfg.train.modifier.d_u + cfg.train.modifier.d_y);
  UganConfig ucfg = cfg.ugan;
  ucfg.seed = seed;
  ucfg.noise_dim = cfg.train.modifier.d_u + cfg.train.modifier.d_y;
  return std::make_unique<MlpGenerator>(pretrain_ugan(cfg.spec, ucfg));
}

std::vector<CellResult> run_matrix(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  // Generators are pretrained once per seed and shared read-only.
  std::vector<std::unique_ptr<Generator>> generators;
  for (std::uint64_t seed : cfg.seeds) generators.push_back(make_cell_generator(cfg, seed));

  struct CellSpec {
    std::string scenario;
    double fraction;
    std::size_t seed_idx;
  };
  std::vector<CellSpec> cells;
  for (const std::string& scenario : cfg.scenarios)
    for (double fraction : cfg.fractions)
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
        cells.push_back({scenario, fraction, s});

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const CellSpec& cell = cells[i];
      CellResult& res = results[i];
      res.scenario = cell.scenario;
      res.fraction = cell.fraction;
      res.seed = cfg.seeds[cell.seed_idx];
      try {
        LabeledDataset data = cell_dataset(cfg, cell.scenario, cell.fraction, res.seed);
        TrainConfig tcfg = cfg.train;
        tcfg.seed = res.seed;
        tcfg.labeled_fraction = cell.fraction;
        tcfg.scenario = scenario_by_name(cfg, cell.scenario);
        TrainResult tr = train_inrep(*generators[cell.seed_idx], data, tcfg, cfg.spec);
        res.report = std::move(tr.report);
        res.ok = !res.report.aborted;
        if (res.report.aborted) res.error = res.report.abort_reason;
        const fs::path dir = fs::path(cfg.out_dir) / res.name();
        fs::create_directories(dir);
        save_run_report(res.report, cfg.to_kv_text(), (dir / "run_report.json").string());
        tr.modifier.to_checkpoint().save((dir / "modifier.json").string());
        tr.bank.to_checkpoint().save((dir / "discriminator.json").string());
      } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
      }
    }
  };

  const std::size_t pool = std::max<std::size_t>(1, std::min(cfg.workers, cells.size()));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  std::ofstream agg(fs::path(cfg.out_dir) / "aggregate.csv");
  agg << aggregate_csv(results);
  return results;
}

std::string aggregate_csv(const std::vector<CellResult>& cells) {
  struct Key {
    std::string scenario;
    double fraction;
    bool operator<(const Key& o) const {
      if (scenario != o.scenario) return scenario < o.scenario;
      return fraction < o.fraction;
    }
  };
  std::map<Key, std::vector<const CellResult*>> groups;
  for (const CellResult& c : cells) groups[{c.scenario, c.fraction}].push_back(&c);

  std::ostringstream out;
  out << "scenario,fraction,cells,ok,acc_mean,acc_std,w2_mean,w2_std,recall_mean,"
         "recall_std,cas_mean,cas_std,overall_w2_mean,overall_w2_std,gaps\n";
  for (const auto& [key, group] : groups) {
    std::vector<double> acc, w2, recall, cas, overall;
    std::size_t ok = 0;
    for (const CellResult* c : group) {
      if (!c->ok) continue;
      ++ok;
      acc.push_back(c->report.final_metrics.conditional_acc);
      w2.push_back(c->report.final_metrics.per_class_w2_mean());
      recall.push_back(c->report.final_metrics.recall);
      cas.push_back(c->report.final_metrics.cas);
      overall.push_back(c->report.final_metrics.overall_w2);
    }
    auto stats = [](const std::vector<double>& xs) {
      if (xs.empty()) return std::pair<double, double>(std::nan(""), std::nan(""));
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
      return std::pair<double, double>(mean, std::sqrt(var));
    };
    const auto [am, as] = stats(acc);
    const auto [wm, ws] = stats(w2);
    const auto [rm, rs] = stats(recall);
    const auto [cm, cs] = stats(cas);
    const auto [om, os] = stats(overall);
    out << key.scenario << "," << fmt(key.fraction) << "," << group.size() << "," << ok
        << "," << fmt(am) << "," << fmt(as) << "," << fmt(wm) << "," << fmt(ws) << ","
        << fmt(rm) << "," << fmt(rs) << "," << fmt(cm) << "," << fmt(cs) << "," << fmt(om)
        << "," << fmt(os) << "," << (ok == group.size() ? "" : "incomplete") << "\n";
  }
  return out.str();
}

void emit_figures(const std::vector<CellResult>& cells, const ExperimentConfig& cfg,
                  const std::string& dir) {
  namespace fs = std::filesystem;
  if (cells.empty()) throw usage_error("emit_figures: no reports");
  fs::create_directories(dir);
  const auto& palette = class_palette();

  // Reference sample drawn behind every scatter overlay.
  LabeledDataset real = sample_mixture(cfg.spec, 800, 20240101);

  for (const CellResult& cell : cells) {
    if (!cell.ok) continue;
    SvgCanvas svg(460, 430);
    AxisMap ax{-5.0, 5.0, -5.0, 5.0, 40, 20, 390, 360};
    svg.rect(ax.px, ax.py, ax.pw, ax.ph, "#fbfbfb");
    for (std::size_t i = 0; i < real.size(); ++i)
      svg.circle(ax.x(real.x.at(i, 0)), ax.y(real.x.at(i, 1)), 1.6, "#bbbbbb", 0.6);
    const Tensor& pts = cell.report.figure_samples;
    std::vector<std::size_t> counts(cfg.spec.num_classes(), 0);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      const std::size_t cls = cell.report.figure_labels[i];
      if (cls < counts.size()) ++counts[cls];
      svg.circle(ax.x(pts.at(i, 0)), ax.y(pts.at(i, 1)), 1.8,
                 palette[cell.report.figure_labels[i] % palette.size()], 0.8);
    }
    double ly = 34.0;
    svg.text(46, ly, "real (grey) vs generated by class", 11);
    for (std::size_t cls = 0; cls < counts.size(); ++cls) {
      ly += 14.0;
      std::string label = "class " + std::to_string(cls);
      if (counts[cls] == 0) label += " (absent)";
      svg.circle(50, ly - 4, 3, palette[cls % palette.size()]);
      svg.text(58, ly, label, 10);
    }
    svg.save((fs::path(dir) / (cell.name() + "_scatter.svg")).string());
  }

  // Metric-vs-fraction lines (mean across seeds), one chart per scenario.
  for (const std::string& scenario : cfg.scenarios) {
    std::map<double, std::vector<double>> acc_by_fraction;
    for (const CellResult& cell : cells)
      if (cell.ok && cell.scenario == scenario)
        acc_by_fraction[cell.fraction].push_back(cell.report.final_metrics.conditional_acc);
    if (acc_by_fraction.empty()) continue;
    SvgCanvas svg(460, 320);
    AxisMap ax{0.0, 1.0, 0.0, 1.0, 50, 20, 380, 260};
    svg.rect(ax.px, ax.py, ax.pw, ax.ph, "#fbfbfb");
    std::vector<std::pair<double, double>> line;
    for (const auto& [fraction, values] : acc_by_fraction) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      line.emplace_back(ax.x(fraction), ax.y(mean));
      svg.circle(ax.x(fraction), ax.y(mean), 3.0, "#1f77b4");
    }
    svg.polyline(line, "#1f77b4", 1.5);
    svg.text(50, 300, "labeled fraction vs conditional accuracy (" + scenario + ")", 11);
    svg.save((fs::path(dir) / ("accuracy_vs_fraction_" + scenario + ".svg")).string());
  }
}

}  // namespace inrep
