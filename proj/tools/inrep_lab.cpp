// Command-line front end; see README for subcommands and exit codes.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "inrep/experiment.hpp"
#include "inrep/landscape.hpp"
#include "inrep/puloss.hpp"
#include "inrep/reprogram.hpp"
#include "inrep/svg.hpp"

namespace fs = std::filesystem;
using namespace inrep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot open " + path.string());
  out << content;
}

// ---- landscape ------------------------------------------------------------

void emit_acgan_grid(const fs::path& dir) {
  const std::vector<double> lambdas = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  std::string csv = "v,lambda,loss\n";
  const int nv = 400, nl = static_cast<int>(lambdas.size());
  std::vector<std::vector<double>> grid(nl, std::vector<double>(nv));
  for (int li = 0; li < nl; ++li) {
    AcganLandscape land(lambdas[li]);
    for (int vi = 0; vi < nv; ++vi) {
      const double v = (vi + 1) * 2.0 / nv;
      grid[li][vi] = acgan_loss(land, v);
      csv += format_num(v) + "," + format_num(lambdas[li]) + "," + format_num(grid[li][vi]) + "\n";
    }
  }
  write_file(dir / "acgan_grid.csv", csv);

  // Contour-style heatmap with the per-lambda grid minimiser marked.
  SvgCanvas svg(520, 360);
  AxisMap ax{0.0, 2.0, 0.0, static_cast<double>(nl), 50, 20, 430, 290};
  double lo = 1e300, hi = -1e300;
  for (const auto& row : grid)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (int li = 0; li < nl; ++li) {
    for (int vi = 0; vi < nv; ++vi) {
      const double t = (grid[li][vi] - lo) / (hi - lo + 1e-12);
      svg.rect(ax.x(vi * 2.0 / nv), ax.y(li + 1.0), ax.pw / nv + 0.5, ax.ph / nl + 0.5,
               heat_color(t));
    }
    int best = 0;
    for (int vi = 1; vi < nv; ++vi)
      if (grid[li][vi] < grid[li][best]) best = vi;
    svg.circle(ax.x((best + 1) * 2.0 / nv), ax.y(li + 0.5), 3.5, "#d62728");
    svg.text(ax.x(2.02), ax.y(li + 0.35), "lambda=" + format_num(lambdas[li]), 9);
  }
  svg.text(50, 345, "generator loss over v (minimiser per lambda in red)", 11);
  svg.save((dir / "acgan_contour.svg").string());

  // Descent trajectories.
  std::string traj = "step,lambda,v,loss\n";
  for (double lambda : {0.0, 50.0}) {
    AcganLandscape land(lambda);
    GdTrajectory tr = gd_minimize(acgan_gd_problem(land), {0.5}, 0.01, 3000);
    for (std::size_t s = 0; s < tr.params.size(); s += 10)
      traj += std::to_string(s) + "," + format_num(lambda) + "," +
              format_num(tr.params[s][0]) + "," + format_num(tr.losses[s]) + "\n";
  }
  write_file(dir / "acgan_trajectory.csv", traj);
}

void emit_separable(const fs::path& dir) {
  SeparableLandscape land(2.0);
  const double l_star = -0.6;
  const double a_star = 3.14159265358979323846 + std::atan(0.3 / land.d);

  std::string csv = "l,alpha,total\n";
  const int nl = 120, na = 120;
  for (int i = 0; i < nl; ++i) {
    const double l = -0.9 + 1.9 * i / (nl - 1);
    for (int j = 0; j < na; ++j) {
      const double a = 6.28318530717958 * j / na;
      csv += format_num(l) + "," + format_num(a) + "," +
             format_num(separable_total(land, l, a)) + "\n";
    }
  }
  write_file(dir / "separable_grid.csv", csv);

  // Cross sections through the bad critical point.
  SvgCanvas svg(520, 360);
  AxisMap ax{-0.9, 1.0, 0.0, 4.0, 50, 20, 430, 290};
  svg.rect(ax.px, ax.py, ax.pw, ax.ph, "#fbfbfb");
  std::vector<std::pair<double, double>> cut_l, cut_a;
  for (int i = 0; i < 300; ++i) {
    const double l = -0.9 + 1.9 * i / 299.0;
    cut_l.emplace_back(ax.x(l), ax.y(separable_total(land, l, a_star)));
  }
  for (int i = 0; i < 300; ++i) {
    const double a = 6.28318530717958 * i / 300.0;
    // Rescale alpha onto the same horizontal span.
    const double xpos = -0.9 + 1.9 * i / 299.0;
    cut_a.emplace_back(ax.x(xpos), ax.y(separable_total(land, l_star, a)));
  }
  svg.polyline(cut_l, "#1f77b4", 1.5);
  svg.polyline(cut_a, "#d62728", 1.5);
  svg.circle(ax.x(l_star), ax.y(separable_total(land, l_star, a_star)), 4.0, "#2ca02c");
  svg.text(50, 345, "cross sections at the bad critical point (blue: vary l, red: vary alpha)",
           11);
  svg.save((dir / "separable_cross_sections.svg").string());

  std::string traj = "step,start,l,alpha,loss\n";
  for (const auto& [name, x0] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"bad", {l_star, a_star}}, {"good", {0.9, 1.5707963267948966}}}) {
    GdTrajectory tr = gd_minimize(separable_gd_problem(land), x0, 1e-3, 5000);
    for (std::size_t s = 0; s < tr.params.size(); s += 25)
      traj += std::to_string(s) + "," + name + "," + format_num(tr.params[s][0]) + "," +
              format_num(tr.params[s][1]) + "," + format_num(tr.losses[s]) + "\n";
  }
  write_file(dir / "separable_trajectory.csv", traj);
}

void emit_projgan(const fs::path& dir) {
  ProjganState st;
  st.v0 = {1.0, 0.0};
  st.v1 = {0.0, 1.0};
  st.step = 1e-3;
  std::string csv = "t,offset_x,offset_y,v0_x,v0_y,v1_x,v1_y\n";
  for (int t = 0; t <= 1000; ++t) {
    if (t % 10 == 0)
      csv += std::to_string(t) + "," + format_num(st.offset[0]) + "," +
             format_num(st.offset[1]) + "," + format_num(st.v0[0]) + "," +
             format_num(st.v0[1]) + "," + format_num(st.v1[0]) + "," +
             format_num(st.v1[1]) + "\n";
    st = projgan_step(st);
  }
  write_file(dir / "projgan_drift.csv", csv);
}

int cmd_landscape(const std::string& out) {
  fs::create_directories(out);
  emit_acgan_grid(out);
  emit_separable(out);
  emit_projgan(out);
  std::cout << "landscape artifacts written to " << out << "\n";
  return kExitOk;
}

// ---- pu verify -------------------------------------------------------------

int cmd_pu_verify() {
  std::cout << "pi,analytic,bruteforce,argmax_distance\n";
  DiscreteDist p_data({0.6, 0.4});
  for (double pi : {0.0, 0.2, 0.5, 0.9}) {
    BruteforceResult res = bruteforce_equilibrium(p_data, pi, 0.01);
    double dist = 0.0;
    for (std::size_t i = 0; i < p_data.size(); ++i)
      dist = std::max(dist, std::abs(res.best_gf.probs[i] - p_data.probs[i]));
    std::printf("%.2f,%.9f,%.9f,%.4f\n", pi, equilibrium_value(pi), res.best_value, dist);
  }
  return kExitOk;
}

// ---- reprogram demo ---------------------------------------------------------

int cmd_reprogram(const std::string& out, std::uint64_t seed) {
  fs::create_directories(out);
  Mixture1D mix{{-2.0, 2.0}, {0.6, 0.6}, {0.5, 0.5}};
  OracleMap g = oracle_map_1d(mix);
  Posterior post = mixture_posterior_1d(mix, {0, 1});

  const std::size_t n = 100000;
  RejectionResult rej = rejection_sample(g, post, 0, n, seed);

  const int bins = 50;
  const double lo = -5.0, hi = 5.0;
  std::vector<double> hist(bins, 0.0);
  for (const auto& z : rej.samples) {
    const double x = g.push(z)[0];
    const int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    if (b >= 0 && b < bins) hist[b] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(n) * (hi - lo) / bins;

  // True conditional density for class 0.
  std::string csv = "x,generated_density,true_conditional\n";
  std::vector<std::pair<double, double>> gen_line, true_line;
  SvgCanvas svg(520, 330);
  AxisMap ax{lo, hi, 0.0, 0.8, 50, 20, 430, 260};
  svg.rect(ax.px, ax.py, ax.pw, ax.ph, "#fbfbfb");
  for (int b = 0; b < bins; ++b) {
    const double x = lo + (b + 0.5) * (hi - lo) / bins;
    const double cond = mix.pdf(x) * post.probs({x})[0] / post.priors[0];
    csv += format_num(x) + "," + format_num(hist[b]) + "," + format_num(cond) + "\n";
    gen_line.emplace_back(ax.x(x), ax.y(hist[b]));
    true_line.emplace_back(ax.x(x), ax.y(cond));
  }
  write_file(fs::path(out) / "reprogram_hist.csv", csv);
  svg.polyline(true_line, "#333333", 1.6);
  svg.polyline(gen_line, "#d62728", 1.6);
  svg.text(50, 315, "pushforward of reweighted noise (red) vs true conditional (black)", 11);
  svg.save((fs::path(out) / "reprogram_overlay.svg").string());
  std::cout << "acceptance_rate=" << rej.acceptance_rate << " prior=" << post.priors[0]
            << "\n";
  return kExitOk;
}

// ---- training commands ------------------------------------------------------

ExperimentConfig load_experiment(const std::string& config_path, std::uint64_t seed_override,
                                 const std::string& out_override) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ExperimentConfig::from_kv(KvConfig::parse_file(config_path));
  if (seed_override != 0) cfg.seeds = {seed_override};
  if (!out_override.empty()) cfg.out_dir = out_override;
  return cfg;
}

int cmd_pretrain(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  ExperimentConfig cfg = load_experiment(config_path, seed, out);
  fs::create_directories(cfg.out_dir);
  UganConfig ucfg = cfg.ugan;
  ucfg.seed = cfg.seeds.front();
  ucfg.noise_dim = cfg.train.modifier.d_u + cfg.train.modifier.d_y;
  Mlp gen = pretrain_ugan(cfg.spec, ucfg);
  Checkpoint ckpt;
  ckpt.kind = "mlp";
  for (std::size_t l = 0; l < gen.weights.size(); ++l) {
    ckpt.add("w" + std::to_string(l), gen.weights[l]);
    ckpt.add("b" + std::to_string(l), gen.biases[l]);
  }
  ckpt.save((fs::path(cfg.out_dir) / "ugan.json").string());
  std::cout << "ugan checkpoint written to " << cfg.out_dir << "/ugan.json\n";
  return kExitOk;
}

int cmd_condition(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  ExperimentConfig cfg = load_experiment(config_path, seed, out);
  fs::create_directories(cfg.out_dir);
  const std::uint64_t s = cfg.seeds.front();
  auto gen = make_cell_generator(cfg, s);
  LabeledDataset data =
      cell_dataset(cfg, cfg.scenarios.front(), cfg.fractions.front(), s);
  TrainConfig tcfg = cfg.train;
  tcfg.seed = s;
  tcfg.labeled_fraction = cfg.fractions.front();
  TrainResult tr = train_inrep(*gen, data, tcfg, cfg.spec);
  save_run_report(tr.report, cfg.to_kv_text(),
                  (fs::path(cfg.out_dir) / "run_report.json").string());
  tr.modifier.to_checkpoint().save((fs::path(cfg.out_dir) / "modifier.json").string());
  tr.bank.to_checkpoint().save((fs::path(cfg.out_dir) / "discriminator.json").string());
  std::cout << "final accuracy=" << tr.report.final_metrics.conditional_acc
            << " recall=" << tr.report.final_metrics.recall << "\n";
  if (tr.report.aborted) {
    std::cerr << "aborted: " << tr.report.abort_reason << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_generate(const std::string& config_path, const std::string& modifier_path,
                 std::size_t cls, std::size_t n, std::uint64_t seed,
                 const std::string& out) {
  ExperimentConfig cfg = load_experiment(config_path, seed == 0 ? 1 : seed, "");
  ModifierNet modifier = ModifierNet::from_checkpoint(Checkpoint::load(modifier_path));
  auto gen = make_cell_generator(cfg, cfg.seeds.front());
  Tensor x = generate_conditional(*gen, modifier, cls, n, cfg.seeds.front());
  std::string csv = "x1,x2,class\n";
  for (std::size_t i = 0; i < x.rows(); ++i)
    csv += format_num(x.at(i, 0)) + "," + format_num(x.at(i, 1)) + "," +
           std::to_string(cls) + "\n";
  if (out.empty())
    std::cout << csv;
  else
    write_file(out, csv);
  return kExitOk;
}

int cmd_matrix(const std::string& config_path, const std::string& out) {
  ExperimentConfig cfg = load_experiment(config_path, 0, out);
  std::vector<CellResult> cells = run_matrix(cfg);
  std::size_t ok = 0;
  for (const CellResult& c : cells)
    if (c.ok) ++ok;
  std::cout << "matrix complete: " << ok << "/" << cells.size() << " cells ok; aggregate at "
            << cfg.out_dir << "/aggregate.csv\n";
  return ok == cells.size() ? kExitOk : kExitNumerical;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir,
               const std::string& config_path) {
  ExperimentConfig cfg = load_experiment(config_path, 0, "");
  std::vector<CellResult> cells;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (!entry.is_directory()) continue;
    const fs::path report_path = entry.path() / "run_report.json";
    if (!fs::exists(report_path)) continue;
    CellResult cell;
    cell.ok = true;
    cell.scenario = entry.path().filename().string();
    cell.report = load_run_report(report_path.string());
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) {
    std::cerr << "no run reports under " << in_dir << "\n";
    return kExitConfig;
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "aggregate.csv", aggregate_csv(cells));
  emit_figures(cells, cfg, out_dir);
  std::cout << "report written to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inrep-lab: GAN-conditioning numerical laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, modifier_path, out_file;
  std::uint64_t seed = 0;
  std::size_t cls = 0, count = 1000;

  CLI::App* c_land = app.add_subcommand("landscape", "closed-form failure landscapes");
  c_land->add_option("--out", out_dir, "output directory")->default_val("out/landscape");

  CLI::App* c_pu = app.add_subcommand("pu", "PU loss checks");
  CLI::App* c_pu_verify = c_pu->add_subcommand("verify", "equilibrium verification table");

  CLI::App* c_rep = app.add_subcommand("reprogram", "noise-reweighting demos");
  CLI::App* c_rep_demo = c_rep->add_subcommand("demo", "1D pushforward demo");
  c_rep_demo->add_option("--out", out_dir, "output directory")->default_val("out/reprogram");
  c_rep_demo->add_option("--seed", seed, "root seed")->default_val(1);

  CLI::App* c_pre = app.add_subcommand("pretrain", "pretrain the unconditional generator");
  c_pre->add_option("--config", config_path, "experiment config file");
  c_pre->add_option("--seed", seed, "seed override");
  c_pre->add_option("--out", out_dir, "output directory");

  CLI::App* c_cond = app.add_subcommand("condition", "run the conditioning loop");
  c_cond->add_option("--config", config_path, "experiment config file");
  c_cond->add_option("--seed", seed, "seed override");
  c_cond->add_option("--out", out_dir, "output directory");

  CLI::App* c_gen = app.add_subcommand("generate", "sample from a trained modifier");
  c_gen->add_option("--config", config_path, "experiment config file");
  c_gen->add_option("--modifier", modifier_path, "modifier checkpoint")->required();
  c_gen->add_option("--class", cls, "class id")->required();
  c_gen->add_option("--n", count, "sample count");
  c_gen->add_option("--seed", seed, "seed");
  c_gen->add_option("--out", out_file, "output CSV (stdout when omitted)");

  CLI::App* c_mat = app.add_subcommand("matrix", "run the full experiment matrix");
  c_mat->add_option("--config", config_path, "experiment config file");
  c_mat->add_option("--out", out_dir, "output directory override");

  CLI::App* c_report = app.add_subcommand("report", "aggregate persisted run reports");
  c_report->add_option("--in", in_dir, "directory of cell outputs")->required();
  c_report->add_option("--out", out_dir, "output directory")->default_val("out/report");
  c_report->add_option("--config", config_path, "experiment config (for figures)");

  try {
    app.parse(argc, argv);
    if (c_land->parsed()) return cmd_landscape(out_dir);
    if (c_pu->parsed() && c_pu_verify->parsed()) return cmd_pu_verify();
    if (c_rep->parsed() && c_rep_demo->parsed()) return cmd_reprogram(out_dir, seed);
    if (c_pre->parsed()) return cmd_pretrain(config_path, seed, out_dir);
    if (c_cond->parsed()) return cmd_condition(config_path, seed, out_dir);
    if (c_gen->parsed())
      return cmd_generate(config_path, modifier_path, cls, count, seed, out_file);
    if (c_mat->parsed()) return cmd_matrix(config_path, out_dir);
    if (c_report->parsed()) return cmd_report(in_dir, out_dir, config_path);
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const numerical_error& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
