#include "inrep/puloss.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace inrep {

namespace {

constexpr double kScoreEps = 1e-7;  // clamp margin used by bruteforce scoring

void check_scores(const std::vector<double>& scores, const char* where) {
  for (double s : scores)
    if (!(s > 0.0 && s < 1.0)) throw domain_error(std::string(where) + ": score outside (0,1)");
}

double mean_log(const std::vector<double>& xs, bool one_minus) {
  double acc = 0.0;
  for (double x : xs) acc += std::log(one_minus ? 1.0 - x : x);
  return acc / static_cast<double>(xs.size());
}

}  // namespace

double pu_value_population(const DiscreteDist& p_data, const DiscreteDist& p_gen,
                           const std::vector<double>& d_scores, const PuConfig& cfg) {
  if (p_data.size() != p_gen.size() || p_data.size() != d_scores.size())
    throw usage_error("pu_value_population: atom count mismatch");
  check_scores(d_scores, "pu_value_population");
  double e_data_log_d = 0.0, e_gen_log_1md = 0.0, e_data_log_1md = 0.0;
  for (std::size_t i = 0; i < d_scores.size(); ++i) {
    e_data_log_d += p_data.probs[i] * std::log(d_scores[i]);
    e_gen_log_1md += p_gen.probs[i] * std::log(1.0 - d_scores[i]);
    e_data_log_1md += p_data.probs[i] * std::log(1.0 - d_scores[i]);
  }
  return (1.0 + cfg.pi) * e_data_log_d + e_gen_log_1md - cfg.pi * e_data_log_1md;
}

double pu_value_empirical(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores, const PuConfig& cfg) {
  if (real_scores.empty() || fake_scores.empty())
    throw usage_error("pu_value_empirical: empty score list");
  check_scores(real_scores, "pu_value_empirical");
  check_scores(fake_scores, "pu_value_empirical");
  const double real_term = (1.0 + cfg.pi) * mean_log(real_scores, false);
  const double residual =
      mean_log(fake_scores, true) - cfg.pi * mean_log(real_scores, true);
  if (cfg.clip) return real_term + std::min(0.0, residual);
  return real_term + residual;
}

double optimal_discriminator(double p_data_at_x, double p_gf_at_x, double pi) {
  if (!(p_data_at_x >= 0.0 && p_gf_at_x >= 0.0))
    throw domain_error("optimal_discriminator: negative density");
  if (!(pi >= 0.0 && pi <= 1.0)) throw domain_error("optimal_discriminator: pi outside [0,1]");
  const double num = (1.0 + pi) * p_data_at_x;
  const double den = num + (1.0 - pi) * p_gf_at_x;
  if (den == 0.0) throw domain_error("optimal_discriminator: both densities zero");
  return num / den;
}

double equilibrium_value(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw domain_error("equilibrium_value: pi outside [0,1]");
  auto xlogy = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); };
  return xlogy(1.0 + pi, (1.0 + pi) / 2.0) + xlogy(1.0 - pi, (1.0 - pi) / 2.0);
}

BruteforceResult bruteforce_equilibrium(const DiscreteDist& p_data, double pi,
                                        double grid_step) {
  const std::size_t k = p_data.size();
  if (k < 2 || k > 4) throw usage_error("bruteforce_equilibrium: need 2..4 atoms");
  const double inv = 1.0 / grid_step;
  const long n = std::lround(inv);
  if (!(grid_step > 0.0) || std::abs(inv - static_cast<double>(n)) > 1e-9)
    throw usage_error("bruteforce_equilibrium: grid_step must divide 1");

  // Score a candidate p_gf at its optimal discriminator. p_gen is the implied
  // mixture pi*p_data + (1-pi)*p_gf, so this is the discriminator-optimal
  // population value the generator wants small.
  auto value_at_opt = [&](const std::vector<double>& gf) {
    std::vector<double> scores(k), gen(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double num = (1.0 + pi) * p_data.probs[i];
      const double den = num + (1.0 - pi) * gf[i];
      double d = den == 0.0 ? 0.5 : num / den;  // atom with no mass at all: score moot
      scores[i] = std::clamp(d, kScoreEps, 1.0 - kScoreEps);
      gen[i] = pi * p_data.probs[i] + (1.0 - pi) * gf[i];
    }
    return pu_value_population(p_data, DiscreteDist(gen), scores, PuConfig(pi));
  };

  BruteforceResult best{DiscreteDist(std::vector<double>(k, 1.0 / static_cast<double>(k))),
                        0.0};
  bool have = false;
  std::vector<long> counts(k, 0);
  std::vector<double> gf(k, 0.0);
  // Enumerate compositions of n into k parts in lexicographic order; the first
  // optimum found wins ties.
  auto consider = [&]() {
    for (std::size_t i = 0; i < k; ++i) gf[i] = static_cast<double>(counts[i]) * grid_step;
    const double v = value_at_opt(gf);
    if (!have || v < best.best_value - 1e-15) {
      best.best_gf = DiscreteDist(gf);
      best.best_value = v;
      have = true;
    }
  };
  std::function<void(std::size_t, long)> rec = [&](std::size_t idx, long left) {
    if (idx + 1 == k) {
      counts[idx] = left;
      consider();
      return;
    }
    for (long c = 0; c <= left; ++c) {
      counts[idx] = c;
      rec(idx + 1, left - c);
    }
  };
  rec(0, n);
  return best;
}

}  // namespace inrep
