#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "inrep/adam.hpp"
#include "inrep/checkpoint.hpp"
#include "inrep/mlp.hpp"
#include "inrep/spectral.hpp"
#include "inrep/tape.hpp"

using namespace inrep;

namespace {

// One-sided Jacobi SVD: orthogonalise column pairs of a working copy; the
// singular values are the final column norms. Independent of power iteration.
double largest_singular_jacobi(const Tensor& w) {
  const std::size_t r = w.rows(), c = w.cols();
  std::vector<std::vector<double>> a(c, std::vector<double>(r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a[j][i] = w.at(i, j);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < c; ++p) {
      for (std::size_t q = p + 1; q < c; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
          alpha += a[p][i] * a[p][i];
          beta += a[q][i] * a[q][i];
          gamma += a[p][i] * a[q][i];
        }
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta + 1e-300));
        if (std::abs(gamma) < 1e-15 * std::sqrt(alpha * beta + 1e-300)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t), sn = cs * t;
        for (std::size_t i = 0; i < r; ++i) {
          const double tp = a[p][i];
          a[p][i] = cs * tp - sn * a[q][i];
          a[q][i] = sn * tp + cs * a[q][i];
        }
      }
    }
    if (off < 1e-14) break;
  }
  double best = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < r; ++i) norm += a[j][i] * a[j][i];
    best = std::max(best, std::sqrt(norm));
  }
  return best;
}

double frobenius(const Tensor& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.numel(); ++i) acc += w[i] * w[i];
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("forward identity and bias broadcast") {
  Rng rng(3);
  Mlp net = Mlp::make({3, 3}, Activation::identity, rng);
  net.weights[0] = Tensor::identity(3);
  net.biases[0].fill(0.0);
  Tensor x({2, 3}, {1.0, 2.0, 3.0, -1.0, 0.5, 4.0});
  Tensor y = net.eval(x);
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y[i] == x[i]);

  // Zero weights: every row equals the bias.
  net.weights[0].fill(0.0);
  net.biases[0] = Tensor({3}, {0.1, -0.2, 0.3});
  Tensor yb = net.eval(x);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(yb.at(i, 0) == doctest::Approx(0.1));
    CHECK(yb.at(i, 1) == doctest::Approx(-0.2));
    CHECK(yb.at(i, 2) == doctest::Approx(0.3));
  }
}

TEST_CASE("random tanh net: shape contract, finiteness, determinism") {
  Rng rng(7);
  Mlp net = Mlp::make({2, 8, 2}, Activation::tanh, rng);
  Rng xr(9);
  Tensor x({5, 2});
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = xr.normal();
  Tensor y1 = net.eval(x);
  Tensor y2 = net.eval(x);
  CHECK(y1.rows() == 5);
  CHECK(y1.cols() == 2);
  CHECK(y1.all_finite());
  for (std::size_t i = 0; i < y1.numel(); ++i) CHECK(y1[i] == y2[i]);

  // Recorded forward matches plain eval.
  Tape tape;
  Mlp::Bound bound = net.bind(tape, true);
  Var out = net.forward(tape, bound, tape.leaf(x, false));
  for (std::size_t i = 0; i < y1.numel(); ++i)
    CHECK(out.value()[i] == doctest::Approx(y1[i]).epsilon(1e-15));

  CHECK_THROWS_AS(net.eval(Tensor({2, 3})), usage_error);
}

TEST_CASE("backward: linear case and unreachable parameters") {
  // loss = sum(w . x) => grad w = x.
  Tape tape;
  Tensor x({1, 4}, {0.5, -1.0, 2.0, 3.0});
  Var xv = tape.leaf(x, false);
  Var wv = tape.leaf(Tensor({4, 1}, {0.1, 0.2, 0.3, 0.4}), true);
  Var unused = tape.leaf(Tensor({2, 2}), true);
  Var loss = tape.sum_all(tape.matmul(xv, wv));
  tape.backward(loss);
  for (std::size_t i = 0; i < 4; ++i) CHECK(wv.grad()[i] == doctest::Approx(x[i]));
  for (std::size_t i = 0; i < 4; ++i) CHECK(unused.grad()[i] == 0.0);

  CHECK_THROWS_AS(tape.backward(xv), usage_error);  // non-scalar
  Var stray;
  CHECK_THROWS_AS(stray.value(), usage_error);
}

TEST_CASE("gradient check across activations and depths") {
  std::mt19937_64 seeds(123);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t seed = seeds();
    Rng rng(seed);
    const Activation act = static_cast<Activation>(trial % 4);
    std::vector<std::size_t> widths;
    switch (trial % 3) {
      case 0: widths = {3, 5, 1}; break;
      case 1: widths = {2, 6, 4, 1}; break;
      default: widths = {4, 4, 1}; break;
    }
    Mlp net = Mlp::make(widths, act, rng);
    Tensor x({3, widths.front()});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();

    auto loss_value = [&](const Mlp& n) {
      Tensor out = n.eval(x);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.numel(); ++i) acc += out[i] * out[i];
      return acc / static_cast<double>(out.numel());
    };

    Tape tape;
    Mlp::Bound bound = net.bind(tape, true);
    Var out = net.forward(tape, bound, tape.leaf(x, false));
    Var loss = tape.mean_all(tape.mul(out, out));
    tape.backward(loss);

    // 20 random coordinates checked against central differences.
    std::vector<Tensor*> params = net.params();
    std::vector<const Tensor*> grads;
    for (std::size_t l = 0; l < bound.w.size(); ++l) {
      grads.push_back(&bound.w[l].grad());
      grads.push_back(&bound.b[l].grad());
    }
    Rng pick(seed ^ 0xabcdef);
    for (int probe = 0; probe < 20; ++probe) {
      const std::size_t p = pick.below(params.size());
      if (params[p]->numel() == 0) continue;
      const std::size_t idx = pick.below(params[p]->numel());
      const double h = 1e-5;
      Mlp plus = net, minus = net;
      (*plus.params()[p])[idx] += h;
      (*minus.params()[p])[idx] -= h;
      const double fd = (loss_value(plus) - loss_value(minus)) / (2.0 * h);
      const double an = (*grads[p])[idx];
      if (std::abs(fd) < 1e-10 && std::abs(an) < 1e-10) continue;
      const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
      CHECK(rel <= 1e-5);
    }
  }
}

TEST_CASE("gradients do not flow into constant leaves") {
  Rng rng(5);
  Mlp net = Mlp::make({2, 4, 1}, Activation::tanh, rng);
  Tape tape;
  Mlp::Bound frozen = net.bind(tape, false);
  Tensor x({2, 2}, {0.3, -0.7, 1.1, 0.2});
  Var xv = tape.leaf(x, true);
  Var loss = tape.mean_all(net.forward(tape, frozen, xv));
  tape.backward(loss);
  for (std::size_t l = 0; l < frozen.w.size(); ++l) {
    for (std::size_t i = 0; i < frozen.w[l].grad().numel(); ++i)
      CHECK(frozen.w[l].grad()[i] == 0.0);
  }
  // The input still receives gradient (flow-through).
  double total = 0.0;
  for (std::size_t i = 0; i < xv.grad().numel(); ++i) total += std::abs(xv.grad()[i]);
  CHECK(total > 0.0);
}

TEST_CASE("adam_step basics") {
  // Zero gradient: unchanged.
  AdamState st(AdamConfig{0.1, 0.5, 0.999, 1e-8}, {1});
  Tensor p({1}, {2.0});
  adam_step(st, p, Tensor({1}, {0.0}));
  CHECK(p[0] == doctest::Approx(2.0).epsilon(1e-12));

  // Unit gradient, first step: bias-corrected unit step scaled by lr.
  AdamState st2(AdamConfig{0.1, 0.5, 0.999, 1e-8}, {1});
  Tensor p2({1}, {1.0});
  adam_step(st2, p2, Tensor({1}, {1.0}));
  CHECK(p2[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));

  // Constant gradient moves parameter against its sign.
  AdamState st3(AdamConfig{0.01, 0.9, 0.999, 1e-8}, {1});
  Tensor p3({1}, {0.0});
  for (int i = 0; i < 100; ++i) adam_step(st3, p3, Tensor({1}, {3.0}));
  CHECK(p3[0] < -0.5);

  CHECK_THROWS_AS(adam_step(st3, p3, Tensor({2})), usage_error);
}

TEST_CASE("spectral_norm known matrices and SVD oracle") {
  CHECK(spectral_norm(Tensor::identity(3), 10) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor diag({2, 2}, {3.0, 0.0, 0.0, 1.0});
  CHECK(spectral_norm(diag, 100) == doctest::Approx(3.0).epsilon(1e-6));

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor w({8, 8});
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = normal(rng);
    const double est = spectral_norm(w, 200);
    const double oracle = largest_singular_jacobi(w);
    CHECK(est == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(est <= frobenius(w) + 1e-9);
  }

  CHECK_THROWS_AS(spectral_norm(Tensor(), 10), usage_error);
  CHECK_THROWS_AS(spectral_norm(Tensor::identity(2), 0), usage_error);
}

TEST_CASE("power iteration estimate is non-decreasing in iters") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor w({6, 9});
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = normal(rng);
  double prev = 0.0;
  for (int iters = 1; iters <= 40; ++iters) {
    const double est = spectral_norm(w, iters);
    CHECK(est >= prev - 1e-12);
    prev = est;
  }
}

TEST_CASE("project_spectral enforces the cap") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 2.0);
  Tensor w({12, 24});
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = normal(rng);
  Tensor u({24});
  project_spectral(w, 0.9, u);
  CHECK(spectral_norm(w, 300) <= 0.9 + 1e-9);
  CHECK(largest_singular_jacobi(w) <= 0.9 + 1e-9);
}

TEST_CASE("checkpoint round trip preserves parameters exactly") {
  Rng rng(31);
  Mlp net = Mlp::make({3, 7, 2}, Activation::relu, rng);
  Checkpoint ckpt;
  ckpt.kind = "mlp";
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    ckpt.add("w" + std::to_string(l), net.weights[l]);
    ckpt.add("b" + std::to_string(l), net.biases[l]);
  }
  Checkpoint back = Checkpoint::from_json(ckpt.to_json());
  CHECK(back.kind == "mlp");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Tensor& w = back.get("w" + std::to_string(l));
    REQUIRE(w.shape() == net.weights[l].shape());
    for (std::size_t i = 0; i < w.numel(); ++i) CHECK(w[i] == net.weights[l][i]);
  }
  CHECK_THROWS_AS(back.get("missing"), usage_error);

  // Digest changes when any parameter changes.
  const std::string d1 = parameter_digest(net.params());
  net.weights[0][0] += 1e-12;
  const std::string d2 = parameter_digest(net.params());
  CHECK(d1 != d2);
  CHECK(d1.size() == 64);
}

TEST_CASE("tape op edge cases") {
  Tape tape;
  Var a = tape.leaf(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}), true);
  Var b = tape.leaf(Tensor({2, 3}), false);
  CHECK_THROWS_AS(tape.add(a, b), usage_error);
  CHECK_THROWS_AS(tape.matmul(a, tape.leaf(Tensor({3, 2}), false)), usage_error);
  CHECK_THROWS_AS(tape.log_(tape.leaf(Tensor({1}, {-1.0}), false)), domain_error);

  // clamp gradient gate.
  Var c = tape.leaf(Tensor({3}, {-0.5, 0.5, 1.5}), true);
  Var clamped = tape.clamp(c, 0.0, 1.0);
  Var loss = tape.sum_all(clamped);
  tape.backward(loss);
  CHECK(c.grad()[0] == 0.0);
  CHECK(c.grad()[1] == 1.0);
  CHECK(c.grad()[2] == 0.0);

  // clip_nonpositive passes gradient only when negative.
  Tape t2;
  Var neg = t2.leaf(Tensor::scalar(-0.3), true);
  Var clipped = t2.clip_nonpositive(neg);
  CHECK(clipped.value()[0] == doctest::Approx(-0.3));
  t2.backward(clipped);
  CHECK(neg.grad()[0] == 1.0);

  Tape t3;
  Var pos = t3.leaf(Tensor::scalar(0.7), true);
  Var gated = t3.clip_nonpositive(pos);
  CHECK(gated.value()[0] == 0.0);
  t3.backward(gated);
  CHECK(pos.grad()[0] == 0.0);
}

TEST_CASE("select_rows accumulates into the right table rows") {
  Tape tape;
  Var table = tape.leaf(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}), true);
  Var rows = tape.select_rows(table, {1, 1, 2});
  CHECK(rows.value().at(0, 0) == 3.0);
  CHECK(rows.value().at(2, 1) == 6.0);
  Var loss = tape.sum_all(rows);
  tape.backward(loss);
  CHECK(table.grad().at(0, 0) == 0.0);
  CHECK(table.grad().at(1, 0) == 2.0);  // selected twice
  CHECK(table.grad().at(2, 0) == 1.0);
  CHECK_THROWS_AS(tape.select_rows(table, {5}), usage_error);
}
