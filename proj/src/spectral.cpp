#include "inrep/spectral.hpp"

#include <cmath>

#include "inrep/errors.hpp"
#include "inrep/rng.hpp"

namespace inrep {

namespace {

// sigma = ||w v|| after one v <- normalize(w^T w v) sweep.
double sweep(const Tensor& w, Tensor& v, Tensor& wv) {
  const std::size_t r = w.rows(), c = w.cols();
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* row = w.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * v[j];
    wv[i] = acc;
  }
  for (std::size_t j = 0; j < c; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += w.data()[i * c + j] * wv[i];
    v[j] = acc;
  }
  double norm = 0.0;
  for (std::size_t j = 0; j < c; ++j) norm += v[j] * v[j];
  norm = std::sqrt(norm);
  if (norm < 1e-300) return 0.0;
  for (std::size_t j = 0; j < c; ++j) v[j] /= norm;
  double sigma2 = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* row = w.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * v[j];
    wv[i] = acc;
    sigma2 += acc * acc;
  }
  return std::sqrt(sigma2);
}

void seed_vector(const Tensor& w, Tensor& v) {
  Rng rng(Rng::mix(0x5eedu, w.rows() * 1315423911u + w.cols()));
  double norm = 0.0;
  for (std::size_t j = 0; j < v.numel(); ++j) {
    v[j] = rng.normal();
    norm += v[j] * v[j];
  }
  norm = std::sqrt(norm);
  for (std::size_t j = 0; j < v.numel(); ++j) v[j] /= norm;
}

}  // namespace

double spectral_norm(const Tensor& w, int iters) {
  if (w.rank() != 2 || w.numel() == 0) throw usage_error("spectral_norm: empty matrix");
  if (iters < 1) throw usage_error("spectral_norm: iters must be >= 1");
  Tensor v({w.cols()});
  seed_vector(w, v);
  Tensor wv({w.rows()});
  double sigma = 0.0;
  for (int i = 0; i < iters; ++i) sigma = sweep(w, v, wv);
  return sigma;
}

double spectral_norm_warm(const Tensor& w, int iters, Tensor& u) {
  if (w.rank() != 2 || w.numel() == 0) throw usage_error("spectral_norm_warm: empty matrix");
  if (u.numel() != w.cols()) throw usage_error("spectral_norm_warm: u length != cols");
  double norm = 0.0;
  for (std::size_t j = 0; j < u.numel(); ++j) norm += u[j] * u[j];
  if (norm < 1e-12) seed_vector(w, u);
  Tensor wv({w.rows()});
  double sigma = 0.0;
  for (int i = 0; i < iters; ++i) sigma = sweep(w, u, wv);
  return sigma;
}

double project_spectral(Tensor& w, double cap, Tensor& u) {
  if (!(cap > 0.0)) throw usage_error("project_spectral: cap must be > 0");
  // Converge the estimate before rescaling so the true norm lands under cap.
  double sigma = spectral_norm_warm(w, 2, u);
  for (int i = 0; i < 500; ++i) {
    const double next = spectral_norm_warm(w, 1, u);
    const double diff = std::abs(next - sigma);
    sigma = next;
    if (diff <= 1e-13 * std::max(1.0, sigma)) break;
  }
  if (sigma > cap) {
    const double factor = cap / sigma * (1.0 - 1e-9);
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] *= factor;
    sigma *= factor;
  }
  return sigma;
}

}  // namespace inrep
