#include "inrep/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace inrep {

namespace {

void check_2d(const Tensor& t, const char* where) {
  if (t.rank() != 2) throw usage_error(std::string(where) + ": expected rank-2 tensor");
}

}  // namespace

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> backward) {
  Node n;
  n.grad = Tensor(value.shape());
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  check_2d(A, "matmul");
  check_2d(B, "matmul");
  if (A.cols() != B.rows()) throw usage_error("matmul: inner dimensions differ");
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = A.data() + i * k;
    double* orow = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = B.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  const int ia = a.id_, ib = b.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [ia, ib, self, n, k, m](Tape& t) {
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& A = t.nodes_[ia].value;
    const Tensor& B = t.nodes_[ib].value;
    if (t.nodes_[ia].needs_grad) {
      Tensor& gA = t.nodes_[ia].grad;  // gA += G * B^T
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = G.data() + i * m;
        double* garow = gA.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = B.data() + p * m;
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
          garow[p] += acc;
        }
      }
    }
    if (t.nodes_[ib].needs_grad) {
      Tensor& gB = t.nodes_[ib].grad;  // gB += A^T * G
      for (std::size_t i = 0; i < n; ++i) {
        const double* arow = A.data() + i * k;
        const double* grow = G.data() + i * m;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = arow[p];
          if (av == 0.0) continue;
          double* gbrow = gB.data() + p * m;
          for (std::size_t j = 0; j < m; ++j) gbrow[j] += av * grow[j];
        }
      }
    }
  });
}

Var Tape::add_bias(Var x, Var bias) {
  const Tensor& X = node(x).value;
  const Tensor& B = node(bias).value;
  check_2d(X, "add_bias");
  if (B.numel() != X.cols()) throw usage_error("add_bias: bias length != columns");
  Tensor out = X;
  const std::size_t n = X.rows(), m = X.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.data()[i * m + j] += B[j];
  const int ix = x.id_, ibias = bias.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(x) || needs(bias), [ix, ibias, self, n, m](Tape& t) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.nodes_[ix].needs_grad) {
      Tensor& gX = t.nodes_[ix].grad;
      for (std::size_t i = 0; i < G.numel(); ++i) gX[i] += G[i];
    }
    if (t.nodes_[ibias].needs_grad) {
      Tensor& gB = t.nodes_[ibias].grad;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) gB[j] += G.data()[i * m + j];
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  if (!A.same_shape(B)) throw usage_error("add: shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += B[i];
  const int ia = a.id_, ib = b.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [ia, ib, self](Tape& t) {
    const Tensor& G = t.nodes_[self].grad;
    for (int id : {ia, ib}) {
      if (!t.nodes_[id].needs_grad) continue;
      Tensor& g = t.nodes_[id].grad;
      for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  if (!A.same_shape(B)) throw usage_error("sub: shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= B[i];
  const int ia = a.id_, ib = b.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [ia, ib, self](Tape& t) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.nodes_[ia].needs_grad) {
      Tensor& g = t.nodes_[ia].grad;
      for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i];
    }
    if (t.nodes_[ib].needs_grad) {
      Tensor& g = t.nodes_[ib].grad;
      for (std::size_t i = 0; i < G.numel(); ++i) g[i] -= G[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  if (!A.same_shape(B)) throw usage_error("mul: shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= B[i];
  const int ia = a.id_, ib = b.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [ia, ib, self](Tape& t) {
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& A = t.nodes_[ia].value;
    const Tensor& B = t.nodes_[ib].value;
    if (t.nodes_[ia].needs_grad) {
      Tensor& g = t.nodes_[ia].grad;
      for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i] * B[i];
    }
    if (t.nodes_[ib].needs_grad) {
      Tensor& g = t.nodes_[ib].grad;
      for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i] * A[i];
    }
  });
}

Var Tape::scale(Var a, double c) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self, c](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i) g[i] += c * G[i];
  });
}

Var Tape::add_const(Var a, double c) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += c;
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i];
  });
}

Var Tape::one_minus(Var a) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 - out[i];
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i) g[i] -= G[i];
  });
}

Var Tape::relu(Var a) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(0.0, out[i]);
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& A = t.nodes_[ia].value;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i)
      if (A[i] > 0.0) g[i] += G[i];
  });
}

Var Tape::tanh_(Var a) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& Y = t.nodes_[self].value;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i] * (1.0 - Y[i] * Y[i]);
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& Y = t.nodes_[self].value;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i] * Y[i] * (1.0 - Y[i]);
  });
}

Var Tape::log_(Var a) {
  const Tensor& A = node(a).value;
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) {
    if (!(out[i] > 0.0)) throw domain_error("log: non-positive input");
    out[i] = std::log(out[i]);
  }
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& A = t.nodes_[ia].value;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i) g[i] += G[i] / A[i];
  });
}

Var Tape::clamp(Var a, double lo, double hi) {
  Tensor out = node(a).value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::clamp(out[i], lo, hi);
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a), [ia, self, lo, hi](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& A = t.nodes_[ia].value;
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < G.numel(); ++i)
      if (A[i] >= lo && A[i] <= hi) g[i] += G[i];
  });
}

Var Tape::mean_all(Var a) {
  const Tensor& A = node(a).value;
  if (A.numel() == 0) throw usage_error("mean_all: empty tensor");
  double acc = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) acc += A[i];
  const double inv = 1.0 / static_cast<double>(A.numel());
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(Tensor::scalar(acc * inv), needs(a), [ia, self, inv](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const double G = t.nodes_[self].grad[0];
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += G * inv;
  });
}

Var Tape::sum_all(Var a) {
  const Tensor& A = node(a).value;
  double acc = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) acc += A[i];
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(Tensor::scalar(acc), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    const double G = t.nodes_[self].grad[0];
    Tensor& g = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += G;
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  check_2d(A, "concat_cols");
  check_2d(B, "concat_cols");
  if (A.rows() != B.rows()) throw usage_error("concat_cols: row count mismatch");
  const std::size_t n = A.rows(), p = A.cols(), q = B.cols();
  Tensor out({n, p + q});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) out.at(i, j) = A.at(i, j);
    for (std::size_t j = 0; j < q; ++j) out.at(i, p + j) = B.at(i, j);
  }
  const int ia = a.id_, ib = b.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(a) || needs(b), [ia, ib, self, n, p, q](Tape& t) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.nodes_[ia].needs_grad) {
      Tensor& g = t.nodes_[ia].grad;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) g.at(i, j) += G.at(i, j);
    }
    if (t.nodes_[ib].needs_grad) {
      Tensor& g = t.nodes_[ib].grad;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j) g.at(i, j) += G.at(i, p + j);
    }
  });
}

Var Tape::select_rows(Var table, std::vector<std::size_t> ids) {
  const Tensor& T = node(table).value;
  check_2d(T, "select_rows");
  for (std::size_t r : ids)
    if (r >= T.rows()) throw usage_error("select_rows: row index out of range");
  const std::size_t n = ids.size(), d = T.cols();
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = T.at(ids[i], j);
  const int it = table.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), needs(table),
              [it, self, ids = std::move(ids), d](Tape& t) {
                if (!t.nodes_[it].needs_grad) return;
                const Tensor& G = t.nodes_[self].grad;
                Tensor& g = t.nodes_[it].grad;
                for (std::size_t i = 0; i < ids.size(); ++i)
                  for (std::size_t j = 0; j < d; ++j) g.at(ids[i], j) += G.at(i, j);
              });
}

Var Tape::clip_nonpositive(Var a) {
  const Tensor& A = node(a).value;
  if (A.numel() != 1) throw usage_error("clip_nonpositive: expected a scalar");
  const double v = A[0];
  const int ia = a.id_;
  const int self = static_cast<int>(nodes_.size());
  return push(Tensor::scalar(std::min(0.0, v)), needs(a), [ia, self](Tape& t) {
    if (!t.nodes_[ia].needs_grad) return;
    if (t.nodes_[ia].value[0] < 0.0) t.nodes_[ia].grad[0] += t.nodes_[self].grad[0];
  });
}

Var Tape::custom(const std::vector<Var>& parents, Tensor value, CustomBackward backward) {
  bool any = false;
  std::vector<int> pids;
  pids.reserve(parents.size());
  for (Var p : parents) {
    check_owned(p);
    any = any || needs(p);
    pids.push_back(p.id_);
  }
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(value), any,
              [pids, self, backward = std::move(backward)](Tape& t) {
                std::vector<Tensor*> pgrads;
                std::vector<const Tensor*> pvals;
                for (int id : pids) {
                  pgrads.push_back(t.nodes_[id].needs_grad ? &t.nodes_[id].grad : nullptr);
                  pvals.push_back(&t.nodes_[id].value);
                }
                backward(t.nodes_[self].grad, pgrads, pvals);
              });
}

void Tape::backward(Var loss) {
  Node& last = node(loss);
  if (last.value.numel() != 1) throw usage_error("backward: loss must be a scalar");
  for (Node& n : nodes_) n.grad.fill(0.0);
  last.grad[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward) continue;
    n.backward(*this);
  }
}

}  // namespace inrep
