#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "artic/common.hpp"
#include "artic/num/param_store.hpp"
#include "artic/num/rng.hpp"
#include "artic/num/tensor.hpp"

namespace artic::num {

template <typename Scalar>
class Tape;

// Handle into a recorded computation trace. Cheap to copy, invalid after
// Tape::reset().
template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  std::int32_t id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Mat<Scalar>& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar scalar() const;
};

// Reverse-mode autodiff over a linear trace of nodes. Values are computed
// eagerly at record time; each node carries a closure that scatters its
// output gradient to its inputs. Construction order is topological, so
// backward() is a single reverse sweep.
template <typename Scalar>
class Tape {
 public:
  using M = Mat<Scalar>;

  struct Node {
    M value;
    M grad;  // allocated on first touch
    std::function<void()> backward;
    bool requires_grad = false;
    bool grad_live = false;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(M v) { return push(std::move(v), false, nullptr); }

  Var<Scalar> leaf(M v) { return push(std::move(v), true, nullptr); }

  // Registers a parameter tensor viewed as rows = product of the first
  // `split` dims, cols = rest (default: first dim as rows). After
  // backward(), accumulate_param_grads() adds leaf gradients into the store
  // in registration order (fixed reduction order).
  Var<Scalar> param(ParameterStore<Scalar>& ps, const std::string& path, std::size_t split = 1) {
    auto& entry = ps.at(path);
    if (entry.value.rank() == 0) split = 0;
    Var<Scalar> v = leaf(entry.value.view2d(split));
    if (entry.trainable) bindings_.push_back({v.id, &entry.grad});
    return v;
  }

  // Convenience for [K, C_in, C_out] convolution kernels: (K*C_in) x C_out.
  Var<Scalar> param_kernel(ParameterStore<Scalar>& ps, const std::string& path) {
    return param(ps, path, 2);
  }

  // Id the next push() will get; lets op closures name their own output.
  std::int32_t next_id() const { return static_cast<std::int32_t>(nodes_.size()); }

  Var<Scalar> push(M value, bool requires_grad, std::function<void()> backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && grad_enabled_;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var<Scalar>{this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  // Inference tapes skip closure recording entirely.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

  const M& value(std::int32_t id) const { return nodes_[id].value; }
  bool needs_grad(std::int32_t id) const { return nodes_[id].requires_grad; }

  // Gradient buffer, zero-initialised to the value's dimensions.
  M& grad(std::int32_t id) {
    Node& n = nodes_[id];
    if (!n.grad_live) {
      n.grad.setZero(n.value.rows(), n.value.cols());
      n.grad_live = true;
    }
    return n.grad;
  }

  void backward(Var<Scalar> root) {
    if (root.tape != this) throw DimensionError("backward: var from another tape");
    Node& r = nodes_[root.id];
    if (r.value.size() != 1) throw DimensionError("backward: root must be scalar");
    grad(root.id)(0, 0) = Scalar(1);
    for (std::int32_t i = root.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.grad_live && n.requires_grad && n.backward) n.backward();
    }
  }

  void accumulate_param_grads() {
    for (auto& [id, grad_tensor] : bindings_) {
      Node& n = nodes_[id];
      if (!n.grad_live) continue;
      grad_tensor->data() += Eigen::Map<const Vec<Scalar>>(n.grad.data(), n.grad.size());
    }
  }

  void reset() {
    nodes_.clear();
    bindings_.clear();
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<std::int32_t, Tensor<Scalar>*>> bindings_;
  bool grad_enabled_ = true;
};

template <typename Scalar>
const Mat<Scalar>& Var<Scalar>::value() const {
  return tape->value(id);
}

template <typename Scalar>
Scalar Var<Scalar>::scalar() const {
  const auto& v = value();
  if (v.size() != 1) throw DimensionError("Var::scalar on non-scalar value");
  return v(0, 0);
}

// ---------------------------------------------------------------------------
// Op library. Free functions; each records one node.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
inline Tape<Scalar>* same_tape(Var<Scalar> a, Var<Scalar> b) {
  if (a.tape != b.tape) throw DimensionError("vars belong to different tapes");
  return a.tape;
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  if (!rg) return t->push(a.value() + b.value(), false, nullptr);
  const auto oid = t->next_id();
  return t->push(a.value() + b.value(), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id) += g;
    if (t->needs_grad(b.id)) t->grad(b.id) += g;
  });
}

template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("sub: shape mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  if (!rg) return t->push(a.value() - b.value(), false, nullptr);
  const auto oid = t->next_id();
  return t->push(a.value() - b.value(), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id) += g;
    if (t->needs_grad(b.id)) t->grad(b.id) -= g;
  });
}

// Hadamard product.
template <typename Scalar>
Var<Scalar> cmul(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("cmul: shape mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  Mat<Scalar> v = a.value().cwiseProduct(b.value());
  if (!rg) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id) += g.cwiseProduct(b.value());
    if (t->needs_grad(b.id)) t->grad(b.id) += g.cwiseProduct(a.value());
  });
}

// Matrix product A * B.
template <typename Scalar>
Var<Scalar> operator*(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimension mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  Mat<Scalar> v = a.value() * b.value();
  if (!rg) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id).noalias() += g * b.value().transpose();
    if (t->needs_grad(b.id)) t->grad(b.id).noalias() += a.value().transpose() * g;
  });
}

// A^T * B without materialising the transpose.
template <typename Scalar>
Var<Scalar> matmul_tn(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: dimension mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  Mat<Scalar> v = a.value().transpose() * b.value();
  if (!rg) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id).noalias() += b.value() * g.transpose();
    if (t->needs_grad(b.id)) t->grad(b.id).noalias() += a.value() * g;
  });
}

// A * B^T.
template <typename Scalar>
Var<Scalar> matmul_nt(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: dimension mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  Mat<Scalar> v = a.value() * b.value().transpose();
  if (!rg) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id).noalias() += g * b.value();
    if (t->needs_grad(b.id)) t->grad(b.id).noalias() += g.transpose() * a.value();
  });
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar c) {
  Tape<Scalar>* t = a.tape;
  if (!t->needs_grad(a.id)) return t->push(a.value() * c, false, nullptr);
  const auto oid = t->next_id();
  return t->push(a.value() * c, true, [t, a, c, oid] { t->grad(a.id) += t->grad(oid) * c; });
}

// Broadcast-add a column vector to every column.
template <typename Scalar>
Var<Scalar> add_colvec(Var<Scalar> a, Var<Scalar> v) {
  Tape<Scalar>* t = detail::same_tape(a, v);
  if (v.cols() != 1 || v.rows() != a.rows()) throw DimensionError("add_colvec: shape mismatch");
  bool rg = t->needs_grad(a.id) || t->needs_grad(v.id);
  Mat<Scalar> out = a.value().colwise() + Vec<Scalar>(v.value().col(0));
  if (!rg) return t->push(std::move(out), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(out), true, [t, a, v, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id) += g;
    if (t->needs_grad(v.id)) t->grad(v.id) += g.rowwise().sum();
  });
}

// Fused W * X + b (bias broadcast over columns). Pass an invalid Var to skip
// the bias.
template <typename Scalar>
Var<Scalar> affine(Var<Scalar> w, Var<Scalar> x, Var<Scalar> b = {}) {
  Tape<Scalar>* t = detail::same_tape(w, x);
  if (w.cols() != x.rows()) throw DimensionError("affine: weight/input mismatch");
  bool has_bias = b.valid();
  if (has_bias && (b.cols() != 1 || b.rows() != w.rows()))
    throw DimensionError("affine: bias shape mismatch");
  bool rg = t->needs_grad(w.id) || t->needs_grad(x.id) || (has_bias && t->needs_grad(b.id));
  Mat<Scalar> out = w.value() * x.value();
  if (has_bias) out.colwise() += Vec<Scalar>(b.value().col(0));
  if (!rg) return t->push(std::move(out), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(out), true, [t, w, x, b, has_bias, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(w.id)) t->grad(w.id).noalias() += g * x.value().transpose();
    if (t->needs_grad(x.id)) t->grad(x.id).noalias() += w.value().transpose() * g;
    if (has_bias && t->needs_grad(b.id)) t->grad(b.id) += g.rowwise().sum();
  });
}

template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  Tape<Scalar>* t = a.tape;
  Mat<Scalar> v = ((-a.value().array()).exp() + Scalar(1)).inverse().matrix();
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, oid] {
    const auto& y = t->value(oid).array();
    t->grad(a.id).array() += t->grad(oid).array() * y * (Scalar(1) - y);
  });
}

template <typename Scalar>
Var<Scalar> tanh_of(Var<Scalar> a) {
  Tape<Scalar>* t = a.tape;
  Mat<Scalar> v = a.value().array().tanh().matrix();
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, oid] {
    const auto& y = t->value(oid).array();
    t->grad(a.id).array() += t->grad(oid).array() * (Scalar(1) - y * y);
  });
}

template <typename Scalar>
Var<Scalar> relu(Var<Scalar> a) {
  Tape<Scalar>* t = a.tape;
  Mat<Scalar> v = a.value().cwiseMax(Scalar(0));
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, oid] {
    t->grad(a.id).array() +=
        t->grad(oid).array() * (a.value().array() > Scalar(0)).template cast<Scalar>();
  });
}

// Softmax over all entries; input must be a row or column vector.
template <typename Scalar>
Var<Scalar> softmax_vec(Var<Scalar> a) {
  Tape<Scalar>* t = a.tape;
  if (a.value().size() == 0) throw DimensionError("softmax: empty input");
  if (a.rows() != 1 && a.cols() != 1) throw DimensionError("softmax: expected a vector");
  Mat<Scalar> v = (a.value().array() - a.value().maxCoeff()).exp().matrix();
  v /= v.sum();
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, oid] {
    const auto& y = t->value(oid);
    const auto& g = t->grad(oid);
    Scalar dot = (y.array() * g.array()).sum();
    t->grad(a.id).array() += y.array() * (g.array() - dot);
  });
}

template <typename Scalar>
Var<Scalar> sum_all(Var<Scalar> a) {
  Tape<Scalar>* t = a.tape;
  Mat<Scalar> v(1, 1);
  v(0, 0) = a.value().sum();
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true,
                 [t, a, oid] { t->grad(a.id).array() += t->grad(oid)(0, 0); });
}

template <typename Scalar>
Var<Scalar> sqrt_scalar(Var<Scalar> a) {
  Tape<Scalar>* t = a.tape;
  if (a.value().size() != 1) throw DimensionError("sqrt_scalar: expected scalar");
  Mat<Scalar> v(1, 1);
  v(0, 0) = std::sqrt(a.value()(0, 0));
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, oid] {
    Scalar y = t->value(oid)(0, 0);
    // derivative clamped near zero; a zero-loss fit has no useful direction
    t->grad(a.id)(0, 0) += t->grad(oid)(0, 0) / (Scalar(2) * std::max(y, Scalar(1e-15)));
  });
}

template <typename Scalar>
Var<Scalar> concat_rows(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>* t = detail::same_tape(a, b);
  if (a.cols() != b.cols()) throw DimensionError("concat_rows: column mismatch");
  Mat<Scalar> v(a.rows() + b.rows(), a.cols());
  v.topRows(a.rows()) = a.value();
  v.bottomRows(b.rows()) = b.value();
  bool rg = t->needs_grad(a.id) || t->needs_grad(b.id);
  if (!rg) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, b, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(a.id)) t->grad(a.id) += g.topRows(a.rows());
    if (t->needs_grad(b.id)) t->grad(b.id) += g.bottomRows(b.rows());
  });
}

template <typename Scalar>
Var<Scalar> slice_rows(Var<Scalar> a, Eigen::Index r0, Eigen::Index nrows) {
  Tape<Scalar>* t = a.tape;
  if (r0 < 0 || r0 + nrows > a.rows()) throw DimensionError("slice_rows: out of range");
  Mat<Scalar> v = a.value().middleRows(r0, nrows);
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, r0, nrows, oid] {
    t->grad(a.id).middleRows(r0, nrows) += t->grad(oid);
  });
}

// Horizontal stack of equal-height columns blocks.
template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: empty list");
  Tape<Scalar>* t = parts[0].tape;
  Eigen::Index rows = parts[0].rows(), cols = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p.tape != t) throw DimensionError("concat_cols: mixed tapes");
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch");
    cols += p.cols();
    rg = rg || t->needs_grad(p.id);
  }
  Mat<Scalar> v(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    v.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  if (!rg) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  auto list = std::make_shared<std::vector<Var<Scalar>>>(parts);
  return t->push(std::move(v), true, [t, list, oid] {
    const auto& g = t->grad(oid);
    Eigen::Index c = 0;
    for (const auto& p : *list) {
      if (t->needs_grad(p.id)) t->grad(p.id) += g.middleCols(c, p.cols());
      c += p.cols();
    }
  });
}

// Inverted dropout; mask drawn from `rng` at record time.
template <typename Scalar>
Var<Scalar> dropout(Var<Scalar> a, double rate, Rng& rng) {
  Tape<Scalar>* t = a.tape;
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ConfigError("dropout: rate must be < 1");
  auto mask = std::make_shared<Mat<Scalar>>(a.rows(), a.cols());
  const Scalar keep = Scalar(1.0 - rate);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      (*mask)(i, j) = rng.uniform() < rate ? Scalar(0) : Scalar(1) / keep;
  Mat<Scalar> v = a.value().cwiseProduct(*mask);
  if (!t->needs_grad(a.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, a, mask, oid] {
    t->grad(a.id) += t->grad(oid).cwiseProduct(*mask);
  });
}

// Patch extraction for 1-D convolution over the column (time/token) axis.
// Input C x T, output (K*C) x T with zero padding, stride 1, K odd.
// Patch row k + K*c corresponds to input channel c at offset k - (K-1)/2.
template <typename Scalar>
Var<Scalar> im2col(Var<Scalar> x, int kernel) {
  Tape<Scalar>* t = x.tape;
  if (kernel < 1 || kernel % 2 == 0)
    throw ConfigError("conv1d: kernel width must be odd for same padding");
  const Eigen::Index C = x.rows(), T = x.cols(), K = kernel, off = (kernel - 1) / 2;
  Mat<Scalar> v = Mat<Scalar>::Zero(K * C, T);
  const auto& xv = x.value();
  for (Eigen::Index tt = 0; tt < T; ++tt)
    for (Eigen::Index k = 0; k < K; ++k) {
      Eigen::Index src = tt + k - off;
      if (src < 0 || src >= T) continue;
      for (Eigen::Index c = 0; c < C; ++c) v(k + K * c, tt) = xv(c, src);
    }
  if (!t->needs_grad(x.id)) return t->push(std::move(v), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, x, K, C, T, off, oid] {
    const auto& g = t->grad(oid);
    auto& gx = t->grad(x.id);
    for (Eigen::Index tt = 0; tt < T; ++tt)
      for (Eigen::Index k = 0; k < K; ++k) {
        Eigen::Index src = tt + k - off;
        if (src < 0 || src >= T) continue;
        for (Eigen::Index c = 0; c < C; ++c) gx(c, src) += g(k + K * c, tt);
      }
  });
}

// 1-D convolution over columns: x is C_in x T, kernel_mat is (K*C_in) x C_out
// (the 2-D view of a [K, C_in, C_out] tensor), bias optional (C_out).
template <typename Scalar>
Var<Scalar> conv1d_seq(Var<Scalar> x, Var<Scalar> kernel_mat, int kernel, Var<Scalar> bias = {}) {
  Var<Scalar> patches = im2col(x, kernel);
  if (kernel_mat.rows() != patches.rows())
    throw DimensionError("conv1d: kernel does not match input channels");
  Var<Scalar> y = matmul_tn(kernel_mat, patches);
  if (bias.valid()) y = add_colvec(y, bias);
  return y;
}

// Running statistics for batch normalisation (not learned by gradient).
template <typename Scalar>
struct RunningStats {
  Vec<Scalar> mean;
  Vec<Scalar> var;

  void init(Eigen::Index channels) {
    mean = Vec<Scalar>::Zero(channels);
    var = Vec<Scalar>::Ones(channels);
  }
};

template <typename Scalar>
struct RunningStatsRef {
  Vec<Scalar>* mean = nullptr;
  Vec<Scalar>* var = nullptr;
};

// Batch normalisation over the column axis (per-row statistics), training
// mode: population mean/variance of the current sequence. Epsilon acts as a
// variance floor, so an already-standardised input passes through unchanged
// and a constant channel maps to zeros. Running stats are updated only when
// `update` is non-null.
template <typename Scalar>
Var<Scalar> batchnorm_train(Var<Scalar> x, Var<Scalar> gamma, Var<Scalar> beta, Scalar eps,
                            RunningStatsRef<Scalar> update = {}, Scalar momentum = Scalar(0.1)) {
  Tape<Scalar>* t = x.tape;
  const Eigen::Index C = x.rows(), T = x.cols();
  if (T < 2) throw DimensionError("batchnorm: training mode needs at least 2 frames");
  if (gamma.rows() != C || beta.rows() != C) throw DimensionError("batchnorm: param shape");
  Vec<Scalar> mu = x.value().rowwise().mean();
  Mat<Scalar> centered = x.value().colwise() - mu;
  Vec<Scalar> var = centered.array().square().matrix().rowwise().mean();
  auto active = std::make_shared<Vec<Scalar>>(
      (var.array() > eps).template cast<Scalar>().matrix());
  auto inv_std =
      std::make_shared<Vec<Scalar>>((var.array().max(eps).sqrt()).inverse().matrix());
  auto xhat = std::make_shared<Mat<Scalar>>(
      (centered.array().colwise() * inv_std->array()).matrix());
  if (update.mean) {
    *update.mean = (Scalar(1) - momentum) * (*update.mean) + momentum * mu;
    *update.var = (Scalar(1) - momentum) * (*update.var) + momentum * var;
  }
  Mat<Scalar> y = ((xhat->array().colwise() * gamma.value().col(0).array()).colwise() +
                   beta.value().col(0).array())
                      .matrix();
  bool rg = t->needs_grad(x.id) || t->needs_grad(gamma.id) || t->needs_grad(beta.id);
  if (!rg) return t->push(std::move(y), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(y), true, [t, x, gamma, beta, xhat, inv_std, active, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(beta.id)) t->grad(beta.id) += g.rowwise().sum();
    if (t->needs_grad(gamma.id))
      t->grad(gamma.id) += g.cwiseProduct(*xhat).rowwise().sum();
    if (t->needs_grad(x.id)) {
      Mat<Scalar> dxhat = (g.array().colwise() * gamma.value().col(0).array()).matrix();
      Vec<Scalar> m1 = dxhat.rowwise().mean();
      // the variance path is dead where the floor is active
      Vec<Scalar> m2 = dxhat.cwiseProduct(*xhat).rowwise().mean().cwiseProduct(*active);
      Mat<Scalar> dx = dxhat;
      dx.colwise() -= m1;
      dx -= (xhat->array().colwise() * m2.array()).matrix();
      t->grad(x.id) += (dx.array().colwise() * inv_std->array()).matrix();
    }
  });
}

// Inference mode: normalise with stored running statistics.
template <typename Scalar>
Var<Scalar> batchnorm_infer(Var<Scalar> x, Var<Scalar> gamma, Var<Scalar> beta,
                            const Vec<Scalar>& run_mean, const Vec<Scalar>& run_var, Scalar eps) {
  Tape<Scalar>* t = x.tape;
  const Eigen::Index C = x.rows();
  if (gamma.rows() != C || beta.rows() != C || run_mean.size() != C)
    throw DimensionError("batchnorm: param shape");
  auto inv_std =
      std::make_shared<Vec<Scalar>>((run_var.array().max(eps).sqrt()).inverse().matrix());
  auto xhat = std::make_shared<Mat<Scalar>>(
      ((x.value().colwise() - run_mean).array().colwise() * inv_std->array()).matrix());
  Mat<Scalar> y = ((xhat->array().colwise() * gamma.value().col(0).array()).colwise() +
                   beta.value().col(0).array())
                      .matrix();
  bool rg = t->needs_grad(x.id) || t->needs_grad(gamma.id) || t->needs_grad(beta.id);
  if (!rg) return t->push(std::move(y), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(y), true, [t, x, gamma, beta, xhat, inv_std, oid] {
    const auto& g = t->grad(oid);
    if (t->needs_grad(beta.id)) t->grad(beta.id) += g.rowwise().sum();
    if (t->needs_grad(gamma.id)) t->grad(gamma.id) += g.cwiseProduct(*xhat).rowwise().sum();
    if (t->needs_grad(x.id)) {
      Vec<Scalar> gi = gamma.value().col(0).cwiseProduct(*inv_std);
      t->grad(x.id) += (g.array().colwise() * gi.array()).matrix();
    }
  });
}

}  // namespace artic::num
