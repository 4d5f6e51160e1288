#include "artic/train/losses.hpp"

#include <cmath>
#include <memory>

namespace artic::train {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

num::Var<double> masked_mse(num::Var<double> pred, const MatX& target, const VecX& mask) {
  num::Tape<double>* t = pred.tape;
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw DimensionError("masked_mse: prediction/target shape mismatch");
  if (mask.size() != pred.cols()) throw DimensionError("masked_mse: mask length mismatch");
  const double frames = mask.sum();
  if (frames <= 0.0) throw DataError("masked_mse: every frame is masked out");
  const double count = frames * static_cast<double>(pred.rows());

  MatX diff = pred.value() - target;
  for (Eigen::Index c = 0; c < diff.cols(); ++c)
    if (mask(c) == 0.0) diff.col(c).setZero();
  MatX v(1, 1);
  v(0, 0) = diff.squaredNorm() / count;
  if (!t->needs_grad(pred.id)) return t->push(std::move(v), false, nullptr);

  auto dshared = std::make_shared<MatX>(std::move(diff));
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, pred, dshared, count, oid] {
    t->grad(pred.id) += (2.0 / count) * t->grad(oid)(0, 0) * (*dshared);
  });
}

num::Var<double> masked_rmse(num::Var<double> pred, const MatX& target, const VecX& mask) {
  return num::sqrt_scalar(masked_mse(pred, target, mask));
}

num::Var<double> stop_bce(num::Var<double> logits, const VecX& targets, const VecX& mask,
                          double pos_weight) {
  num::Tape<double>* t = logits.tape;
  if (logits.rows() != 1) throw DimensionError("stop_bce: logits must be 1 x T");
  if (targets.size() != logits.cols() || mask.size() != logits.cols())
    throw DimensionError("stop_bce: target/mask length mismatch");
  const double total = mask.sum();
  if (total <= 0.0) throw DataError("stop_bce: every frame is masked out");

  double acc = 0.0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (mask(i) == 0.0) continue;
    const double z = logits.value()(0, i);
    acc += pos_weight * targets(i) * softplus(-z) + (1.0 - targets(i)) * softplus(z);
  }
  MatX v(1, 1);
  v(0, 0) = acc / total;
  if (!t->needs_grad(logits.id)) return t->push(std::move(v), false, nullptr);

  auto tgt = std::make_shared<VecX>(targets);
  auto msk = std::make_shared<VecX>(mask);
  const auto oid = t->next_id();
  return t->push(std::move(v), true, [t, logits, tgt, msk, total, pos_weight, oid] {
    const double g = t->grad(oid)(0, 0);
    auto& gl = t->grad(logits.id);
    for (Eigen::Index i = 0; i < tgt->size(); ++i) {
      if ((*msk)(i) == 0.0) continue;
      const double z = logits.value()(0, i);
      gl(0, i) += g / total *
                  ((1.0 - (*tgt)(i)) * sigma(z) - pos_weight * (*tgt)(i) * sigma(-z));
    }
  });
}

double masked_rmse_loss(const num::TensorD& y_pred, const num::TensorD& y_true, const MatX& mask) {
  if (y_pred.shape() != y_true.shape() || y_pred.rank() != 3)
    throw DimensionError("masked_rmse_loss: [B,T,12] shape mismatch");
  const auto B = static_cast<Eigen::Index>(y_pred.dim(0));
  const auto T = static_cast<Eigen::Index>(y_pred.dim(1));
  const auto D = static_cast<Eigen::Index>(y_pred.dim(2));
  if (mask.rows() != B || mask.cols() != T)
    throw DimensionError("masked_rmse_loss: mask shape mismatch");
  double acc = 0.0, count = 0.0;
  const auto& p = y_pred.data();
  const auto& y = y_true.data();
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index t = 0; t < T; ++t) {
      if (mask(b, t) == 0.0) continue;
      count += static_cast<double>(D);
      for (Eigen::Index d = 0; d < D; ++d) {
        const Eigen::Index idx = b + B * (t + T * d);
        const double e = p(idx) - y(idx);
        acc += e * e;
      }
    }
  if (count == 0.0) throw DataError("masked_rmse_loss: every frame is masked out");
  return std::sqrt(acc / count);
}

VecX stop_targets(Eigen::Index true_length) {
  if (true_length < 1) throw DataError("stop_targets: zero-length target");
  VecX t = VecX::Zero(true_length);
  t(true_length - 1) = 1.0;
  return t;
}

double stop_token_loss(const MatX& stop_probs, const std::vector<Eigen::Index>& true_lengths,
                       const MatX& mask, double pos_weight) {
  const Eigen::Index B = stop_probs.rows(), T = stop_probs.cols();
  if (static_cast<Eigen::Index>(true_lengths.size()) != B)
    throw DimensionError("stop_token_loss: lengths size mismatch");
  if (mask.rows() != B || mask.cols() != T)
    throw DimensionError("stop_token_loss: mask shape mismatch");
  double acc = 0.0, count = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const Eigen::Index len = true_lengths[b];
    if (len < 1) throw DataError("stop_token_loss: zero-length target");
    if (len > T) throw DimensionError("stop_token_loss: length exceeds frames");
    for (Eigen::Index t = 0; t < len; ++t) {
      if (mask(b, t) == 0.0) continue;
      const double y = t == len - 1 ? 1.0 : 0.0;
      const double p = std::min(1.0 - 1e-12, std::max(1e-12, stop_probs(b, t)));
      acc += -(pos_weight * y * std::log(p) + (1.0 - y) * std::log1p(-p));
      count += 1.0;
    }
  }
  if (count == 0.0) throw DataError("stop_token_loss: every frame is masked out");
  return acc / count;
}

}  // namespace artic::train
