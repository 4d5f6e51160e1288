#include "artic/feat/features.hpp"

#include <cmath>

namespace artic::feat {

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::kPhn: return "phn";
    case FeatureKind::kTphn: return "tphn";
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kMfccTphn: return "mfcc_tphn";
  }
  return "?";
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "phn") return FeatureKind::kPhn;
  if (name == "tphn") return FeatureKind::kTphn;
  if (name == "mfcc") return FeatureKind::kMfcc;
  if (name == "mfcc_tphn") return FeatureKind::kMfccTphn;
  throw ConfigError("unknown feature kind '" + name + "'");
}

int feature_width(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kPhn:
    case FeatureKind::kTphn: return PhonemeInventory::kSize;
    case FeatureKind::kMfcc: return 13;
    case FeatureKind::kMfccTphn: return 13 + PhonemeInventory::kSize;
  }
  return 0;
}

FeatureMatrix encode_phn(const corpus::PhonemeAlignment& alignment) {
  if (alignment.empty()) throw DataError("encode_phn: empty alignment");
  const auto& inv = PhonemeInventory::instance();
  FeatureMatrix out;
  out.kind = FeatureKind::kPhn;
  out.frame_period_s = 0.0;
  out.rows = MatX::Zero(static_cast<Eigen::Index>(alignment.size()) + 1, PhonemeInventory::kSize);
  out.rows(0, PhonemeInventory::kStartIndex) = 1.0;
  for (std::size_t i = 0; i < alignment.size(); ++i)
    out.rows(static_cast<Eigen::Index>(i) + 1, inv.index(alignment.intervals[i].phoneme)) = 1.0;
  return out;
}

FeatureMatrix expand_tphn(const corpus::PhonemeAlignment& alignment, double frame_period_s) {
  alignment.validate();
  const auto& inv = PhonemeInventory::instance();
  const Eigen::Index frames =
      static_cast<Eigen::Index>(std::llround(alignment.total_duration_s() / frame_period_s));
  if (frames < 1) throw DataError("expand_tphn: alignment shorter than one frame");
  FeatureMatrix out;
  out.kind = FeatureKind::kTphn;
  out.frame_period_s = frame_period_s;
  out.rows = MatX::Zero(frames, PhonemeInventory::kSize);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double left_edge = static_cast<double>(t) * frame_period_s;
    const auto& iv = alignment.intervals[alignment.index_at(left_edge)];
    out.rows(t, inv.index(iv.phoneme)) = 1.0;
  }
  return out;
}

FeatureMatrix concat_features(const FeatureMatrix& mfcc, const FeatureMatrix& tphn) {
  if (mfcc.kind != FeatureKind::kMfcc || tphn.kind != FeatureKind::kTphn)
    throw ConfigError("concat_features expects (mfcc, tphn) inputs");
  const Eigen::Index na = mfcc.count(), nb = tphn.count();
  if (std::abs(na - nb) > 2)
    throw DataError("concat_features: frame counts differ by " + std::to_string(std::abs(na - nb)) +
                    " (max 2); inputs are misaligned");
  const Eigen::Index n = std::min(na, nb);
  FeatureMatrix out;
  out.kind = FeatureKind::kMfccTphn;
  out.frame_period_s = tphn.frame_period_s;
  out.rows.resize(n, mfcc.width() + tphn.width());
  out.rows.leftCols(mfcc.width()) = mfcc.rows.topRows(n);
  out.rows.rightCols(tphn.width()) = tphn.rows.topRows(n);
  return out;
}

PaddedBatch pad_batch(const std::vector<FeatureMatrix>& features, const std::vector<MatX>& targets,
                      const std::vector<std::string>& ids, Eigen::Index max_len) {
  if (features.empty()) throw DataError("pad_batch: empty batch");
  if (features.size() != targets.size() || features.size() != ids.size())
    throw DimensionError("pad_batch: features/targets/ids size mismatch");

  std::string over;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].count() > max_len || targets[i].rows() > max_len)
      over += (over.empty() ? "" : ", ") + ids[i];
  }
  if (!over.empty())
    throw DataError("pad_batch: utterances exceed " + std::to_string(max_len) +
                    " frames: " + over);

  const auto B = static_cast<std::size_t>(features.size());
  const Eigen::Index D = features[0].width();
  PaddedBatch batch;
  batch.inputs = num::TensorD({B, static_cast<std::size_t>(max_len), static_cast<std::size_t>(D)});
  batch.targets = num::TensorD({B, static_cast<std::size_t>(max_len), 12});
  batch.mask = MatX::Zero(static_cast<Eigen::Index>(B), max_len);
  batch.lengths.resize(B);

  // [B, T, D] with the first index fastest: element (b, t, d) at b + B*(t + max_len*d)
  auto& in = batch.inputs.data();
  auto& tg = batch.targets.data();
  for (std::size_t b = 0; b < B; ++b) {
    if (features[b].width() != D) throw DimensionError("pad_batch: inconsistent feature widths");
    if (targets[b].cols() != 12) throw DimensionError("pad_batch: targets must have 12 channels");
    const Eigen::Index len = std::min(features[b].count(), targets[b].rows());
    batch.lengths[b] = len;
    for (Eigen::Index t = 0; t < len; ++t) {
      batch.mask(static_cast<Eigen::Index>(b), t) = 1.0;
      for (Eigen::Index d = 0; d < D; ++d)
        in(static_cast<Eigen::Index>(b + B * (t + max_len * d))) = features[b].rows(t, d);
      for (Eigen::Index d = 0; d < 12; ++d)
        tg(static_cast<Eigen::Index>(b + B * (t + max_len * d))) = targets[b](t, d);
    }
  }
  return batch;
}

}  // namespace artic::feat
