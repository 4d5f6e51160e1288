#pragma once

#include <string>
#include <vector>

#include "artic/corpus/types.hpp"
#include "artic/feat/inventory.hpp"
#include "artic/num/tensor.hpp"

namespace artic::feat {

using num::MatX;
using num::VecX;

enum class FeatureKind { kPhn, kTphn, kMfcc, kMfccTphn };

const char* feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string& name);

inline constexpr double kFramePeriodS = 0.010;

// Token- or frame-indexed input representation. PHN rows are tokens; the
// other kinds are 10 ms frames.
struct FeatureMatrix {
  MatX rows;
  FeatureKind kind = FeatureKind::kPhn;
  double frame_period_s = 0.0;  // 0 for PHN

  Eigen::Index width() const { return rows.cols(); }
  Eigen::Index count() const { return rows.rows(); }
};

int feature_width(FeatureKind kind);

// Phoneme sequence as one-hot tokens; row 0 is the start token, durations
// discarded.
FeatureMatrix encode_phn(const corpus::PhonemeAlignment& alignment);

// One-hot replicated every 10 ms across each phoneme's duration. Frame t
// takes the phoneme covering its left edge; boundary ties go to the later
// phoneme. No start token.
FeatureMatrix expand_tphn(const corpus::PhonemeAlignment& alignment,
                          double frame_period_s = kFramePeriodS);

// MFCC | TPHN concatenation (width 53). Frame counts may differ by at most
// 2; the longer matrix is trimmed.
FeatureMatrix concat_features(const FeatureMatrix& mfcc, const FeatureMatrix& tphn);

struct MfccConfig {
  double sample_rate_hz = 16000.0;
  double window_s = 0.025;
  double hop_s = 0.010;
  int fft_size = 512;
  int num_filters = 26;
  int num_coeffs = 13;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
};

// 13 cepstral coefficients per 10 ms hop: pre-emphasis, 25 ms Hamming
// window, power spectrum, 26 triangular mel filters, log with floor,
// orthonormal DCT-II with C0 retained.
FeatureMatrix compute_mfcc(const VecX& waveform, const MfccConfig& config = {});

struct PaddedBatch {
  num::TensorD inputs;   // [B, max_len, D]
  num::TensorD targets;  // [B, max_len, 12]
  MatX mask;             // B x max_len, 1 marks a real frame
  std::vector<Eigen::Index> lengths;
};

// Zero-pad frame-synchronous features/targets to a fixed length. The mask
// marks real frames; losses must ignore everything else.
PaddedBatch pad_batch(const std::vector<FeatureMatrix>& features,
                      const std::vector<MatX>& targets,
                      const std::vector<std::string>& ids, Eigen::Index max_len = 400);

}  // namespace artic::feat
