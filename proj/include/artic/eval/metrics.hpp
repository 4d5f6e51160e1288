#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "artic/corpus/types.hpp"
#include "artic/eval/dtw.hpp"

namespace artic::eval {

using num::VecX;

// Per-channel sqrt mean squared difference; inputs must be aligned already
// (run dtw_align first for free-running predictions).
VecX rmse_per_articulator(const MatX& y_pred, const MatX& y_true);

// Per-channel Pearson correlation; degenerate channels come back as NaN and
// are excluded from means downstream.
VecX cc_per_articulator(const MatX& y_pred, const MatX& y_true);

// Mean absolute deviation, in frames, between each token's attention
// centroid over decoder time and the forced-alignment midpoint of its
// phoneme. alphas may carry a leading start-token column, which is dropped.
double attention_diagonality(const MatX& alphas, const corpus::PhonemeAlignment& alignment,
                             double frame_rate_hz = 100.0);

struct SentenceEval {
  std::string id;
  std::string subject;
  VecX rmse;  // 12
  VecX cc;    // 12, NaN where undefined
  double mean_rmse = 0.0;
  double mean_cc = 0.0;
  int undefined_cc = 0;
  std::optional<double> diagonality;
  Eigen::Index pred_frames = 0;
  Eigen::Index true_frames = 0;
};

SentenceEval evaluate_sentence(const std::string& id, const std::string& subject,
                               const MatX& y_pred, const MatX& y_true, bool dtw_first);

struct SubjectAggregate {
  std::string subject;
  int sentences = 0;
  double mean_rmse = 0.0, std_rmse = 0.0;
  double mean_cc = 0.0, std_cc = 0.0;
};

struct EvalReport {
  std::string model_kind, feature_kind, regime, subject_filter;
  std::vector<SentenceEval> sentences;
  VecX rmse_per_channel;  // mean over sentences
  VecX cc_per_channel;    // mean over sentences, undefined entries skipped
  double mean_rmse = 0.0, mean_cc = 0.0;
  double std_rmse = 0.0, std_cc = 0.0;  // across all test sentences pooled
  std::vector<SubjectAggregate> per_subject;  // per-subject mean/std as well
  int undefined_cc_channels = 0;
  std::optional<double> mean_diagonality;
  std::optional<double> diagonality_within_3_frames;  // fraction of sentences

  nlohmann::json to_json() const;
  std::string to_csv() const;  // one row per sentence
};

EvalReport aggregate_report(std::vector<SentenceEval> sentences, const std::string& model_kind,
                            const std::string& feature_kind, const std::string& regime,
                            const std::string& subject_filter);

}  // namespace artic::eval
