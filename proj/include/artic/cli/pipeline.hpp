#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artic/corpus/preprocess.hpp"
#include "artic/corpus/split.hpp"
#include "artic/eval/metrics.hpp"
#include "artic/feat/features.hpp"
#include "artic/synth/synth.hpp"
#include "artic/train/trainer.hpp"

namespace artic::pipeline {

using corpus::MatX;
using corpus::VecX;

// One fully preprocessed utterance: filtered, resampled to 100 Hz,
// sentence-wise normalized, with every available input representation.
struct PreparedUtterance {
  std::string id;
  std::string subject;
  corpus::PhonemeAlignment alignment;
  MatX target;  // T x 12 normalized trajectory
  corpus::NormStats stats;
  MatX phn;        // (N+1) x 40
  MatX tphn;       // T x 40
  MatX mfcc;       // T x 13, empty when no acoustic channel exists
  MatX mfcc_tphn;  // T x 53, empty when no acoustic channel exists
};

PreparedUtterance prepare_utterance(const corpus::Utterance& utt, double lowpass_hz = 25.0,
                                    double target_rate_hz = 100.0);

std::vector<PreparedUtterance> prepare_corpus(const corpus::Corpus& corpus);

// Feature/model pairing from the input-representation table: phn drives the
// attention model, the frame-synchronous kinds drive the BLSTM.
bool pairing_valid(feat::FeatureKind kind, const std::string& model_kind);

train::TrainItem to_item(const PreparedUtterance& u, feat::FeatureKind kind);

// Selects items of one split (and optionally one subject).
std::vector<train::TrainItem> select_items(const std::vector<PreparedUtterance>& prepared,
                                           const std::map<std::string, corpus::Split>& split,
                                           feat::FeatureKind kind, corpus::Split which,
                                           const std::string& subject = "");

struct EvalOptions {
  double stop_threshold = 0.5;
  int max_frames = 450;
  std::string regime = "generic";
  std::string subject_filter;
};

eval::EvalReport evaluate_blstm(model::BlstmModel& model, const std::vector<train::TrainItem>& test,
                                feat::FeatureKind kind, const EvalOptions& opts);

// Free-running inference, DTW-aligned metrics, plus an attention
// diagonality diagnostic computed from a teacher-forced pass.
eval::EvalReport evaluate_attention(model::AttentionModel& model,
                                    const std::vector<train::TrainItem>& test,
                                    const EvalOptions& opts);

// Cache file IO (one container per utterance) used by the prep command.
void save_prepared(const PreparedUtterance& u, const std::string& path);
PreparedUtterance load_prepared(const std::string& path);

// Corpus directory layout: manifest.json plus per-utterance trajectory,
// alignment and (optional) proxy files.
void save_corpus_dir(const corpus::Corpus& corpus, const std::string& dir,
                     const nlohmann::json& extra_meta, bool force);
corpus::Corpus load_corpus_dir(const std::string& dir);

}  // namespace artic::pipeline
