#pragma once

#include <optional>
#include <string>
#include <vector>

#include "artic/corpus/types.hpp"
#include "artic/feat/features.hpp"
#include "artic/model/attention_model.hpp"
#include "artic/model/blstm_model.hpp"
#include "artic/num/checkpoint.hpp"
#include "artic/train/optimizer.hpp"

namespace artic::train {

using num::MatX;
using num::VecX;

// One preprocessed training example. For the frame-synchronous models
// `features` has one row per 10 ms frame; for the attention model it is the
// one-hot token matrix.
struct TrainItem {
  std::string id;
  std::string subject;
  MatX features;
  MatX target;  // T x 12, normalized
  corpus::PhonemeAlignment alignment;
};

struct TrainConfig {
  std::string regime = "generic";  // subject_dependent | generic | fine_tune
  std::string subject;             // target subject for the per-subject regimes
  int batch_size = 25;
  Eigen::Index max_len = 400;
  double lr = 1e-3;
  int epochs = 60;
  int patience = 10;
  double grad_clip = 1.0;
  double stop_pos_weight = 5.0;
  double stop_loss_weight = 1.0;
  std::uint64_t seed = 1;
  std::string fingerprint;  // run-configuration hash carried into checkpoints
};

struct TrainLogRecord {
  int epoch = 0;
  double train_rmse = 0.0;
  double valid_rmse = 0.0;
  double wall_s = 0.0;
};

struct TrainOutcome {
  num::Container best;  // parameters + optimizer state + metadata
  double best_valid = 0.0;
  int best_epoch = 0;
  double initial_valid = 0.0;  // validation loss before any update
  std::vector<TrainLogRecord> log;
};

// Deterministic in config.seed. Early-stops on validation RMSE; the best
// checkpoint includes the pre-update state, so fine-tuning can only match
// or improve its base.
TrainOutcome train_blstm(model::BlstmModel& model, const std::vector<TrainItem>& train_items,
                         const std::vector<TrainItem>& valid_items, const TrainConfig& config);

TrainOutcome train_attention(model::AttentionModel& model,
                             const std::vector<TrainItem>& train_items,
                             const std::vector<TrainItem>& valid_items,
                             const TrainConfig& config);

// Pooled masked RMSE of the model outputs over a set of items (evaluation
// mode forward passes).
double validation_rmse_blstm(model::BlstmModel& model, const std::vector<TrainItem>& items);
double validation_rmse_attention(model::AttentionModel& model,
                                 const std::vector<TrainItem>& items);

}  // namespace artic::train
