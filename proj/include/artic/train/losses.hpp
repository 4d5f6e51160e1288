#pragma once

#include <vector>

#include "artic/num/tape.hpp"

namespace artic::train {

using num::MatX;
using num::VecX;

// Mean squared error over unmasked (frame, channel) entries; pred is
// 12 x T, mask has one entry per frame.
num::Var<double> masked_mse(num::Var<double> pred, const MatX& target, const VecX& mask);

// sqrt of masked_mse.
num::Var<double> masked_rmse(num::Var<double> pred, const MatX& target, const VecX& mask);

// Weighted binary cross-entropy on stop logits (1 x T). targets are 0/1 per
// frame; positive frames are weighted by pos_weight.
num::Var<double> stop_bce(num::Var<double> logits, const VecX& targets, const VecX& mask,
                          double pos_weight);

// Batch view of the padded-tensor layout [B, T, 12]: sqrt of the MSE pooled
// over every unmasked entry. Equals the count-weighted mean of per-utterance
// MSEs, so there is no cross-utterance leakage.
double masked_rmse_loss(const num::TensorD& y_pred, const num::TensorD& y_true, const MatX& mask);

// Stop-token BCE from probabilities; target is 1 at frame true_length-1 and
// 0 before, frames at or beyond the true length are ignored.
double stop_token_loss(const MatX& stop_probs, const std::vector<Eigen::Index>& true_lengths,
                       const MatX& mask, double pos_weight = 1.0);

// Frame targets for the stop head of one utterance.
VecX stop_targets(Eigen::Index true_length);

}  // namespace artic::train
