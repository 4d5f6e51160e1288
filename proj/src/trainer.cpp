#include "artic/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "artic/train/losses.hpp"

namespace artic::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SquaredErrorPool {
  double sum_sq = 0.0;
  double count = 0.0;

  void add(double sq, double cnt) {
    sum_sq += sq;
    count += cnt;
  }
  double rmse() const { return count > 0 ? std::sqrt(sum_sq / count) : 0.0; }
};

using Batch = std::vector<const TrainItem*>;

// Shared optimisation loop: deterministic shuffling, per-batch gradient
// accumulation in a fixed order, early stopping on validation RMSE, best
// checkpoint kept from the pre-update state onwards.
TrainOutcome run_training(num::ParameterStoreD& params,
                          const std::vector<TrainItem>& train_items, const TrainConfig& config,
                          const std::function<std::pair<double, double>(const Batch&)>& batch_fn,
                          const std::function<double()>& valid_fn) {
  if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (train_items.empty()) throw DataError("train: no training utterances selected");

  Adam adam(params, AdamConfig{config.lr, 0.9, 0.999, 1e-8, config.grad_clip});
  TrainOutcome out;
  out.initial_valid = valid_fn();
  out.best_valid = out.initial_valid;

  auto snapshot = [&](int epoch, double valid) {
    out.best = num::Container{};
    out.best.meta["epoch"] = epoch;
    out.best.meta["valid_rmse"] = valid;
    out.best.meta["config_fingerprint"] = config.fingerprint;
    num::store_to_container(params, out.best);
    adam.save_state(out.best);
  };
  snapshot(0, out.initial_valid);

  num::Rng shuffle_rng(num::mix_seed(config.seed, 0x7368756666ULL));
  const auto t0 = Clock::now();
  int since_best = 0;

  std::vector<std::size_t> order(train_items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

    SquaredErrorPool train_pool;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      Batch batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_items[order[i]]);
      params.zero_grads();
      auto [sq, cnt] = batch_fn(batch);
      train_pool.add(sq, cnt);
      params.check_finite();
      adam.step();
    }

    const double valid = valid_fn();
    if (!std::isfinite(valid)) throw NumericError("train: validation loss is not finite");
    out.log.push_back({epoch, train_pool.rmse(), valid, seconds_since(t0)});

    if (valid < out.best_valid) {
      out.best_valid = valid;
      out.best_epoch = epoch;
      snapshot(epoch, valid);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return out;
}

}  // namespace

double validation_rmse_blstm(model::BlstmModel& model, const std::vector<TrainItem>& items) {
  SquaredErrorPool pool;
  for (const auto& item : items) {
    const Eigen::Index len = std::min(item.features.rows(), item.target.rows());
    num::Tape<double> tape;
    tape.set_grad_enabled(false);
    auto pred = model.forward(tape, item.features.topRows(len));
    pool.add((pred.value() - item.target.topRows(len).transpose()).squaredNorm(),
             static_cast<double>(len * 12));
  }
  return pool.rmse();
}

double validation_rmse_attention(model::AttentionModel& model,
                                 const std::vector<TrainItem>& items) {
  SquaredErrorPool pool;
  for (const auto& item : items) {
    num::Tape<double> tape;
    tape.set_grad_enabled(false);
    auto out = model.forward_teacher_forced(tape, item.features, item.target,
                                            model::ForwardMode::inference());
    pool.add((out.y_post.value() - item.target.transpose()).squaredNorm(),
             static_cast<double>(item.target.rows() * 12));
  }
  return pool.rmse();
}

TrainOutcome train_blstm(model::BlstmModel& model, const std::vector<TrainItem>& train_items,
                         const std::vector<TrainItem>& valid_items, const TrainConfig& config) {
  auto batch_fn = [&](const Batch& batch) {
    // assemble the fixed-length padded batch; the mask defines what is real
    std::vector<feat::FeatureMatrix> features;
    std::vector<MatX> targets;
    std::vector<std::string> ids;
    for (const auto* item : batch) {
      feat::FeatureMatrix f;
      f.kind = feat::FeatureKind::kTphn;  // kind tag is irrelevant to padding
      f.rows = item->features;
      f.frame_period_s = feat::kFramePeriodS;
      features.push_back(std::move(f));
      targets.push_back(item->target);
      ids.push_back(item->id);
    }
    auto padded = feat::pad_batch(features, targets, ids, config.max_len);

    const auto B = static_cast<Eigen::Index>(batch.size());
    const auto D = static_cast<Eigen::Index>(padded.inputs.dim(2));
    const double weight = 1.0 / static_cast<double>(batch.size());
    SquaredErrorPool pool;
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto len = static_cast<Eigen::Index>(padded.mask.row(b).sum());
      MatX x(len, D), y(len, 12);
      for (Eigen::Index t = 0; t < len; ++t) {
        for (Eigen::Index d = 0; d < D; ++d)
          x(t, d) = padded.inputs.data()(b + B * (t + config.max_len * d));
        for (Eigen::Index d = 0; d < 12; ++d)
          y(t, d) = padded.targets.data()(b + B * (t + config.max_len * d));
      }
      num::Tape<double> tape;
      auto pred = model.forward(tape, x);
      auto loss = num::scale(masked_rmse(pred, y.transpose(), VecX::Ones(len)), weight);
      tape.backward(loss);
      tape.accumulate_param_grads();
      pool.add((pred.value() - y.transpose()).squaredNorm(), static_cast<double>(len * 12));
    }
    return std::make_pair(pool.sum_sq, pool.count);
  };
  auto valid_fn = [&] { return validation_rmse_blstm(model, valid_items); };
  return run_training(model.params(), train_items, config, batch_fn, valid_fn);
}

TrainOutcome train_attention(model::AttentionModel& model,
                             const std::vector<TrainItem>& train_items,
                             const std::vector<TrainItem>& valid_items,
                             const TrainConfig& config) {
  auto dropout_rng = std::make_shared<num::Rng>(num::mix_seed(config.seed, 0x64726f70ULL));
  auto batch_fn = [&, dropout_rng](const Batch& batch) {
    const double weight = 1.0 / static_cast<double>(batch.size());
    SquaredErrorPool pool;
    for (const auto* item : batch) {
      const Eigen::Index len = item->target.rows();
      if (len > config.max_len)
        throw DataError("train: utterance " + item->id + " exceeds max_len " +
                        std::to_string(config.max_len));
      num::Tape<double> tape;
      model::ForwardMode mode{true, true, dropout_rng.get()};
      auto out = model.forward_teacher_forced(tape, item->features, item->target, mode);
      const VecX mask = VecX::Ones(len);
      const MatX target_t = item->target.transpose();
      auto loss = masked_rmse(out.y_pre, target_t, mask) + masked_rmse(out.y_post, target_t, mask);
      if (config.stop_loss_weight > 0.0)
        loss = loss + num::scale(stop_bce(out.stop_logits, stop_targets(len), mask,
                                          config.stop_pos_weight),
                                 config.stop_loss_weight);
      auto scaled = num::scale(loss, weight);
      tape.backward(scaled);
      tape.accumulate_param_grads();
      pool.add((out.y_post.value() - target_t).squaredNorm(), static_cast<double>(len * 12));
    }
    return std::make_pair(pool.sum_sq, pool.count);
  };
  auto valid_fn = [&] { return validation_rmse_attention(model, valid_items); };
  return run_training(model.params(), train_items, config, batch_fn, valid_fn);
}

}  // namespace artic::train
