#pragma once

#include "artic/num/checkpoint.hpp"
#include "artic/num/param_store.hpp"

namespace artic::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;  // global gradient-norm bound G
};

// Adam with global gradient-norm clipping. Updates are additionally clamped
// to lr * G per component, so one step never moves a parameter further than
// that.
class Adam {
 public:
  Adam(num::ParameterStoreD& params, AdamConfig cfg);

  void step();

  std::uint64_t steps_taken() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

  // moment buffers travel with checkpoints
  void save_state(num::Container& c, const std::string& prefix = "adam.") const;
  void load_state(const num::Container& c, const std::string& prefix = "adam.");

 private:
  num::ParameterStoreD& params_;
  AdamConfig cfg_;
  std::map<std::string, num::VecX> m_, v_;
  std::uint64_t steps_ = 0;
};

}  // namespace artic::train
