#pragma once

#include <string>

#include "artic/num/param_store.hpp"
#include "artic/num/tape.hpp"

namespace artic::model {

using num::MatX;
using num::ParameterStoreD;
using num::VecX;

// Frame-synchronous regressor: three stacked BLSTM layers and a
// time-distributed linear head onto the 12 articulatory channels.
struct BlstmConfig {
  int input_width = 40;
  int hidden = 256;  // per direction

  static constexpr int kLayers = 3;
  static constexpr int kOutput = 12;
};

class BlstmModel {
 public:
  explicit BlstmModel(BlstmConfig cfg);

  void init_params(num::Rng& rng);

  // features: T x D (frame rows). Records onto `tape`; output is 12 x T.
  num::Var<double> forward(num::Tape<double>& tape, const MatX& features) ;

  // Convenience inference path; returns T x 12.
  MatX predict(const MatX& features);

  const BlstmConfig& config() const { return cfg_; }
  ParameterStoreD& params() { return params_; }
  const ParameterStoreD& params() const { return params_; }

 private:
  BlstmConfig cfg_;
  ParameterStoreD params_;
};

}  // namespace artic::model
