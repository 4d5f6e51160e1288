#include "artic/model/blstm_model.hpp"

#include <cmath>

#include "artic/num/recurrent.hpp"

namespace artic::model {

namespace {

void init_lstm_params(ParameterStoreD& ps, const std::string& prefix, int input, int hidden,
                      num::Rng& rng) {
  const auto H = static_cast<std::size_t>(hidden);
  const auto I = static_cast<std::size_t>(input);
  ps.create_uniform(prefix + ".w_ih", {4 * H, I}, rng, 1.0 / std::sqrt(static_cast<double>(input)));
  ps.create_uniform(prefix + ".w_hh", {4 * H, H}, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
  auto& b = ps.create(prefix + ".b", {4 * H});
  // forget gate bias starts at 1
  b.data().segment(hidden, hidden).setOnes();
}

}  // namespace

BlstmModel::BlstmModel(BlstmConfig cfg) : cfg_(cfg) {
  if (cfg_.input_width < 1 || cfg_.hidden < 1)
    throw ConfigError("blstm model: dimensions must be positive");
}

void BlstmModel::init_params(num::Rng& rng) {
  for (int layer = 0; layer < BlstmConfig::kLayers; ++layer) {
    const int in = layer == 0 ? cfg_.input_width : 2 * cfg_.hidden;
    const std::string prefix = "blstm" + std::to_string(layer);
    init_lstm_params(params_, prefix + ".fw", in, cfg_.hidden, rng);
    init_lstm_params(params_, prefix + ".bw", in, cfg_.hidden, rng);
  }
  params_.create_uniform("head.w", {BlstmConfig::kOutput, static_cast<std::size_t>(2 * cfg_.hidden)},
                         rng, 1.0 / std::sqrt(2.0 * cfg_.hidden));
  params_.create("head.b", {BlstmConfig::kOutput});
}

num::Var<double> BlstmModel::forward(num::Tape<double>& tape, const MatX& features) {
  if (features.rows() < 1) throw DimensionError("blstm forward: empty sequence");
  if (features.cols() != cfg_.input_width)
    throw DimensionError("blstm forward: feature width " + std::to_string(features.cols()) +
                         " does not match configured input width " +
                         std::to_string(cfg_.input_width));
  auto x = tape.constant(features.transpose());
  for (int layer = 0; layer < BlstmConfig::kLayers; ++layer) {
    const std::string prefix = "blstm" + std::to_string(layer);
    auto fw = num::lstm_seq(tape.param(params_, prefix + ".fw.w_ih"),
                            tape.param(params_, prefix + ".fw.w_hh"),
                            tape.param(params_, prefix + ".fw.b"), x, false);
    auto bw = num::lstm_seq(tape.param(params_, prefix + ".bw.w_ih"),
                            tape.param(params_, prefix + ".bw.w_hh"),
                            tape.param(params_, prefix + ".bw.b"), x, true);
    x = num::concat_rows(fw, bw);
  }
  return num::affine(tape.param(params_, "head.w"), x, tape.param(params_, "head.b"));
}

MatX BlstmModel::predict(const MatX& features) {
  num::Tape<double> tape;
  tape.set_grad_enabled(false);
  return forward(tape, features).value().transpose();
}

}  // namespace artic::model
