#pragma once

#include <vector>

#include "artic/num/recurrent.hpp"
#include "artic/num/tape.hpp"

// Plain (tape-free caller view) layer primitives. These run the same op
// implementations as the recorded graph, on a scratch tape, so there is a
// single code path for the math.

namespace artic::num {

inline VecX affine(const MatX& weights, const VecX& x, const VecX& bias) {
  if (weights.cols() != x.size() || weights.rows() != bias.size())
    throw DimensionError("affine: shape mismatch");
  Tape<double> t;
  auto v = artic::num::affine(t.constant(weights), t.constant(x), t.constant(bias));
  return v.value().col(0);
}

inline VecX softmax(const VecX& scores) {
  Tape<double> t;
  return softmax_vec(t.constant(scores)).value().col(0);
}

struct LstmCellState {
  VecX hidden;
  VecX cell;
};

struct LstmCellParams {
  MatX w_ih;  // 4H x I
  MatX w_hh;  // 4H x H
  VecX bias;  // 4H
};

inline LstmCellState lstm_cell_step(const VecX& x, const LstmCellState& state,
                                    const LstmCellParams& p) {
  Tape<double> t;
  auto hc = lstm_step(t.constant(p.w_ih), t.constant(p.w_hh), t.constant(p.bias),
                      t.constant(x), t.constant(state.hidden), t.constant(state.cell));
  const Eigen::Index H = state.hidden.size();
  return {hc.value().col(0).segment(0, H), hc.value().col(0).segment(H, H)};
}

struct BlstmParams {
  LstmCellParams fw;
  LstmCellParams bw;
};

// xs: I x T (time as columns); output 2H x T, forward states stacked on top
// of backward states.
inline MatX blstm_layer(const MatX& xs, const BlstmParams& p) {
  if (xs.cols() == 0) throw DimensionError("blstm_layer: empty sequence");
  Tape<double> t;
  auto x = t.constant(xs);
  auto f = lstm_seq(t.constant(p.fw.w_ih), t.constant(p.fw.w_hh), t.constant(p.fw.bias), x, false);
  auto b = lstm_seq(t.constant(p.bw.w_ih), t.constant(p.bw.w_hh), t.constant(p.bw.bias), x, true);
  return concat_rows(f, b).value();
}

// xs: frames x C_in (row-per-frame caller layout); kernel tensor [K, C_in,
// C_out]; stride 1, same zero padding, K odd.
inline MatX conv1d(const MatX& xs, const TensorD& kernel) {
  if (kernel.rank() != 3) throw DimensionError("conv1d: kernel must be [K, C_in, C_out]");
  const int K = static_cast<int>(kernel.dim(0));
  if (kernel.dim(1) != static_cast<std::size_t>(xs.cols()))
    throw DimensionError("conv1d: channel mismatch");
  Tape<double> t;
  auto x = t.constant(xs.transpose());
  auto k = t.constant(kernel.view2d(2));
  return conv1d_seq(x, k, K).value().transpose();
}

enum class BatchNormMode { kTrain, kInfer };

// xs: frames x C. Training mode standardises with the batch statistics and
// optionally refreshes running stats; inference mode uses the stored ones.
inline MatX batchnorm1d(const MatX& xs, const VecX& gamma, const VecX& beta, BatchNormMode mode,
                        RunningStats<double>* stats = nullptr, double eps = 1e-5,
                        double momentum = 0.1) {
  Tape<double> t;
  auto x = t.constant(xs.transpose());
  auto g = t.constant(gamma);
  auto b = t.constant(beta);
  if (mode == BatchNormMode::kTrain) {
    RunningStatsRef<double> ref;
    if (stats) ref = {&stats->mean, &stats->var};
    return batchnorm_train(x, g, b, eps, ref, momentum).value().transpose();
  }
  if (!stats) throw ConfigError("batchnorm1d: inference mode needs running stats");
  return batchnorm_infer(x, g, b, stats->mean, stats->var, eps).value().transpose();
}

}  // namespace artic::num
