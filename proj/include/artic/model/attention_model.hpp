#pragma once

#include <string>
#include <vector>

#include "artic/num/param_store.hpp"
#include "artic/num/tape.hpp"

namespace artic::model {

using num::MatX;
using num::ParameterStoreD;
using num::VecX;

// Sequence-to-sequence estimator: one-hot phoneme tokens in, articulatory
// frames out. Encoder = embedding + 3 conv/batchnorm/relu blocks + one
// BLSTM. A location-sensitive attention bridges to a two-layer LSTM decoder
// with a bottleneck pre-net on the previous output frame, linear output and
// stop heads over [decoder state; context], and a 5-layer convolutional
// residual post-net.
struct AttentionConfig {
  int embedding_dim = 512;  // encoder width E; BLSTM runs E/2 per direction
  int encoder_kernel = 5;
  int attention_dim = 128;   // shared inner width of the score network
  int location_filters = 32;
  int location_kernel = 31;
  bool location_cum = true;  // feed cumulative attention as a second channel
  int prenet_dim = 256;
  int decoder_dim = 1024;
  int postnet_channels = 512;
  int postnet_kernel = 5;
  double prenet_dropout = 0.5;
  int frames_per_step = 1;  // decoder reduction factor; this build supports 1

  static constexpr int kOutput = 12;

  void validate() const;
};

// Forward behaviour toggles. Gradient-checked losses run with
// training=true but update_stats=false so repeated evaluations agree.
struct ForwardMode {
  bool training = false;
  bool update_stats = false;
  num::Rng* dropout_rng = nullptr;

  static ForwardMode inference() { return {false, false, nullptr}; }
  static ForwardMode train(num::Rng* rng) { return {true, true, rng}; }
};

// Per-step attention/decoder recurrent state, all on one tape.
struct AttentionState {
  num::Var<double> alpha;      // 1 x N, rows of the attention matrix
  num::Var<double> alpha_cum;  // running sum of past alphas
  num::Var<double> h1, c1, h2, c2;
  num::Var<double> y_prev;   // previous output frame, 12 x 1
  num::Var<double> context;  // previous context vector g, E x 1
};

struct TeacherForcedResult {
  num::Var<double> y_pre;        // 12 x T
  num::Var<double> y_post;       // 12 x T
  num::Var<double> stop_logits;  // 1 x T
  VecX stop_probs;               // T
  MatX alphas;                   // T x N (values)
};

struct InferenceResult {
  MatX y;       // T x 12
  MatX alphas;  // T x N
  VecX stop_probs;
};

class AttentionModel {
 public:
  explicit AttentionModel(AttentionConfig cfg);

  void init_params(num::Rng& rng);

  // phn: (N_tokens x 40) one-hot rows including the start token.
  // Returns encoder states as E x N.
  num::Var<double> encoder_forward(num::Tape<double>& tape, const MatX& phn,
                                   const ForwardMode& mode);

  AttentionState initial_state(num::Tape<double>& tape, Eigen::Index n_tokens);

  // One attention step: location features from the previous (and cumulative)
  // alignment, additive score, softmax, context. Returns (alpha 1xN, g Ex1)
  // and writes alpha/alpha_cum back into `state`.
  std::pair<num::Var<double>, num::Var<double>> attention_step(num::Tape<double>& tape,
                                                               AttentionState& state,
                                                               num::Var<double> enc,
                                                               num::Var<double> enc_proj);

  // One decoder step given the context g. y_input is the previous output
  // frame (ground truth under teacher forcing, own prediction otherwise).
  struct StepOutput {
    num::Var<double> y;           // 12 x 1
    num::Var<double> stop_logit;  // 1 x 1
    double stop_prob;
  };
  StepOutput decoder_step(num::Tape<double>& tape, AttentionState& state, num::Var<double> g,
                          num::Var<double> y_input, const ForwardMode& mode);

  TeacherForcedResult forward_teacher_forced(num::Tape<double>& tape, const MatX& phn,
                                             const MatX& y_true, const ForwardMode& mode);

  InferenceResult infer(const MatX& phn, double stop_threshold = 0.5, int max_frames = 1000);

  const AttentionConfig& config() const { return cfg_; }
  ParameterStoreD& params() { return params_; }
  const ParameterStoreD& params() const { return params_; }

 private:
  num::Var<double> postnet(num::Tape<double>& tape, num::Var<double> y, const ForwardMode& mode);
  num::Var<double> prenet(num::Tape<double>& tape, num::Var<double> y, const ForwardMode& mode);
  num::Var<double> conv_bn_block(num::Tape<double>& tape, num::Var<double> x,
                                 const std::string& prefix, int kernel, bool relu_act,
                                 bool tanh_act, const ForwardMode& mode);

  AttentionConfig cfg_;
  ParameterStoreD params_;
};

}  // namespace artic::model
