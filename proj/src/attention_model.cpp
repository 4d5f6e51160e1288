#include "artic/model/attention_model.hpp"

#include <cmath>

#include "artic/feat/inventory.hpp"
#include "artic/num/recurrent.hpp"

namespace artic::model {

namespace {

constexpr int kVocab = feat::PhonemeInventory::kSize;

void init_lstm(ParameterStoreD& ps, const std::string& prefix, int input, int hidden,
               num::Rng& rng) {
  const auto H = static_cast<std::size_t>(hidden);
  ps.create_uniform(prefix + ".w_ih", {4 * H, static_cast<std::size_t>(input)}, rng,
                    1.0 / std::sqrt(static_cast<double>(input)));
  ps.create_uniform(prefix + ".w_hh", {4 * H, H}, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
  auto& b = ps.create(prefix + ".b", {4 * H});
  b.data().segment(hidden, hidden).setOnes();
}

void init_affine(ParameterStoreD& ps, const std::string& prefix, int out, int in, num::Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  ps.create_uniform(prefix + ".w", {static_cast<std::size_t>(out), static_cast<std::size_t>(in)},
                    rng, bound);
  ps.create_uniform(prefix + ".b", {static_cast<std::size_t>(out)}, rng, bound);
}

// no conv bias: batch normalisation follows and would absorb it
void init_conv_bn(ParameterStoreD& ps, const std::string& prefix, int kernel, int c_in, int c_out,
                  num::Rng& rng) {
  ps.create_uniform(prefix + ".kernel",
                    {static_cast<std::size_t>(kernel), static_cast<std::size_t>(c_in),
                     static_cast<std::size_t>(c_out)},
                    rng, 1.0 / std::sqrt(static_cast<double>(kernel * c_in)));
  auto& gamma = ps.create(prefix + ".bn.gamma", {static_cast<std::size_t>(c_out)});
  gamma.data().setOnes();
  ps.create(prefix + ".bn.beta", {static_cast<std::size_t>(c_out)});
  ps.create(prefix + ".bn.mean", {static_cast<std::size_t>(c_out)}, false);
  auto& var = ps.create(prefix + ".bn.var", {static_cast<std::size_t>(c_out)}, false);
  var.data().setOnes();
}

void check_one_hot_rows(const MatX& phn) {
  if (phn.rows() < 1) throw DimensionError("encoder: need at least one token");
  if (phn.cols() != kVocab)
    throw DimensionError("encoder: tokens must be " + std::to_string(kVocab) + "-dim one-hot");
  for (Eigen::Index r = 0; r < phn.rows(); ++r) {
    int ones = 0;
    for (Eigen::Index c = 0; c < phn.cols(); ++c) {
      const double v = phn(r, c);
      if (v == 1.0)
        ++ones;
      else if (v != 0.0)
        throw DataError("encoder: row " + std::to_string(r) + " is not one-hot");
    }
    if (ones != 1) throw DataError("encoder: row " + std::to_string(r) + " is not one-hot");
  }
}

}  // namespace

void AttentionConfig::validate() const {
  if (embedding_dim < 2 || embedding_dim % 2 != 0)
    throw ConfigError("attention model: embedding_dim must be even and >= 2");
  if (encoder_kernel % 2 == 0 || postnet_kernel % 2 == 0 || location_kernel % 2 == 0)
    throw ConfigError("attention model: kernels must be odd for same padding");
  if (attention_dim < 1 || location_filters < 1 || prenet_dim < 1 || decoder_dim < 1 ||
      postnet_channels < 1)
    throw ConfigError("attention model: dimensions must be positive");
  if (frames_per_step != 1)
    throw ConfigError(
        "attention model: frames_per_step is exposed for forward compatibility but this build "
        "generates one frame per decoder step");
}

AttentionModel::AttentionModel(AttentionConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void AttentionModel::init_params(num::Rng& rng) {
  const int E = cfg_.embedding_dim, A = cfg_.attention_dim, H = cfg_.decoder_dim,
            P = cfg_.prenet_dim, C = cfg_.postnet_channels;
  params_.create_uniform("embedding.w", {static_cast<std::size_t>(E), kVocab}, rng,
                         1.0 / std::sqrt(static_cast<double>(kVocab)));
  for (int i = 0; i < 3; ++i)
    init_conv_bn(params_, "encoder.conv" + std::to_string(i), cfg_.encoder_kernel, E, E, rng);
  init_lstm(params_, "encoder.blstm.fw", E, E / 2, rng);
  init_lstm(params_, "encoder.blstm.bw", E, E / 2, rng);

  params_.create_uniform("attention.w_query", {static_cast<std::size_t>(A),
                                               static_cast<std::size_t>(H)},
                         rng, 1.0 / std::sqrt(static_cast<double>(H)));
  params_.create_uniform("attention.v_enc", {static_cast<std::size_t>(A),
                                             static_cast<std::size_t>(E)},
                         rng, 1.0 / std::sqrt(static_cast<double>(E)));
  params_.create_uniform("attention.u_loc", {static_cast<std::size_t>(A),
                                             static_cast<std::size_t>(cfg_.location_filters)},
                         rng, 1.0 / std::sqrt(static_cast<double>(cfg_.location_filters)));
  const int loc_ch = cfg_.location_cum ? 2 : 1;
  params_.create_uniform("attention.loc_kernel",
                         {static_cast<std::size_t>(cfg_.location_kernel),
                          static_cast<std::size_t>(loc_ch),
                          static_cast<std::size_t>(cfg_.location_filters)},
                         rng, 1.0 / std::sqrt(static_cast<double>(cfg_.location_kernel * loc_ch)));
  params_.create_uniform("attention.w_score", {static_cast<std::size_t>(A)}, rng,
                         1.0 / std::sqrt(static_cast<double>(A)));
  params_.create("attention.bias", {static_cast<std::size_t>(A)});

  init_affine(params_, "prenet.0", P, AttentionConfig::kOutput, rng);
  init_affine(params_, "prenet.1", P, P, rng);
  init_lstm(params_, "decoder.0", P + E, H, rng);
  init_lstm(params_, "decoder.1", H, H, rng);
  init_affine(params_, "head.y", AttentionConfig::kOutput, H + E, rng);
  init_affine(params_, "head.stop", 1, H + E, rng);

  init_conv_bn(params_, "postnet.conv0", cfg_.postnet_kernel, AttentionConfig::kOutput, C, rng);
  for (int i = 1; i < 4; ++i)
    init_conv_bn(params_, "postnet.conv" + std::to_string(i), cfg_.postnet_kernel, C, C, rng);
  init_conv_bn(params_, "postnet.conv4", cfg_.postnet_kernel, C, AttentionConfig::kOutput, rng);
}

num::Var<double> AttentionModel::conv_bn_block(num::Tape<double>& tape, num::Var<double> x,
                                               const std::string& prefix, int kernel,
                                               bool relu_act, bool tanh_act,
                                               const ForwardMode& mode) {
  auto y = num::conv1d_seq(x, tape.param_kernel(params_, prefix + ".kernel"), kernel);
  auto gamma = tape.param(params_, prefix + ".bn.gamma");
  auto beta = tape.param(params_, prefix + ".bn.beta");
  auto& mean = params_.value(prefix + ".bn.mean").data();
  auto& var = params_.value(prefix + ".bn.var").data();
  if (mode.training) {
    num::RunningStatsRef<double> ref;
    if (mode.update_stats) ref = {&mean, &var};
    y = num::batchnorm_train(y, gamma, beta, 1e-5, ref);
  } else {
    y = num::batchnorm_infer(y, gamma, beta, mean, var, 1e-5);
  }
  if (relu_act) y = num::relu(y);
  if (tanh_act) y = num::tanh_of(y);
  return y;
}

num::Var<double> AttentionModel::encoder_forward(num::Tape<double>& tape, const MatX& phn,
                                                 const ForwardMode& mode) {
  check_one_hot_rows(phn);
  auto x = tape.param(params_, "embedding.w") * tape.constant(phn.transpose());  // E x N
  for (int i = 0; i < 3; ++i)
    x = conv_bn_block(tape, x, "encoder.conv" + std::to_string(i), cfg_.encoder_kernel,
                      /*relu=*/true, /*tanh=*/false, mode);
  auto fw = num::lstm_seq(tape.param(params_, "encoder.blstm.fw.w_ih"),
                          tape.param(params_, "encoder.blstm.fw.w_hh"),
                          tape.param(params_, "encoder.blstm.fw.b"), x, false);
  auto bw = num::lstm_seq(tape.param(params_, "encoder.blstm.bw.w_ih"),
                          tape.param(params_, "encoder.blstm.bw.w_hh"),
                          tape.param(params_, "encoder.blstm.bw.b"), x, true);
  return num::concat_rows(fw, bw);  // E x N
}

AttentionState AttentionModel::initial_state(num::Tape<double>& tape, Eigen::Index n_tokens) {
  const int H = cfg_.decoder_dim, E = cfg_.embedding_dim;
  AttentionState s;
  MatX alpha0 = MatX::Zero(1, n_tokens);
  alpha0(0, 0) = 1.0;  // attention starts on the start token
  s.alpha = tape.constant(alpha0);
  s.alpha_cum = tape.constant(alpha0);
  s.h1 = tape.constant(MatX::Zero(H, 1));
  s.c1 = tape.constant(MatX::Zero(H, 1));
  s.h2 = tape.constant(MatX::Zero(H, 1));
  s.c2 = tape.constant(MatX::Zero(H, 1));
  s.y_prev = tape.constant(MatX::Zero(AttentionConfig::kOutput, 1));
  s.context = tape.constant(MatX::Zero(E, 1));
  return s;
}

std::pair<num::Var<double>, num::Var<double>> AttentionModel::attention_step(
    num::Tape<double>& tape, AttentionState& state, num::Var<double> enc,
    num::Var<double> enc_proj) {
  if (state.alpha.cols() != enc.cols())
    throw DimensionError("attention_step: state has " + std::to_string(state.alpha.cols()) +
                         " tokens, encoder " + std::to_string(enc.cols()));
  // location features from the previous (and cumulative) alignment
  auto loc_in = cfg_.location_cum ? num::concat_rows(state.alpha, state.alpha_cum) : state.alpha;
  auto f = num::conv1d_seq(loc_in, tape.param_kernel(params_, "attention.loc_kernel"),
                           cfg_.location_kernel);  // K_f x N
  auto scores_in = enc_proj + (tape.param(params_, "attention.u_loc") * f);
  auto query_term = num::affine(tape.param(params_, "attention.w_query"), state.h2,
                                tape.param(params_, "attention.bias"));  // A x 1
  auto tanh_scores = num::tanh_of(num::add_colvec(scores_in, query_term));
  auto scores = num::matmul_tn(tape.param(params_, "attention.w_score"), tanh_scores);  // 1 x N
  auto alpha = num::softmax_vec(scores);

  const double sum = alpha.value().sum();
  if (std::abs(sum - 1.0) > 1e-6)
    throw NumericError("attention weights sum to " + std::to_string(sum));

  auto g = num::matmul_nt(enc, alpha);  // E x 1
  state.alpha_cum = state.alpha_cum + alpha;
  state.alpha = alpha;
  return {alpha, g};
}

num::Var<double> AttentionModel::prenet(num::Tape<double>& tape, num::Var<double> y,
                                        const ForwardMode& mode) {
  auto h = num::relu(num::affine(tape.param(params_, "prenet.0.w"), y,
                                 tape.param(params_, "prenet.0.b")));
  if (mode.training && cfg_.prenet_dropout > 0.0 && mode.dropout_rng)
    h = num::dropout(h, cfg_.prenet_dropout, *mode.dropout_rng);
  h = num::relu(num::affine(tape.param(params_, "prenet.1.w"), h,
                            tape.param(params_, "prenet.1.b")));
  if (mode.training && cfg_.prenet_dropout > 0.0 && mode.dropout_rng)
    h = num::dropout(h, cfg_.prenet_dropout, *mode.dropout_rng);
  return h;
}

AttentionModel::StepOutput AttentionModel::decoder_step(num::Tape<double>& tape,
                                                        AttentionState& state, num::Var<double> g,
                                                        num::Var<double> y_input,
                                                        const ForwardMode& mode) {
  const int H = cfg_.decoder_dim;
  auto pre = prenet(tape, y_input, mode);
  auto hc1 = num::lstm_step(tape.param(params_, "decoder.0.w_ih"),
                            tape.param(params_, "decoder.0.w_hh"),
                            tape.param(params_, "decoder.0.b"), num::concat_rows(pre, g),
                            state.h1, state.c1);
  state.h1 = num::slice_rows(hc1, 0, H);
  state.c1 = num::slice_rows(hc1, H, H);
  auto hc2 = num::lstm_step(tape.param(params_, "decoder.1.w_ih"),
                            tape.param(params_, "decoder.1.w_hh"),
                            tape.param(params_, "decoder.1.b"), state.h1, state.h2, state.c2);
  state.h2 = num::slice_rows(hc2, 0, H);
  state.c2 = num::slice_rows(hc2, H, H);

  auto hg = num::concat_rows(state.h2, g);
  StepOutput out;
  out.y = num::affine(tape.param(params_, "head.y.w"), hg, tape.param(params_, "head.y.b"));
  out.stop_logit =
      num::affine(tape.param(params_, "head.stop.w"), hg, tape.param(params_, "head.stop.b"));
  out.stop_prob = 1.0 / (1.0 + std::exp(-out.stop_logit.value()(0, 0)));
  state.context = g;
  state.y_prev = out.y;
  return out;
}

num::Var<double> AttentionModel::postnet(num::Tape<double>& tape, num::Var<double> y,
                                         const ForwardMode& mode) {
  auto x = y;
  for (int i = 0; i < 5; ++i)
    x = conv_bn_block(tape, x, "postnet.conv" + std::to_string(i), cfg_.postnet_kernel,
                      /*relu=*/false, /*tanh=*/i < 4, mode);
  return x;
}

TeacherForcedResult AttentionModel::forward_teacher_forced(num::Tape<double>& tape,
                                                           const MatX& phn, const MatX& y_true,
                                                           const ForwardMode& mode) {
  const Eigen::Index T = y_true.rows();
  if (T < 1) throw DimensionError("teacher forcing: need at least one target frame");
  if (y_true.cols() != AttentionConfig::kOutput)
    throw DimensionError("teacher forcing: targets must have 12 channels");

  auto enc = encoder_forward(tape, phn, mode);
  auto enc_proj = tape.param(params_, "attention.v_enc") * enc;  // A x N, reused every step
  auto state = initial_state(tape, enc.cols());

  TeacherForcedResult result;
  result.alphas.resize(T, enc.cols());
  result.stop_probs.resize(T);
  std::vector<num::Var<double>> ys, stops;
  ys.reserve(T);
  stops.reserve(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto [alpha, g] = attention_step(tape, state, enc, enc_proj);
    // ground-truth previous frame; zero frame at t = 0
    auto y_input = t == 0 ? tape.constant(MatX::Zero(AttentionConfig::kOutput, 1))
                          : tape.constant(MatX(y_true.row(t - 1).transpose()));
    auto step = decoder_step(tape, state, g, y_input, mode);
    result.alphas.row(t) = alpha.value().row(0);
    result.stop_probs(t) = step.stop_prob;
    ys.push_back(step.y);
    stops.push_back(step.stop_logit);
  }
  result.y_pre = num::concat_cols(ys);
  result.stop_logits = num::concat_cols(stops);
  result.y_post = result.y_pre + postnet(tape, result.y_pre, mode);
  return result;
}

InferenceResult AttentionModel::infer(const MatX& phn, double stop_threshold, int max_frames) {
  if (max_frames < 1) throw ConfigError("infer: max_frames must be >= 1");
  num::Tape<double> tape;
  tape.set_grad_enabled(false);
  const ForwardMode mode = ForwardMode::inference();

  auto enc = encoder_forward(tape, phn, mode);
  auto enc_proj = tape.param(params_, "attention.v_enc") * enc;
  auto state = initial_state(tape, enc.cols());

  std::vector<num::Var<double>> ys;
  std::vector<VecX> alpha_rows;
  std::vector<double> stop_probs;
  auto y_input = tape.constant(MatX::Zero(AttentionConfig::kOutput, 1));
  for (int t = 0; t < max_frames; ++t) {
    auto [alpha, g] = attention_step(tape, state, enc, enc_proj);
    auto step = decoder_step(tape, state, g, y_input, mode);
    ys.push_back(step.y);
    alpha_rows.push_back(alpha.value().row(0).transpose());
    stop_probs.push_back(step.stop_prob);
    if (step.stop_prob > stop_threshold) break;
    y_input = step.y;  // feed back own prediction
  }

  auto y_pre = num::concat_cols(ys);
  auto y_post = y_pre + postnet(tape, y_pre, mode);

  InferenceResult out;
  out.y = y_post.value().transpose();
  out.alphas.resize(static_cast<Eigen::Index>(alpha_rows.size()), enc.cols());
  out.stop_probs.resize(static_cast<Eigen::Index>(stop_probs.size()));
  for (std::size_t i = 0; i < alpha_rows.size(); ++i) {
    out.alphas.row(static_cast<Eigen::Index>(i)) = alpha_rows[i].transpose();
    out.stop_probs(static_cast<Eigen::Index>(i)) = stop_probs[i];
  }
  return out;
}

}  // namespace artic::model
