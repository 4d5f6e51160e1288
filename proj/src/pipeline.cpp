#include "artic/cli/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "artic/corpus/io.hpp"
#include "artic/num/checkpoint.hpp"

namespace artic::pipeline {

namespace fs = std::filesystem;

namespace {

// Per-channel sentence-wise standardisation for acoustic features.
MatX znorm_columns(const MatX& m) {
  MatX out = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mu = m.col(c).mean();
    const double sd = std::sqrt((m.col(c).array() - mu).square().mean());
    if (sd > 0.0)
      out.col(c) = (m.col(c).array() - mu) / sd;
    else
      out.col(c).setZero();
  }
  return out;
}

// Frame counts from the alignment and the trajectory may disagree by a
// frame or two of rounding; reconcile or reject.
Eigen::Index common_length(Eigen::Index a, Eigen::Index b, const std::string& id) {
  if (std::abs(a - b) > 2)
    throw DataError("utterance " + id + ": feature frames " + std::to_string(a) +
                    " vs target frames " + std::to_string(b) + " differ by more than 2");
  return std::min(a, b);
}

}  // namespace

PreparedUtterance prepare_utterance(const corpus::Utterance& utt, double lowpass_hz,
                                    double target_rate_hz) {
  utt.validate();
  PreparedUtterance out;
  out.id = utt.id;
  out.subject = utt.subject;
  out.alignment = utt.alignment;

  auto traj = corpus::lowpass_filter(utt.trajectory, lowpass_hz);
  traj = corpus::resample(traj, target_rate_hz);
  auto [normalized, stats] = corpus::znormalize(traj);
  out.stats = stats;

  auto phn = feat::encode_phn(utt.alignment);
  auto tphn = feat::expand_tphn(utt.alignment);
  out.phn = phn.rows;

  const Eigen::Index len = common_length(tphn.rows.rows(), normalized.frames.rows(), utt.id);
  out.target = normalized.frames.topRows(len);
  out.tphn = tphn.rows.topRows(len);

  feat::FeatureMatrix acoustic;
  if (utt.proxy.rows() > 0) {
    acoustic.kind = feat::FeatureKind::kMfcc;
    acoustic.frame_period_s = feat::kFramePeriodS;
    acoustic.rows = znorm_columns(utt.proxy);
  } else if (utt.waveform.size() > 0) {
    acoustic = feat::compute_mfcc(utt.waveform);
    acoustic.rows = znorm_columns(acoustic.rows);
  }
  if (acoustic.rows.rows() > 0) {
    const Eigen::Index alen = common_length(acoustic.rows.rows(), len, utt.id);
    out.mfcc = acoustic.rows.topRows(alen);
    feat::FeatureMatrix mf;
    mf.kind = feat::FeatureKind::kMfcc;
    mf.frame_period_s = feat::kFramePeriodS;
    mf.rows = out.mfcc;
    feat::FeatureMatrix tp;
    tp.kind = feat::FeatureKind::kTphn;
    tp.frame_period_s = feat::kFramePeriodS;
    tp.rows = out.tphn;
    out.mfcc_tphn = feat::concat_features(mf, tp).rows;
  }
  return out;
}

std::vector<PreparedUtterance> prepare_corpus(const corpus::Corpus& corpus) {
  std::vector<PreparedUtterance> out;
  out.reserve(corpus.utterances.size());
  for (const auto& utt : corpus.utterances) out.push_back(prepare_utterance(utt));
  return out;
}

bool pairing_valid(feat::FeatureKind kind, const std::string& model_kind) {
  if (model_kind == "attention") return kind == feat::FeatureKind::kPhn;
  if (model_kind == "blstm") return kind != feat::FeatureKind::kPhn;
  return false;
}

train::TrainItem to_item(const PreparedUtterance& u, feat::FeatureKind kind) {
  train::TrainItem item;
  item.id = u.id;
  item.subject = u.subject;
  item.alignment = u.alignment;
  switch (kind) {
    case feat::FeatureKind::kPhn: item.features = u.phn; break;
    case feat::FeatureKind::kTphn: item.features = u.tphn; break;
    case feat::FeatureKind::kMfcc: item.features = u.mfcc; break;
    case feat::FeatureKind::kMfccTphn: item.features = u.mfcc_tphn; break;
  }
  if (item.features.rows() == 0)
    throw DataError("utterance " + u.id + " has no " +
                    std::string(feat::feature_kind_name(kind)) + " features");
  item.target = kind == feat::FeatureKind::kPhn
                    ? u.target
                    : u.target.topRows(std::min(u.target.rows(), item.features.rows()));
  if (kind != feat::FeatureKind::kPhn) item.features = item.features.topRows(item.target.rows());
  return item;
}

std::vector<train::TrainItem> select_items(const std::vector<PreparedUtterance>& prepared,
                                           const std::map<std::string, corpus::Split>& split,
                                           feat::FeatureKind kind, corpus::Split which,
                                           const std::string& subject) {
  std::vector<train::TrainItem> out;
  for (const auto& u : prepared) {
    auto it = split.find(u.id);
    if (it == split.end()) throw DataError("utterance " + u.id + " missing from split");
    if (it->second != which) continue;
    if (!subject.empty() && u.subject != subject) continue;
    out.push_back(to_item(u, kind));
  }
  return out;
}

eval::EvalReport evaluate_blstm(model::BlstmModel& model, const std::vector<train::TrainItem>& test,
                                feat::FeatureKind kind, const EvalOptions& opts) {
  std::vector<eval::SentenceEval> sentences;
  for (const auto& item : test) {
    MatX pred = model.predict(item.features);
    sentences.push_back(
        eval::evaluate_sentence(item.id, item.subject, pred, item.target, /*dtw_first=*/false));
  }
  return eval::aggregate_report(std::move(sentences), "blstm", feat::feature_kind_name(kind),
                                opts.regime, opts.subject_filter);
}

eval::EvalReport evaluate_attention(model::AttentionModel& model,
                                    const std::vector<train::TrainItem>& test,
                                    const EvalOptions& opts) {
  std::vector<eval::SentenceEval> sentences;
  for (const auto& item : test) {
    auto inf = model.infer(item.features, opts.stop_threshold, opts.max_frames);
    auto s = eval::evaluate_sentence(item.id, item.subject, inf.y, item.target,
                                     /*dtw_first=*/true);
    // alignment quality diagnostic from a teacher-forced pass
    num::Tape<double> tape;
    tape.set_grad_enabled(false);
    auto tf = model.forward_teacher_forced(tape, item.features, item.target,
                                           model::ForwardMode::inference());
    s.diagonality = eval::attention_diagonality(tf.alphas, item.alignment);
    sentences.push_back(std::move(s));
  }
  return eval::aggregate_report(std::move(sentences), "attention", "phn", opts.regime,
                                opts.subject_filter);
}

// ------------------------------------------------------------- cache file IO

void save_prepared(const PreparedUtterance& u, const std::string& path) {
  num::Container c;
  c.meta["id"] = u.id;
  c.meta["subject"] = u.subject;
  c.meta["frame_rate_hz"] = 100.0;
  nlohmann::json al = nlohmann::json::array();
  for (const auto& iv : u.alignment.intervals) al.push_back({iv.phoneme, iv.start_s, iv.end_s});
  c.meta["alignment"] = al;
  auto put = [&](const std::string& name, const MatX& m, const std::string& kind) {
    if (m.size() == 0) return;
    num::TensorD t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    t.mat() = m;
    c.tensors[name] = num::Container::Item{std::move(t), false};
    c.meta["kinds"][name] = kind;
  };
  put("target", u.target, "trajectory");
  put("phn", u.phn, "phn");
  put("tphn", u.tphn, "tphn");
  put("mfcc", u.mfcc, "mfcc");
  put("mfcc_tphn", u.mfcc_tphn, "mfcc_tphn");
  num::TensorD mean({12});
  mean.data() = u.stats.mean;
  num::TensorD sd({12});
  sd.data() = u.stats.std;
  c.tensors["norm.mean"] = num::Container::Item{std::move(mean), false};
  c.tensors["norm.std"] = num::Container::Item{std::move(sd), false};
  num::save_container(path, c);
}

PreparedUtterance load_prepared(const std::string& path) {
  auto c = num::load_container(path);
  PreparedUtterance u;
  u.id = c.meta.at("id").get<std::string>();
  u.subject = c.meta.at("subject").get<std::string>();
  for (const auto& iv : c.meta.at("alignment"))
    u.alignment.intervals.push_back(
        {iv[0].get<std::string>(), iv[1].get<double>(), iv[2].get<double>()});
  auto get = [&](const std::string& name) -> MatX {
    auto it = c.tensors.find(name);
    if (it == c.tensors.end()) return MatX();
    return it->second.tensor.view2d(1);
  };
  u.target = get("target");
  u.phn = get("phn");
  u.tphn = get("tphn");
  u.mfcc = get("mfcc");
  u.mfcc_tphn = get("mfcc_tphn");
  u.stats.mean = c.tensors.at("norm.mean").tensor.data();
  u.stats.std = c.tensors.at("norm.std").tensor.data();
  return u;
}

// --------------------------------------------------------- corpus directory

void save_corpus_dir(const corpus::Corpus& corpus, const std::string& dir,
                     const nlohmann::json& extra_meta, bool force) {
  fs::path root(dir);
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!force)
      throw DataError("output directory " + dir + " is not empty (use --force to overwrite)");
    fs::remove_all(root);
  }
  fs::create_directories(root);

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["frame_rate_hz"] = 100.0;
  for (auto& [k, v] : extra_meta.items()) manifest[k] = v;
  for (const auto& utt : corpus.utterances) {
    const std::string traj = utt.id + ".traj.csv";
    const std::string lab = utt.id + ".lab";
    corpus::save_trajectory(utt.trajectory, (root / traj).string());
    corpus::save_alignment(utt.alignment, (root / lab).string());
    nlohmann::json entry = {{"id", utt.id}, {"subject", utt.subject},
                            {"trajectory", traj}, {"alignment", lab}};
    if (utt.proxy.rows() > 0) {
      const std::string proxy = utt.id + ".proxy.csv";
      corpus::save_proxy(utt.proxy, utt.trajectory.frame_rate_hz, (root / proxy).string());
      entry["proxy"] = proxy;
    }
    manifest["utterances"].push_back(entry);
  }
  std::ofstream os(root / "manifest.json");
  os << manifest.dump(2) << "\n";
}

corpus::Corpus load_corpus_dir(const std::string& dir) {
  fs::path root(dir);
  std::ifstream is(root / "manifest.json");
  if (!is) throw DataError("no manifest.json in " + dir);
  nlohmann::json manifest;
  try {
    is >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt manifest in " + dir + ": " + e.what());
  }
  corpus::Corpus out;
  std::vector<std::string> problems;
  for (const auto& entry : manifest.at("utterances")) {
    try {
      corpus::Utterance utt;
      utt.id = entry.at("id").get<std::string>();
      utt.subject = entry.at("subject").get<std::string>();
      utt.trajectory =
          corpus::load_trajectory((root / entry.at("trajectory").get<std::string>()).string());
      utt.alignment =
          corpus::load_alignment((root / entry.at("alignment").get<std::string>()).string());
      if (entry.contains("proxy"))
        utt.proxy = corpus::load_proxy((root / entry.at("proxy").get<std::string>()).string());
      utt.validate();
      out.utterances.push_back(std::move(utt));
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " utterances failed to load:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  return out;
}

}  // namespace artic::pipeline
