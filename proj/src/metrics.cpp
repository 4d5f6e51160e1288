#include "artic/eval/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace artic::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

VecX rmse_per_articulator(const MatX& y_pred, const MatX& y_true) {
  if (y_pred.rows() != y_true.rows())
    throw DimensionError("rmse_per_articulator: length mismatch (" + std::to_string(y_pred.rows()) +
                         " vs " + std::to_string(y_true.rows()) +
                         "); align variable-length predictions with dtw_align first");
  if (y_pred.cols() != y_true.cols()) throw DimensionError("rmse_per_articulator: channel mismatch");
  VecX out(y_pred.cols());
  for (Eigen::Index c = 0; c < y_pred.cols(); ++c)
    out(c) = std::sqrt((y_pred.col(c) - y_true.col(c)).squaredNorm() /
                       static_cast<double>(y_pred.rows()));
  return out;
}

VecX cc_per_articulator(const MatX& y_pred, const MatX& y_true) {
  if (y_pred.rows() != y_true.rows())
    throw DimensionError("cc_per_articulator: length mismatch; run dtw_align first");
  if (y_pred.cols() != y_true.cols()) throw DimensionError("cc_per_articulator: channel mismatch");
  VecX out(y_pred.cols());
  const auto n = static_cast<double>(y_pred.rows());
  for (Eigen::Index c = 0; c < y_pred.cols(); ++c) {
    const double mp = y_pred.col(c).mean(), mt = y_true.col(c).mean();
    const auto dp = (y_pred.col(c).array() - mp).matrix();
    const auto dt = (y_true.col(c).array() - mt).matrix();
    const double sp = dp.norm(), st = dt.norm();
    out(c) = (sp > 0.0 && st > 0.0 && n > 1) ? dp.dot(dt) / (sp * st) : kNaN;
  }
  return out;
}

double attention_diagonality(const MatX& alphas, const corpus::PhonemeAlignment& alignment,
                             double frame_rate_hz) {
  alignment.validate();
  const auto n_ph = static_cast<Eigen::Index>(alignment.size());
  Eigen::Index first_col = 0;
  if (alphas.cols() == n_ph + 1)
    first_col = 1;  // drop the start-token column
  else if (alphas.cols() != n_ph)
    throw DimensionError("attention_diagonality: " + std::to_string(alphas.cols()) +
                         " attention columns vs " + std::to_string(n_ph) + " phonemes");
  const Eigen::Index T = alphas.rows();
  if (T < 1) throw DimensionError("attention_diagonality: empty attention matrix");

  double acc = 0.0;
  for (Eigen::Index p = 0; p < n_ph; ++p) {
    const auto col = alphas.col(first_col + p);
    const double mass = col.sum();
    double centroid;
    if (mass > 1e-12) {
      double weighted = 0.0;
      for (Eigen::Index t = 0; t < T; ++t) weighted += static_cast<double>(t) * col(t);
      centroid = weighted / mass;
    } else {
      centroid = static_cast<double>(T - 1) / 2.0;  // unattended token: utterance midpoint
    }
    const auto& iv = alignment.intervals[static_cast<std::size_t>(p)];
    // frame-center convention: frame t spans [t, t+1) / rate
    const double midpoint_frame = 0.5 * (iv.start_s + iv.end_s) * frame_rate_hz - 0.5;
    acc += std::abs(centroid - midpoint_frame);
  }
  return acc / static_cast<double>(n_ph);
}

SentenceEval evaluate_sentence(const std::string& id, const std::string& subject,
                               const MatX& y_pred, const MatX& y_true, bool dtw_first) {
  SentenceEval s;
  s.id = id;
  s.subject = subject;
  s.pred_frames = y_pred.rows();
  s.true_frames = y_true.rows();
  MatX p = y_pred, t = y_true;
  if (dtw_first) {
    auto dtw = dtw_align(y_pred, y_true);
    std::tie(p, t) = apply_dtw_path(y_pred, y_true, dtw);
  }
  s.rmse = rmse_per_articulator(p, t);
  s.cc = cc_per_articulator(p, t);
  s.mean_rmse = s.rmse.mean();
  double cc_sum = 0.0;
  int cc_n = 0;
  for (Eigen::Index c = 0; c < s.cc.size(); ++c) {
    if (std::isnan(s.cc(c))) {
      ++s.undefined_cc;
    } else {
      cc_sum += s.cc(c);
      ++cc_n;
    }
  }
  s.mean_cc = cc_n > 0 ? cc_sum / cc_n : kNaN;
  return s;
}

EvalReport aggregate_report(std::vector<SentenceEval> sentences, const std::string& model_kind,
                            const std::string& feature_kind, const std::string& regime,
                            const std::string& subject_filter) {
  if (sentences.empty()) throw DataError("evaluate: empty test split");
  EvalReport r;
  r.model_kind = model_kind;
  r.feature_kind = feature_kind;
  r.regime = regime;
  r.subject_filter = subject_filter;
  r.sentences = std::move(sentences);

  const Eigen::Index C = r.sentences.front().rmse.size();
  r.rmse_per_channel = VecX::Zero(C);
  r.cc_per_channel = VecX::Zero(C);
  VecX cc_counts = VecX::Zero(C);
  std::vector<double> rmse_all, cc_all, diag_all;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_subject;

  for (const auto& s : r.sentences) {
    r.rmse_per_channel += s.rmse;
    for (Eigen::Index c = 0; c < C; ++c)
      if (!std::isnan(s.cc(c))) {
        r.cc_per_channel(c) += s.cc(c);
        cc_counts(c) += 1.0;
      }
    r.undefined_cc_channels += s.undefined_cc;
    rmse_all.push_back(s.mean_rmse);
    if (!std::isnan(s.mean_cc)) cc_all.push_back(s.mean_cc);
    if (s.diagonality) diag_all.push_back(*s.diagonality);
    auto& [rs, cs] = by_subject[s.subject];
    rs.push_back(s.mean_rmse);
    if (!std::isnan(s.mean_cc)) cs.push_back(s.mean_cc);
  }
  r.rmse_per_channel /= static_cast<double>(r.sentences.size());
  for (Eigen::Index c = 0; c < C; ++c)
    r.cc_per_channel(c) = cc_counts(c) > 0 ? r.cc_per_channel(c) / cc_counts(c) : kNaN;

  r.mean_rmse = mean_of(rmse_all);
  r.std_rmse = std_of(rmse_all);
  r.mean_cc = mean_of(cc_all);
  r.std_cc = std_of(cc_all);
  for (auto& [subject, lists] : by_subject) {
    SubjectAggregate agg;
    agg.subject = subject;
    agg.sentences = static_cast<int>(lists.first.size());
    agg.mean_rmse = mean_of(lists.first);
    agg.std_rmse = std_of(lists.first);
    agg.mean_cc = mean_of(lists.second);
    agg.std_cc = std_of(lists.second);
    r.per_subject.push_back(agg);
  }
  if (!diag_all.empty()) {
    r.mean_diagonality = mean_of(diag_all);
    int within = 0;
    for (double d : diag_all) within += d <= 3.0;
    r.diagonality_within_3_frames = static_cast<double>(within) / diag_all.size();
  }
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["model_kind"] = model_kind;
  j["feature_kind"] = feature_kind;
  j["regime"] = regime;
  if (!subject_filter.empty()) j["subject"] = subject_filter;
  j["n_sentences"] = sentences.size();
  j["mean_rmse"] = mean_rmse;
  j["std_rmse"] = std_rmse;
  j["mean_cc"] = mean_cc;
  j["std_cc"] = std_cc;
  j["undefined_cc_channels"] = undefined_cc_channels;
  auto vec2json = [](const VecX& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  j["channels"] = corpus::channel_names();
  j["rmse_per_channel"] = vec2json(rmse_per_channel);
  std::vector<nlohmann::json> ccs;
  for (Eigen::Index c = 0; c < cc_per_channel.size(); ++c)
    ccs.push_back(std::isnan(cc_per_channel(c)) ? nlohmann::json(nullptr)
                                                : nlohmann::json(cc_per_channel(c)));
  j["cc_per_channel"] = ccs;
  for (const auto& s : per_subject) {
    j["per_subject"].push_back({{"subject", s.subject},
                                {"sentences", s.sentences},
                                {"mean_rmse", s.mean_rmse},
                                {"std_rmse", s.std_rmse},
                                {"mean_cc", s.mean_cc},
                                {"std_cc", s.std_cc}});
  }
  if (mean_diagonality) {
    j["attention"]["mean_diagonality_frames"] = *mean_diagonality;
    j["attention"]["fraction_within_3_frames"] = *diagonality_within_3_frames;
  }
  return j;
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "id,subject,mean_rmse,mean_cc,undefined_cc,pred_frames,true_frames,diagonality\n";
  for (const auto& s : sentences) {
    os << s.id << ',' << s.subject << ',' << s.mean_rmse << ',' << s.mean_cc << ','
       << s.undefined_cc << ',' << s.pred_frames << ',' << s.true_frames << ',';
    if (s.diagonality) os << *s.diagonality;
    os << '\n';
  }
  return os.str();
}

}  // namespace artic::eval
