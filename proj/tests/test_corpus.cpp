#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "artic/corpus/io.hpp"
#include "artic/corpus/preprocess.hpp"
#include "artic/corpus/split.hpp"
#include "artic/num/rng.hpp"
#include "reference/reference_data.hpp"

using namespace artic;
using namespace artic::corpus;

namespace {

ArticulatoryTrajectory make_traj(Eigen::Index frames, double rate) {
  ArticulatoryTrajectory t;
  t.frame_rate_hz = rate;
  t.frames = MatX::Zero(frames, kNumChannels);
  return t;
}

ArticulatoryTrajectory sine_traj(double freq_hz, double rate, double seconds,
                                 double amplitude = 1.0) {
  const auto frames = static_cast<Eigen::Index>(seconds * rate);
  auto t = make_traj(frames, rate);
  for (Eigen::Index i = 0; i < frames; ++i)
    t.frames.row(i).setConstant(amplitude * std::sin(2.0 * M_PI * freq_hz * i / rate));
  return t;
}

double interior_amplitude(const ArticulatoryTrajectory& t, int margin) {
  return t.frames.col(0).segment(margin, t.frames.rows() - 2 * margin).cwiseAbs().maxCoeff();
}

Corpus dummy_corpus(int subjects, int per_subject) {
  Corpus corpus;
  for (int s = 0; s < subjects; ++s)
    for (int u = 0; u < per_subject; ++u) {
      Utterance utt;
      utt.subject = "S" + std::to_string(s);
      utt.id = utt.subject + "_u" + std::to_string(u);
      corpus.utterances.push_back(std::move(utt));
    }
  return corpus;
}

int count_split(const std::map<std::string, Split>& m, Split s) {
  int n = 0;
  for (const auto& [id, sp] : m) n += sp == s;
  return n;
}

}  // namespace

// --------------------------------------------------------------------- filter

TEST_CASE("lowpass_filter: a DC channel is unchanged") {
  auto t = make_traj(200, 250.0);
  t.frames.setConstant(3.25);
  auto y = lowpass_filter(t, 25.0);
  CHECK((y.frames.array() - 3.25).abs().maxCoeff() < 1e-6);
}

TEST_CASE("lowpass_filter: 10 Hz tone at 250 Hz passes with gain in [0.95, 1]") {
  auto t = sine_traj(10.0, 250.0, 2.0);
  auto y = lowpass_filter(t, 25.0);
  const double gain = interior_amplitude(y, 100);
  CHECK(gain >= 0.95);
  CHECK(gain <= 1.0);
}

TEST_CASE("lowpass_filter: 60 Hz tone is attenuated below 0.1") {
  auto t = sine_traj(60.0, 250.0, 2.0);
  auto y = lowpass_filter(t, 25.0);
  CHECK(interior_amplitude(y, 100) < 0.1);
}

TEST_CASE("lowpass_filter: passband filtering is nearly idempotent") {
  auto t = sine_traj(10.0, 250.0, 2.0);
  auto once = lowpass_filter(t, 25.0);
  auto twice = lowpass_filter(once, 25.0);
  const double a1 = interior_amplitude(once, 100);
  const double a2 = interior_amplitude(twice, 100);
  CHECK(std::abs(a1 - a2) / a1 < 0.01);
}

TEST_CASE("lowpass_filter: commutes with channel permutation") {
  num::Rng rng(5);
  auto t = make_traj(150, 250.0);
  for (Eigen::Index i = 0; i < t.frames.size(); ++i) t.frames.data()[i] = rng.normal();
  auto filtered = lowpass_filter(t, 25.0);

  auto permuted = t;
  permuted.frames.col(0).swap(permuted.frames.col(7));
  auto filtered_perm = lowpass_filter(permuted, 25.0);
  CHECK((filtered_perm.frames.col(0) - filtered.frames.col(7)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((filtered_perm.frames.col(7) - filtered.frames.col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lowpass_filter: cutoff at or above Nyquist is a configuration error") {
  auto t = make_traj(100, 250.0);
  CHECK_THROWS_AS(lowpass_filter(t, 125.0), ConfigError);
  CHECK_THROWS_AS(lowpass_filter(t, 200.0), ConfigError);
}

TEST_CASE("filtfilt: matches the frozen reference implementation output") {
  VecX x(64);
  for (int i = 0; i < 64; ++i) x(i) = kFiltfiltInput[i];
  auto f = butterworth_lowpass(4, 25.0, 250.0);
  VecX y = filtfilt(f, x);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) worst = std::max(worst, std::abs(y(i) - kFiltfiltExpected[i]));
  CHECK(worst < 1e-8);
}

// ------------------------------------------------------------------- resample

TEST_CASE("resample: identical rate returns the input") {
  num::Rng rng(9);
  auto t = make_traj(100, 250.0);
  for (Eigen::Index i = 0; i < t.frames.size(); ++i) t.frames.data()[i] = rng.normal();
  auto y = resample(t, 250.0);
  CHECK((y.frames - t.frames).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("resample: a linear ramp stays a linear ramp") {
  auto t = make_traj(250, 250.0);
  for (Eigen::Index i = 0; i < 250; ++i) t.frames.row(i).setConstant(0.25 * i - 3.0);
  auto y = resample(t, 100.0);
  CHECK(y.frames.rows() == 100);
  for (Eigen::Index i = 0; i < y.frames.rows(); ++i) {
    const double expected = 0.25 * (static_cast<double>(i) * 2.5) - 3.0;
    CHECK(y.frames(i, 0) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("resample: 5 Hz sine from 250 to 100 Hz tracks the closed form") {
  const double amp = 0.4;
  auto t = sine_traj(5.0, 250.0, 2.0, amp);
  auto y = resample(t, 100.0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.frames.rows(); ++i) {
    const double expected = amp * std::sin(2.0 * M_PI * 5.0 * i / 100.0);
    worst = std::max(worst, std::abs(y.frames(i, 0) - expected));
  }
  CHECK(worst < 1e-3);
  CHECK(std::abs(y.duration_s() - t.duration_s()) <= 1.0 / 100.0);
}

TEST_CASE("resample: non-positive target rate raises") {
  auto t = make_traj(100, 250.0);
  CHECK_THROWS_AS(resample(t, 0.0), ConfigError);
  CHECK_THROWS_AS(resample(t, -10.0), ConfigError);
}

// ----------------------------------------------------------------- znormalize

TEST_CASE("znormalize: [1,2,3] standardises with the population std") {
  auto t = make_traj(3, 100.0);
  t.frames.col(0) << 1, 2, 3;
  auto [y, stats] = znormalize(t);
  CHECK(y.frames(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(y.frames(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y.frames(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK(stats.mean(0) == doctest::Approx(2.0));
  CHECK(stats.std(0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("znormalize: constant channel maps to zeros with std recorded as 0") {
  auto t = make_traj(5, 100.0);
  t.frames.col(3).setConstant(42.0);
  auto [y, stats] = znormalize(t);
  CHECK(y.frames.col(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.std(3) == 0.0);
  CHECK(stats.mean(3) == doctest::Approx(42.0));
}

TEST_CASE("znormalize: idempotent on already-normalized data") {
  num::Rng rng(13);
  auto t = make_traj(80, 100.0);
  for (Eigen::Index i = 0; i < t.frames.size(); ++i) t.frames.data()[i] = rng.normal();
  auto [y1, s1] = znormalize(t);
  auto [y2, s2] = znormalize(y1);
  CHECK((y2.frames - y1.frames).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("znormalize: mean 0 and variance 1 per channel; denormalize inverts") {
  num::Rng rng(14);
  auto t = make_traj(60, 100.0);
  for (Eigen::Index i = 0; i < t.frames.size(); ++i) t.frames.data()[i] = 2.0 + 3.0 * rng.normal();
  auto [y, stats] = znormalize(t);
  for (int c = 0; c < kNumChannels; ++c) {
    CHECK(std::abs(y.frames.col(c).mean()) < 1e-9);
    CHECK(std::abs((y.frames.col(c).array()).square().mean() - 1.0) < 1e-6);
  }
  auto back = denormalize(y, stats);
  CHECK((back.frames - t.frames).cwiseAbs().maxCoeff() < 1e-9);
}

// ---------------------------------------------------------------------- split

TEST_CASE("split_dataset: 460 utterances of one subject split 368/46/46") {
  auto corpus = dummy_corpus(1, 460);
  auto split = split_dataset(corpus, kDefaultSplitRatios, 42);
  CHECK(count_split(split, Split::kTrain) == 368);
  CHECK(count_split(split, Split::kValidation) == 46);
  CHECK(count_split(split, Split::kTest) == 46);
}

TEST_CASE("split_dataset: 10 utterances split 8/1/1") {
  auto corpus = dummy_corpus(1, 10);
  auto split = split_dataset(corpus, kDefaultSplitRatios, 1);
  CHECK(count_split(split, Split::kTrain) == 8);
  CHECK(count_split(split, Split::kValidation) == 1);
  CHECK(count_split(split, Split::kTest) == 1);
}

TEST_CASE("split_dataset: stratified per subject and deterministic in the seed") {
  auto corpus = dummy_corpus(10, 50);
  auto a = split_dataset(corpus, kDefaultSplitRatios, 7);
  auto b = split_dataset(corpus, kDefaultSplitRatios, 7);
  CHECK(a == b);
  // per-subject 40/5/5
  for (int s = 0; s < 10; ++s) {
    int train = 0, val = 0, test = 0;
    for (const auto& [id, sp] : a) {
      if (id.rfind("S" + std::to_string(s) + "_", 0) != 0) continue;
      train += sp == Split::kTrain;
      val += sp == Split::kValidation;
      test += sp == Split::kTest;
    }
    CHECK(train == 40);
    CHECK(val == 5);
    CHECK(test == 5);
  }
  auto c = split_dataset(corpus, kDefaultSplitRatios, 8);
  CHECK(a != c);  // overwhelmingly likely
}

TEST_CASE("split_dataset: fewer than 10 utterances is an error") {
  auto corpus = dummy_corpus(1, 9);
  CHECK_THROWS_AS(split_dataset(corpus, kDefaultSplitRatios, 1), DataError);
}

// ------------------------------------------------------------------------- io

TEST_CASE("trajectory io: save/load round trip is exact") {
  num::Rng rng(23);
  auto t = make_traj(37, 100.0);
  for (Eigen::Index i = 0; i < t.frames.size(); ++i) t.frames.data()[i] = rng.normal() * 1e3;
  const auto path = (std::filesystem::temp_directory_path() / "artic_traj.csv").string();
  save_trajectory(t, path);
  auto back = load_trajectory(path);
  CHECK(back.frame_rate_hz == doctest::Approx(100.0).epsilon(1e-12));
  CHECK((back.frames - t.frames).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("trajectory io: wrong channel count reports the header line") {
  const auto path = (std::filesystem::temp_directory_path() / "artic_bad_cols.csv").string();
  std::ofstream os(path);
  os << "time_s,UL_x,UL_y,LL_x,LL_y,Jaw_x,Jaw_y,TT_x,TT_y,TB_x,TB_y,TD_x\n";  // 11 channels
  os << "0,1,2,3,4,5,6,7,8,9,10,11\n";
  os.close();
  CHECK_THROWS_WITH_AS(load_trajectory(path),
                       doctest::Contains("channel"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("trajectory io: CRLF and LF line endings both parse") {
  auto t = make_traj(3, 100.0);
  t.frames.setConstant(1.5);
  const auto lf = (std::filesystem::temp_directory_path() / "artic_lf.csv").string();
  save_trajectory(t, lf);
  std::ifstream is(lf, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  is.close();
  std::string crlf_content;
  for (char c : content) {
    if (c == '\n') crlf_content += '\r';
    crlf_content += c;
  }
  const auto crlf = (std::filesystem::temp_directory_path() / "artic_crlf.csv").string();
  std::ofstream os(crlf, std::ios::binary);
  os << crlf_content;
  os.close();
  auto a = load_trajectory(lf);
  auto b = load_trajectory(crlf);
  CHECK((a.frames - b.frames).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(lf);
  std::filesystem::remove(crlf);
}

TEST_CASE("trajectory io: non-monotone time column is rejected with a line number") {
  const auto path = (std::filesystem::temp_directory_path() / "artic_nonmono.csv").string();
  std::ofstream os(path);
  os << "time_s";
  for (const auto& n : channel_names()) os << "," << n;
  os << "\n0,0,0,0,0,0,0,0,0,0,0,0,0\n0.02,0,0,0,0,0,0,0,0,0,0,0,0\n0.01,0,0,0,0,0,0,0,0,0,0,0,0\n";
  os.close();
  CHECK_THROWS_WITH_AS(load_trajectory(path), doctest::Contains(":4"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("alignment io: round trip and validation errors") {
  PhonemeAlignment a;
  a.intervals = {{"aa", 0.0, 0.12}, {"b", 0.12, 0.2}, {"iy", 0.2, 0.31}};
  const auto path = (std::filesystem::temp_directory_path() / "artic_al.lab").string();
  save_alignment(a, path);
  auto back = load_alignment(path);
  REQUIRE(back.size() == 3);
  CHECK(back.intervals[1].phoneme == "b");
  CHECK(back.intervals[2].end_s == 0.31);
  std::filesystem::remove(path);

  PhonemeAlignment gap;
  gap.intervals = {{"aa", 0.0, 0.1}, {"b", 0.15, 0.2}};
  CHECK_THROWS_AS(gap.validate(), DataError);

  PhonemeAlignment late;
  late.intervals = {{"aa", 0.1, 0.2}};
  CHECK_THROWS_AS(late.validate(), DataError);

  PhonemeAlignment zero;
  zero.intervals = {{"aa", 0.0, 0.0}};
  CHECK_THROWS_AS(zero.validate(), DataError);
}

TEST_CASE("utterance: alignment/trajectory duration mismatch is rejected") {
  Utterance u;
  u.id = "u0";
  u.trajectory = make_traj(100, 100.0);  // 1 s
  u.alignment.intervals = {{"aa", 0.0, 0.5}};
  CHECK_THROWS_AS(u.validate(), DataError);
  u.alignment.intervals = {{"aa", 0.0, 0.995}};
  CHECK_NOTHROW(u.validate());
}

TEST_CASE("preprocessing leaves alignments untouched") {
  auto t = sine_traj(10.0, 250.0, 1.0);
  Utterance u;
  u.id = "u";
  u.trajectory = t;
  u.alignment.intervals = {{"aa", 0.0, 0.5}, {"b", 0.5, 1.0}};
  auto before = u.alignment;
  u.trajectory = lowpass_filter(u.trajectory, 25.0);
  u.trajectory = resample(u.trajectory, 100.0);
  u.trajectory = znormalize(u.trajectory).first;
  CHECK(u.alignment.size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(u.alignment.intervals[i].phoneme == before.intervals[i].phoneme);
    CHECK(u.alignment.intervals[i].start_s == before.intervals[i].start_s);
    CHECK(u.alignment.intervals[i].end_s == before.intervals[i].end_s);
  }
  CHECK_NOTHROW(u.alignment.validate());
}
