#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "artic/feat/features.hpp"
#include "artic/num/rng.hpp"
#include "reference/reference_data.hpp"

using namespace artic;
using namespace artic::feat;

namespace {

corpus::PhonemeAlignment align(std::initializer_list<corpus::PhonemeInterval> ivs) {
  corpus::PhonemeAlignment a;
  a.intervals = ivs;
  return a;
}

bool is_one_hot(const Eigen::RowVectorXd& row) {
  int ones = 0;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (row(i) == 1.0)
      ++ones;
    else if (row(i) != 0.0)
      return false;
  }
  return ones == 1;
}

}  // namespace

// ------------------------------------------------------------------ inventory

TEST_CASE("inventory: 40 symbols with the start token at index 0") {
  const auto& inv = PhonemeInventory::instance();
  CHECK(inv.symbols().size() == 40);
  CHECK(inv.symbol(0) == PhonemeInventory::kStartToken);
  CHECK(inv.phonemes().size() == 39);
  CHECK(inv.index("aa") == 1);
  CHECK(inv.index("zh") == 39);
  CHECK_THROWS_AS(inv.index("qq"), DataError);
}

// ------------------------------------------------------------------------ phn

TEST_CASE("encode_phn: single phoneme gives start row plus one-hot row") {
  auto m = encode_phn(align({{"aa", 0.0, 0.1}}));
  CHECK(m.kind == FeatureKind::kPhn);
  REQUIRE(m.rows.rows() == 2);
  REQUIRE(m.rows.cols() == 40);
  CHECK(m.rows(0, 0) == 1.0);
  CHECK(m.rows(1, PhonemeInventory::instance().index("aa")) == 1.0);
  CHECK(m.rows.row(0).sum() == 1.0);
  CHECK(m.rows.row(1).sum() == 1.0);
}

TEST_CASE("encode_phn: N phonemes give N+1 one-hot rows") {
  num::Rng rng(3);
  const auto& phones = PhonemeInventory::instance().phonemes();
  for (int trial = 0; trial < 10; ++trial) {
    corpus::PhonemeAlignment a;
    const int n = 1 + static_cast<int>(rng.uniform_int(30));
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = 0.05 + 0.1 * rng.uniform();
      a.intervals.push_back({phones[rng.uniform_int(phones.size())], t, t + d});
      t += d;
    }
    auto m = encode_phn(a);
    CHECK(m.rows.rows() == n + 1);
    for (Eigen::Index r = 0; r < m.rows.rows(); ++r) CHECK(is_one_hot(m.rows.row(r)));
  }
}

TEST_CASE("encode_phn: a 23-phone sentence encodes as 24x40") {
  // phone count from a MOCHA-style sentence transcription
  const char* phones[] = {"dh", "ih", "s", "w", "aa", "z", "iy", "z",  "iy", "f", "ao", "r",
                          "ah", "s", "t", "uw", "d", "ey", "z", "ah", "g",  "ow", "n"};
  corpus::PhonemeAlignment a;
  double t = 0.0;
  for (const char* p : phones) {
    a.intervals.push_back({p, t, t + 0.08});
    t += 0.08;
  }
  REQUIRE(a.size() == 23);
  auto m = encode_phn(a);
  CHECK(m.rows.rows() == 24);
  CHECK(m.rows.cols() == 40);
}

TEST_CASE("encode_phn: unknown phoneme raises an inventory error") {
  CHECK_THROWS_AS(encode_phn(align({{"xx", 0.0, 0.1}})), DataError);
}

// ----------------------------------------------------------------------- tphn

TEST_CASE("expand_tphn: one 30 ms phoneme gives three identical rows") {
  auto m = expand_tphn(align({{"aa", 0.0, 0.03}}));
  CHECK(m.kind == FeatureKind::kTphn);
  REQUIRE(m.rows.rows() == 3);
  const int aa = PhonemeInventory::instance().index("aa");
  for (int t = 0; t < 3; ++t) {
    CHECK(m.rows(t, aa) == 1.0);
    CHECK(m.rows.row(t).sum() == 1.0);
  }
}

TEST_CASE("expand_tphn: frame-to-interval lookup uses the left edge") {
  auto m = expand_tphn(align({{"aa", 0.0, 0.02}, {"b", 0.02, 0.05}}));
  REQUIRE(m.rows.rows() == 5);
  const int aa = PhonemeInventory::instance().index("aa");
  const int b = PhonemeInventory::instance().index("b");
  CHECK(m.rows(0, aa) == 1.0);
  CHECK(m.rows(1, aa) == 1.0);
  CHECK(m.rows(2, b) == 1.0);  // boundary tie goes to the later phoneme
  CHECK(m.rows(3, b) == 1.0);
  CHECK(m.rows(4, b) == 1.0);
}

TEST_CASE("expand_tphn: a 4-second utterance yields 400 rows") {
  auto m = expand_tphn(align({{"aa", 0.0, 2.0}, {"iy", 2.0, 4.0}}));
  CHECK(m.rows.rows() == 400);
}

TEST_CASE("expand_tphn: row count times period matches duration within one frame") {
  num::Rng rng(17);
  const auto& phones = PhonemeInventory::instance().phonemes();
  for (int trial = 0; trial < 20; ++trial) {
    corpus::PhonemeAlignment a;
    double t = 0.0;
    const int n = 1 + static_cast<int>(rng.uniform_int(12));
    for (int i = 0; i < n; ++i) {
      double d = 0.03 + 0.15 * rng.uniform();
      a.intervals.push_back({phones[rng.uniform_int(phones.size())], t, t + d});
      t += d;
    }
    auto m = expand_tphn(a);
    CHECK(std::abs(m.rows.rows() * 0.010 - a.total_duration_s()) <= 0.010);
    for (Eigen::Index r = 0; r < m.rows.rows(); ++r) CHECK(is_one_hot(m.rows.row(r)));
    // argmax at every frame recovers the aligned phoneme
    for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
      Eigen::Index arg;
      m.rows.row(r).maxCoeff(&arg);
      const auto& iv = a.intervals[a.index_at(r * 0.010)];
      CHECK(PhonemeInventory::instance().symbol(static_cast<int>(arg)) == iv.phoneme);
    }
  }
}

TEST_CASE("expand_tphn: zero-duration interval is rejected") {
  CHECK_THROWS_AS(expand_tphn(align({{"aa", 0.0, 0.0}})), DataError);
}

// --------------------------------------------------------------------- concat

TEST_CASE("concat_features: widths and column order") {
  FeatureMatrix mfcc;
  mfcc.kind = FeatureKind::kMfcc;
  mfcc.frame_period_s = 0.010;
  mfcc.rows = MatX::Constant(400, 13, 2.0);
  FeatureMatrix tphn;
  tphn.kind = FeatureKind::kTphn;
  tphn.frame_period_s = 0.010;
  tphn.rows = MatX::Constant(400, 40, 5.0);
  auto cat = concat_features(mfcc, tphn);
  CHECK(cat.rows.rows() == 400);
  CHECK(cat.rows.cols() == 53);
  CHECK(cat.rows(0, 0) == 2.0);
  CHECK(cat.rows(0, 13) == 5.0);

  mfcc.rows = MatX::Constant(401, 13, 2.0);
  auto trimmed = concat_features(mfcc, tphn);
  CHECK(trimmed.rows.rows() == 400);

  mfcc.rows = MatX::Constant(410, 13, 2.0);
  CHECK_THROWS_AS(concat_features(mfcc, tphn), DataError);
}

// ----------------------------------------------------------------------- mfcc

TEST_CASE("compute_mfcc: silence gives identical frames") {
  VecX silence = VecX::Zero(16000);
  auto m = compute_mfcc(silence);
  REQUIRE(m.rows.rows() == (16000 - 400) / 160 + 1);
  CHECK(m.rows.cols() == 13);
  for (Eigen::Index t = 1; t < m.rows.rows(); ++t)
    CHECK((m.rows.row(t) - m.rows.row(0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("compute_mfcc: a pure 1 kHz tone is stationary") {
  VecX tone(8000);
  for (Eigen::Index i = 0; i < tone.size(); ++i)
    tone(i) = 0.5 * std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);
  auto m = compute_mfcc(tone);
  for (int c = 0; c < 13; ++c) {
    const auto col = m.rows.col(c).tail(m.rows.rows() - 1);
    const double mu = col.mean();
    const double var = (col.array() - mu).square().mean();
    CHECK(var < 1e-6);
  }
}

TEST_CASE("compute_mfcc: white noise matches the frozen reference") {
  VecX wave(1600);
  for (int i = 0; i < 1600; ++i) wave(i) = kMfccWaveform[i];
  auto m = compute_mfcc(wave);
  REQUIRE(m.rows.rows() == kMfccFrames);
  REQUIRE(m.rows.cols() == kMfccCoeffs);
  double worst = 0.0;
  for (int t = 0; t < kMfccFrames; ++t)
    for (int c = 0; c < kMfccCoeffs; ++c)
      worst = std::max(worst, std::abs(m.rows(t, c) - kMfccExpected[t * kMfccCoeffs + c]));
  CHECK(worst < 1e-3);
  MESSAGE("mfcc reference max abs diff: " << worst);
}

TEST_CASE("compute_mfcc: waveform shorter than a window raises") {
  CHECK_THROWS_AS(compute_mfcc(VecX::Zero(399)), DataError);
}

// ------------------------------------------------------------------ pad_batch

TEST_CASE("pad_batch: masks mark the real frames") {
  FeatureMatrix a;
  a.kind = FeatureKind::kTphn;
  a.rows = MatX::Ones(100, 40);
  FeatureMatrix b = a;
  b.rows = MatX::Ones(400, 40);
  std::vector<MatX> targets = {MatX::Ones(100, 12), MatX::Ones(400, 12)};
  auto batch = pad_batch({a, b}, targets, {"u0", "u1"});
  CHECK(batch.mask.row(0).sum() == 100.0);
  CHECK(batch.mask.row(1).sum() == 400.0);
  CHECK(batch.inputs.shape() == std::vector<std::size_t>{2, 400, 40});
  CHECK(batch.targets.shape() == std::vector<std::size_t>{2, 400, 12});
  CHECK(batch.lengths[0] == 100);
  // padded region is zero
  const auto& data = batch.inputs.data();
  // element (b=0, t=399, d=0): index b + B*(t + maxlen*d)
  CHECK(data(0 + 2 * (399 + 400 * 0)) == 0.0);
  CHECK(data(1 + 2 * (399 + 400 * 0)) == 1.0);
}

TEST_CASE("pad_batch: empty batch and over-length utterances raise") {
  CHECK_THROWS_AS(pad_batch({}, {}, {}), DataError);
  FeatureMatrix big;
  big.kind = FeatureKind::kTphn;
  big.rows = MatX::Ones(401, 40);
  CHECK_THROWS_WITH_AS(pad_batch({big}, {MatX::Ones(401, 12)}, {"long_utt"}),
                       doctest::Contains("long_utt"), DataError);
}

TEST_CASE("pad_batch: batch of 25 has leading dimension 25") {
  std::vector<FeatureMatrix> fs;
  std::vector<MatX> ts;
  std::vector<std::string> ids;
  for (int i = 0; i < 25; ++i) {
    FeatureMatrix f;
    f.kind = FeatureKind::kMfcc;
    f.rows = MatX::Ones(50 + i, 13);
    fs.push_back(f);
    ts.push_back(MatX::Ones(50 + i, 12));
    ids.push_back("u" + std::to_string(i));
  }
  auto batch = pad_batch(fs, ts, ids);
  CHECK(batch.inputs.dim(0) == 25);
  CHECK(batch.targets.dim(0) == 25);
  CHECK(batch.mask.rows() == 25);
}
