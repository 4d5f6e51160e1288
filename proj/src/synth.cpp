#include "artic/synth/synth.hpp"

#include <cmath>

#include "artic/feat/inventory.hpp"

namespace artic::synth {

GestureSet GestureSet::standard(std::uint64_t seed, double duration_jitter) {
  num::Rng rng(num::mix_seed(seed, 0x6765737475726573ULL));
  GestureSet set;
  for (const auto& ph : feat::PhonemeInventory::instance().phonemes()) {
    GestureSpec spec;
    spec.target = VecX(corpus::kNumChannels);
    for (int c = 0; c < corpus::kNumChannels; ++c) spec.target(c) = rng.uniform(-1.0, 1.0);
    spec.time_constant_s = rng.uniform(0.030, 0.050);
    spec.mean_duration_s = rng.uniform(0.060, 0.120);
    spec.duration_jitter = duration_jitter;
    set.specs.emplace(ph, std::move(spec));
  }
  return set;
}

const GestureSpec& GestureSet::at(const std::string& phoneme) const {
  auto it = specs.find(phoneme);
  if (it == specs.end()) throw DataError("no gesture spec for phoneme '" + phoneme + "'");
  return it->second;
}

SubjectProfile SubjectProfile::sample(const std::string& id, num::Rng& rng, double noise_level) {
  SubjectProfile p;
  p.id = id;
  p.offset = VecX(corpus::kNumChannels);
  p.scale = VecX(corpus::kNumChannels);
  for (int c = 0; c < corpus::kNumChannels; ++c) {
    p.offset(c) = rng.normal(0.0, 0.3);
    p.scale(c) = rng.uniform(0.8, 1.25);
  }
  p.duration_scale = rng.uniform(0.9, 1.1);
  p.embedding = VecX(4);
  for (int i = 0; i < 4; ++i) p.embedding(i) = rng.normal();
  p.mixing = MatX(13, corpus::kNumChannels + 4);
  for (Eigen::Index i = 0; i < p.mixing.size(); ++i)
    p.mixing.data()[i] = rng.normal(0.0, 1.0 / 4.0);
  p.noise_level = noise_level;
  p.validate();
  return p;
}

void SubjectProfile::validate() const {
  if (scale.minCoeff() <= 0.0) throw ConfigError("subject scale must be positive");
  Eigen::ColPivHouseholderQR<MatX> qr(mixing);
  if (qr.rank() < mixing.rows()) throw NumericError("subject mixing matrix is rank deficient");
}

corpus::Utterance synthesize_utterance(const std::vector<std::string>& phonemes,
                                       const SubjectProfile& profile, const GestureSet& gestures,
                                       std::uint64_t seed) {
  if (phonemes.empty()) throw DataError("synthesize_utterance: empty phoneme list");
  num::Rng rng(seed);

  // durations on the 10 ms grid, at least 2 frames each
  std::vector<Eigen::Index> frames_per(phonemes.size());
  Eigen::Index total = 0;
  corpus::PhonemeAlignment alignment;
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    const auto& spec = gestures.at(phonemes[i]);
    const double jitter = 1.0 + spec.duration_jitter * rng.uniform(-1.0, 1.0);
    const double dur = spec.mean_duration_s * profile.duration_scale * jitter;
    frames_per[i] = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::llround(dur * kSynthFrameRateHz)));
    alignment.intervals.push_back({phonemes[i],
                                   static_cast<double>(total) / kSynthFrameRateHz,
                                   static_cast<double>(total + frames_per[i]) / kSynthFrameRateHz});
    total += frames_per[i];
  }

  // from-rest critically damped step response per segment, sampled at frame
  // left edges; the trajectory starts exactly at the first target
  MatX traj(total, corpus::kNumChannels);
  VecX x = gestures.at(phonemes[0]).target;
  Eigen::Index t0 = 0;
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    const auto& spec = gestures.at(phonemes[i]);
    const double omega = 1.0 / spec.time_constant_s;
    const VecX start = x;
    for (Eigen::Index k = 0; k < frames_per[i]; ++k) {
      const double tau = static_cast<double>(k) / kSynthFrameRateHz;
      const double decay = (1.0 + omega * tau) * std::exp(-omega * tau);
      traj.row(t0 + k) = (spec.target + (start - spec.target) * decay).transpose();
    }
    // state at the segment end becomes the next start
    const double tau_end = static_cast<double>(frames_per[i]) / kSynthFrameRateHz;
    const double decay_end = (1.0 + omega * tau_end) * std::exp(-omega * tau_end);
    x = spec.target + (start - spec.target) * decay_end;
    t0 += frames_per[i];
  }

  corpus::Utterance utt;
  utt.subject = profile.id;
  utt.alignment = std::move(alignment);
  utt.trajectory.frame_rate_hz = kSynthFrameRateHz;
  utt.trajectory.frames =
      (traj.array().rowwise() * profile.scale.transpose().array()).rowwise() +
      profile.offset.transpose().array();
  utt.validate();
  return utt;
}

MatX acoustic_proxy(const corpus::Utterance& utterance, const SubjectProfile& profile,
                    std::uint64_t seed) {
  if (utterance.trajectory.frame_rate_hz != kSynthFrameRateHz)
    throw DataError("acoustic_proxy: trajectory must be at 100 Hz");
  num::Rng rng(num::mix_seed(seed, 0x70726f7879ULL));
  const Eigen::Index T = utterance.trajectory.frames.rows();
  MatX proxy(T, 13);
  VecX in(corpus::kNumChannels + profile.embedding.size());
  for (Eigen::Index t = 0; t < T; ++t) {
    in.head(corpus::kNumChannels) = utterance.trajectory.frames.row(t).transpose();
    in.tail(profile.embedding.size()) = profile.embedding;
    proxy.row(t) = (profile.mixing * in).transpose();
    if (profile.noise_level > 0.0)
      for (Eigen::Index c = 0; c < 13; ++c) proxy(t, c) += profile.noise_level * rng.normal();
  }
  return proxy;
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  if (config.n_subjects < 2)
    throw ConfigError("generate_corpus: need at least 2 subjects for the training regimes");
  if (config.utterances_per_subject < 1 || config.min_phones < 1 ||
      config.max_phones < config.min_phones)
    throw ConfigError("generate_corpus: invalid sentence parameters");
  // longest possible sentence must stay under 4 s / 400 frames
  const double max_dur = 0.120 * 1.1 * (1.0 + config.duration_jitter) + 0.01;
  if (config.max_phones * max_dur > 4.0)
    throw ConfigError("generate_corpus: max_phones " + std::to_string(config.max_phones) +
                      " could exceed the 400-frame bound");

  SynthCorpus out;
  out.gestures = GestureSet::standard(config.master_seed, config.duration_jitter);
  const auto& phones = feat::PhonemeInventory::instance().phonemes();

  for (int s = 0; s < config.n_subjects; ++s) {
    num::Rng subj_rng(num::mix_seed(config.master_seed, 0x1000 + static_cast<std::uint64_t>(s)));
    char sid[16];
    std::snprintf(sid, sizeof sid, "S%02d", s);
    out.profiles.push_back(SubjectProfile::sample(sid, subj_rng, config.noise_level));
    const auto& profile = out.profiles.back();

    for (int u = 0; u < config.utterances_per_subject; ++u) {
      const std::uint64_t utt_seed =
          num::mix_seed(config.master_seed,
                        0x100000 + static_cast<std::uint64_t>(s) * 100000 +
                            static_cast<std::uint64_t>(u));
      num::Rng rng(utt_seed);
      const int n_phones =
          config.min_phones + static_cast<int>(rng.uniform_int(
                                  static_cast<std::uint64_t>(config.max_phones - config.min_phones + 1)));
      std::vector<std::string> sentence(static_cast<std::size_t>(n_phones));
      for (auto& p : sentence) p = phones[rng.uniform_int(phones.size())];

      auto utt = synthesize_utterance(sentence, profile, out.gestures, rng.next_u64());
      char uid[32];
      std::snprintf(uid, sizeof uid, "%s_u%03d", sid, u);
      utt.id = uid;
      utt.proxy = acoustic_proxy(utt, profile, rng.next_u64());
      if (utt.trajectory.frames.rows() > 400)
        throw NumericError("generate_corpus: utterance exceeded 400 frames");
      out.corpus.utterances.push_back(std::move(utt));
    }
  }
  return out;
}

}  // namespace artic::synth
