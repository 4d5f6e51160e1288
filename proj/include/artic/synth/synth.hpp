#pragma once

#include <map>
#include <string>
#include <vector>

#include "artic/corpus/types.hpp"
#include "artic/num/rng.hpp"

namespace artic::synth {

using corpus::MatX;
using corpus::VecX;

// Per-phoneme articulatory target and gesture dynamics.
struct GestureSpec {
  VecX target;             // 12 channels
  double time_constant_s;  // critically damped response speed
  double mean_duration_s;
  double duration_jitter;  // relative, uniform in +-jitter
};

struct GestureSet {
  std::map<std::string, GestureSpec> specs;

  // One shared deterministic set over the 39-phoneme inventory.
  static GestureSet standard(std::uint64_t seed, double duration_jitter = 0.05);
  const GestureSpec& at(const std::string& phoneme) const;
};

// Vocal-tract morphology proxy: per-channel affine map, speaking-rate
// scale, acoustic mixing matrix and noise floor.
struct SubjectProfile {
  std::string id;
  VecX offset;          // 12
  VecX scale;           // 12, positive
  double duration_scale = 1.0;
  MatX mixing;          // 13 x (12 + embedding)
  VecX embedding;       // subject identity carried into the acoustic proxy
  double noise_level = 0.05;

  static SubjectProfile sample(const std::string& id, num::Rng& rng, double noise_level);
  void validate() const;
};

// Critically damped second-order tracking of the piecewise-constant target
// sequence at 100 Hz, gestures starting from rest at each boundary.
// Durations are drawn per phoneme (seeded), scaled by the subject, and
// quantised to the frame grid so the stored alignment is exact.
corpus::Utterance synthesize_utterance(const std::vector<std::string>& phonemes,
                                       const SubjectProfile& profile, const GestureSet& gestures,
                                       std::uint64_t seed);

// Frame-wise 13-dim acoustic stand-in: mixing * [trajectory frame; subject
// embedding] plus seeded Gaussian noise.
MatX acoustic_proxy(const corpus::Utterance& utterance, const SubjectProfile& profile,
                    std::uint64_t seed);

struct SynthConfig {
  int n_subjects = 10;
  int utterances_per_subject = 50;
  int min_phones = 6;
  int max_phones = 16;
  double noise_level = 0.05;
  double duration_jitter = 0.05;
  std::uint64_t master_seed = 1234;
};

struct SynthCorpus {
  corpus::Corpus corpus;
  std::vector<SubjectProfile> profiles;
  GestureSet gestures;
};

// Multi-subject corpus with the acoustic proxy attached to every utterance.
// Deterministic in the master seed; every utterance is at most 4 s.
SynthCorpus generate_corpus(const SynthConfig& config);

inline constexpr double kSynthFrameRateHz = 100.0;

}  // namespace artic::synth
