#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "artic/common.hpp"
#include "artic/num/tensor.hpp"

namespace artic::corpus {

using num::MatX;
using num::VecX;

inline constexpr int kNumChannels = 12;

// Fixed midsagittal sensor order: x/y pairs for upper lip, lower lip, jaw,
// tongue tip, tongue body, tongue dorsum.
inline const std::array<std::string, kNumChannels>& channel_names() {
  static const std::array<std::string, kNumChannels> names = {
      "UL_x", "UL_y", "LL_x", "LL_y", "Jaw_x", "Jaw_y",
      "TT_x", "TT_y", "TB_x", "TB_y", "TD_x",  "TD_y"};
  return names;
}

struct ArticulatoryTrajectory {
  MatX frames;  // T x 12
  double frame_rate_hz = 0.0;

  Eigen::Index num_frames() const { return frames.rows(); }
  double duration_s() const {
    return frame_rate_hz > 0 ? static_cast<double>(frames.rows()) / frame_rate_hz : 0.0;
  }

  void validate() const {
    if (frames.cols() != kNumChannels)
      throw DimensionError("trajectory must have exactly 12 channels, got " +
                           std::to_string(frames.cols()));
    if (frame_rate_hz <= 0) throw ConfigError("trajectory frame rate must be positive");
    if (!frames.allFinite()) throw NumericError("trajectory contains non-finite samples");
  }
};

struct PhonemeInterval {
  std::string phoneme;
  double start_s = 0.0;
  double end_s = 0.0;

  double duration_s() const { return end_s - start_s; }
};

struct PhonemeAlignment {
  std::vector<PhonemeInterval> intervals;

  std::size_t size() const { return intervals.size(); }
  bool empty() const { return intervals.empty(); }
  double total_duration_s() const { return intervals.empty() ? 0.0 : intervals.back().end_s; }

  // Contiguity, positive durations, zero start.
  void validate() const {
    if (intervals.empty()) throw DataError("alignment has no intervals");
    if (intervals.front().start_s != 0.0)
      throw DataError("alignment must start at 0 s, got " +
                      std::to_string(intervals.front().start_s));
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      const auto& iv = intervals[i];
      if (!(iv.end_s > iv.start_s))
        throw DataError("alignment interval " + std::to_string(i) + " (" + iv.phoneme +
                        ") has non-positive duration");
      if (i + 1 < intervals.size() && intervals[i + 1].start_s != iv.end_s)
        throw DataError("alignment intervals " + std::to_string(i) + "/" +
                        std::to_string(i + 1) + " are not contiguous");
    }
  }

  // Phoneme covering time t (left-edge convention; boundary goes to the
  // later interval).
  std::size_t index_at(double t) const {
    for (std::size_t i = 0; i < intervals.size(); ++i)
      if (t >= intervals[i].start_s && t < intervals[i].end_s) return i;
    return intervals.size() - 1;  // clamp to last
  }
};

struct Utterance {
  std::string id;
  std::string subject;
  ArticulatoryTrajectory trajectory;
  PhonemeAlignment alignment;
  VecX waveform;  // optional, 16 kHz samples; empty when absent
  MatX proxy;     // optional synthetic acoustic channel, T x 13; empty when absent

  static constexpr double kWaveformRateHz = 16000.0;

  void validate() const {
    trajectory.validate();
    alignment.validate();
    const double frame_period = 1.0 / trajectory.frame_rate_hz;
    const double delta = std::abs(alignment.total_duration_s() - trajectory.duration_s());
    if (delta > frame_period + 1e-9)
      throw DataError("utterance " + id + ": alignment duration " +
                      std::to_string(alignment.total_duration_s()) +
                      " differs from trajectory duration " +
                      std::to_string(trajectory.duration_s()) + " by more than one frame");
  }
};

enum class Split { kTrain, kValidation, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

struct Corpus {
  std::vector<Utterance> utterances;
  std::map<std::string, Split> split;  // utterance id -> assignment

  std::vector<std::string> subjects() const {
    std::vector<std::string> out;
    for (const auto& u : utterances)
      if (std::find(out.begin(), out.end(), u.subject) == out.end()) out.push_back(u.subject);
    return out;
  }

  // split must be a total, disjoint partition (map keys are unique by
  // construction; totality checked here).
  void validate_split() const {
    for (const auto& u : utterances)
      if (!split.count(u.id)) throw DataError("utterance " + u.id + " missing from split");
    if (split.size() != utterances.size())
      throw DataError("split mentions unknown utterances");
  }
};

}  // namespace artic::corpus
