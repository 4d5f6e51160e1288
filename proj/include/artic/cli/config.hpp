#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "artic/common.hpp"
#include "artic/model/attention_model.hpp"
#include "artic/model/blstm_model.hpp"
#include "artic/synth/synth.hpp"
#include "artic/train/trainer.hpp"

namespace artic::cli {

// Flat `key = value` run configuration with [sections]. Unknown sections or
// keys are rejected with file/line locations; values are typed on access.
class RunConfig {
 public:
  static RunConfig load(const std::string& path);
  static RunConfig from_string(const std::string& text, const std::string& origin = "<inline>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback = "") const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  // Hash over the data/model/synth sections; recorded in checkpoints so a
  // mismatched evaluation setup is detectable.
  std::string fingerprint() const;

  // command-line overrides
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("data", "seed", 1234)); }

  model::BlstmConfig blstm_config(int input_width) const;
  model::AttentionConfig attention_config() const;
  synth::SynthConfig synth_config() const;
  train::TrainConfig train_config() const;

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
};

}  // namespace artic::cli
