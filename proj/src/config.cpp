#include "artic/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "artic/feat/features.hpp"

namespace artic::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"paths", {"corpus_dir", "out_dir", "cache_dir", "checkpoint", "base_checkpoint"}},
      {"data", {"feature", "seed"}},
      {"model",
       {"kind", "blstm_hidden", "embedding_dim", "encoder_kernel", "attention_dim",
        "location_filters", "location_kernel", "location_cum", "prenet_dim", "decoder_dim",
        "postnet_channels", "postnet_kernel", "prenet_dropout", "frames_per_step"}},
      {"train",
       {"regime", "subject", "batch_size", "max_len", "lr", "epochs", "patience", "grad_clip",
        "stop_pos_weight", "stop_loss_weight"}},
      {"synth",
       {"subjects", "utterances_per_subject", "min_phones", "max_phones", "noise_level",
        "duration_jitter"}},
      {"eval", {"stop_threshold", "max_frames"}},
      {"infer", {"utterance"}},
      {"plot", {"utterance", "channels"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string loc = origin + ":" + std::to_string(line_no);
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(loc + ": malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      if (!schema().count(section)) throw ConfigError(loc + ": unknown section [" + section + "]");
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(loc + ": expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) throw ConfigError(loc + ": key '" + key + "' before any [section]");
    if (!schema().at(section).count(key))
      throw ConfigError(loc + ": unknown key '" + key + "' in section [" + section + "]");
    cfg.values_[section + "." + key] = value;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return from_string(buf.str(), path);
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  return values_.count(section + "." + key) != 0;
}

std::string RunConfig::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(section + "." + key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": '" + it->second + "' is not a number");
  }
}

std::int64_t RunConfig::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": '" + it->second + "' is not an integer");
  }
}

bool RunConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("[" + section + "] " + key + ": '" + it->second + "' is not a boolean");
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!schema().count(section) || !schema().at(section).count(key))
    throw ConfigError("override targets unknown key [" + section + "] " + key);
  values_[section + "." + key] = value;
}

std::string RunConfig::fingerprint() const {
  // FNV-1a over the sorted data/model/synth entries
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [key, value] : values_) {
    if (key.rfind("data.", 0) == 0 || key.rfind("model.", 0) == 0 || key.rfind("synth.", 0) == 0) {
      feed(key);
      feed("=");
      feed(value);
      feed("\n");
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

model::BlstmConfig RunConfig::blstm_config(int input_width) const {
  model::BlstmConfig c;
  c.input_width = input_width;
  c.hidden = static_cast<int>(get_int("model", "blstm_hidden", 256));
  return c;
}

model::AttentionConfig RunConfig::attention_config() const {
  model::AttentionConfig c;
  c.embedding_dim = static_cast<int>(get_int("model", "embedding_dim", 512));
  c.encoder_kernel = static_cast<int>(get_int("model", "encoder_kernel", 5));
  c.attention_dim = static_cast<int>(get_int("model", "attention_dim", 128));
  c.location_filters = static_cast<int>(get_int("model", "location_filters", 32));
  c.location_kernel = static_cast<int>(get_int("model", "location_kernel", 31));
  c.location_cum = get_bool("model", "location_cum", true);
  c.prenet_dim = static_cast<int>(get_int("model", "prenet_dim", 256));
  c.decoder_dim = static_cast<int>(get_int("model", "decoder_dim", 1024));
  c.postnet_channels = static_cast<int>(get_int("model", "postnet_channels", 512));
  c.postnet_kernel = static_cast<int>(get_int("model", "postnet_kernel", 5));
  c.prenet_dropout = get_double("model", "prenet_dropout", 0.5);
  c.frames_per_step = static_cast<int>(get_int("model", "frames_per_step", 1));
  c.validate();
  return c;
}

synth::SynthConfig RunConfig::synth_config() const {
  synth::SynthConfig c;
  c.n_subjects = static_cast<int>(get_int("synth", "subjects", 10));
  c.utterances_per_subject = static_cast<int>(get_int("synth", "utterances_per_subject", 50));
  c.min_phones = static_cast<int>(get_int("synth", "min_phones", 6));
  c.max_phones = static_cast<int>(get_int("synth", "max_phones", 16));
  c.noise_level = get_double("synth", "noise_level", 0.05);
  c.duration_jitter = get_double("synth", "duration_jitter", 0.05);
  c.master_seed = seed();
  return c;
}

train::TrainConfig RunConfig::train_config() const {
  train::TrainConfig c;
  c.regime = get_string("train", "regime", "generic");
  if (c.regime != "generic" && c.regime != "subject_dependent" && c.regime != "fine_tune")
    throw ConfigError("[train] regime must be one of subject_dependent|generic|fine_tune");
  c.subject = get_string("train", "subject", "");
  c.batch_size = static_cast<int>(get_int("train", "batch_size", 25));
  c.max_len = get_int("train", "max_len", 400);
  c.lr = get_double("train", "lr", 1e-3);
  c.epochs = static_cast<int>(get_int("train", "epochs", 60));
  c.patience = static_cast<int>(get_int("train", "patience", 10));
  c.grad_clip = get_double("train", "grad_clip", 1.0);
  c.stop_pos_weight = get_double("train", "stop_pos_weight", 5.0);
  c.stop_loss_weight = get_double("train", "stop_loss_weight", 1.0);
  c.seed = seed();
  c.fingerprint = fingerprint();
  return c;
}

}  // namespace artic::cli
