#include "artic/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "artic/cli/pipeline.hpp"
#include "artic/cli/plot.hpp"
#include "artic/corpus/io.hpp"
#include "artic/num/checkpoint.hpp"

namespace artic::cli {

namespace fs = std::filesystem;
using feat::FeatureKind;

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;
constexpr std::uint64_t kInitStream = 0x696e6974ULL;

std::string out_dir(const RunConfig& cfg) {
  const std::string dir = cfg.get_string("paths", "out_dir");
  if (dir.empty()) throw ConfigError("[paths] out_dir is required");
  fs::create_directories(dir);
  return dir;
}

// features are corpus-derived, so the cache lives beside the corpus unless
// overridden
std::string cache_dir(const RunConfig& cfg) {
  std::string dir = cfg.get_string("paths", "cache_dir");
  if (dir.empty())
    dir = (fs::path(cfg.get_string("paths", "corpus_dir", ".")) / "cache").string();
  return dir;
}

std::vector<pipeline::PreparedUtterance> load_cache(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("no feature cache at " + dir + " (run prep first)");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".feat") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("feature cache " + dir + " is empty");
  std::vector<pipeline::PreparedUtterance> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(pipeline::load_prepared(f));
  return out;
}

std::map<std::string, corpus::Split> compute_split(
    const std::vector<pipeline::PreparedUtterance>& prepared, std::uint64_t seed) {
  corpus::Corpus skeleton;
  for (const auto& u : prepared) {
    corpus::Utterance utt;
    utt.id = u.id;
    utt.subject = u.subject;
    skeleton.utterances.push_back(std::move(utt));
  }
  return corpus::split_dataset(skeleton, corpus::kDefaultSplitRatios,
                               num::mix_seed(seed, kSplitStream));
}

nlohmann::json attention_config_json(const model::AttentionConfig& c) {
  return {{"kind", "attention"},
          {"embedding_dim", c.embedding_dim},
          {"encoder_kernel", c.encoder_kernel},
          {"attention_dim", c.attention_dim},
          {"location_filters", c.location_filters},
          {"location_kernel", c.location_kernel},
          {"location_cum", c.location_cum},
          {"prenet_dim", c.prenet_dim},
          {"decoder_dim", c.decoder_dim},
          {"postnet_channels", c.postnet_channels},
          {"postnet_kernel", c.postnet_kernel},
          {"prenet_dropout", c.prenet_dropout},
          {"frames_per_step", c.frames_per_step}};
}

model::AttentionConfig attention_config_from_json(const nlohmann::json& j) {
  model::AttentionConfig c;
  c.embedding_dim = j.at("embedding_dim");
  c.encoder_kernel = j.at("encoder_kernel");
  c.attention_dim = j.at("attention_dim");
  c.location_filters = j.at("location_filters");
  c.location_kernel = j.at("location_kernel");
  c.location_cum = j.at("location_cum");
  c.prenet_dim = j.at("prenet_dim");
  c.decoder_dim = j.at("decoder_dim");
  c.postnet_channels = j.at("postnet_channels");
  c.postnet_kernel = j.at("postnet_kernel");
  c.prenet_dropout = j.at("prenet_dropout");
  c.frames_per_step = j.at("frames_per_step");
  c.validate();
  return c;
}

void write_log(const std::string& path, const std::vector<train::TrainLogRecord>& log) {
  std::ofstream os(path);
  for (const auto& r : log)
    os << "epoch=" << r.epoch << " train_rmse=" << r.train_rmse << " valid_rmse=" << r.valid_rmse
       << " wall_s=" << r.wall_s << "\n";
}

void save_outcome(const std::string& dir, const train::TrainOutcome& outcome,
                  nlohmann::json extra) {
  num::Container best = outcome.best;
  for (auto& [k, v] : extra.items()) best.meta[k] = v;
  num::save_container((fs::path(dir) / "best.ckpt").string(), best);
  write_log((fs::path(dir) / "training.log").string(), outcome.log);
  std::cout << "best epoch " << outcome.best_epoch << ", validation RMSE " << outcome.best_valid
            << " (initial " << outcome.initial_valid << ")\n";
}

struct LoadedCheckpoint {
  num::Container container;
  std::string model_kind;
  std::string feature_kind;
  std::string regime;
  std::string subject;
};

LoadedCheckpoint load_checkpoint(const RunConfig& cfg, const std::string& key = "checkpoint") {
  const std::string path = cfg.get_string("paths", key);
  if (path.empty()) throw ConfigError("[paths] " + key + " is required for this command");
  LoadedCheckpoint lc;
  lc.container = num::load_container(path);
  lc.model_kind = lc.container.meta.at("model").at("kind").get<std::string>();
  lc.feature_kind = lc.container.meta.value("feature_kind", "");
  lc.regime = lc.container.meta.value("regime", "");
  lc.subject = lc.container.meta.value("subject", "");
  const std::string fp = lc.container.meta.value("config_fingerprint", "");
  if (!fp.empty() && fp != cfg.fingerprint())
    std::cerr << "warning: checkpoint was trained under a different data/model configuration\n";
  return lc;
}

// rebuild the parameter store of either model from a checkpoint
void restore_blstm(model::BlstmModel& model, const num::Container& c) {
  num::Rng rng(0);
  model.init_params(rng);
  num::container_to_store(c, model.params());
}
void restore_attention(model::AttentionModel& model, const num::Container& c) {
  num::Rng rng(0);
  model.init_params(rng);
  num::container_to_store(c, model.params());
}

}  // namespace

void cmd_synth(const RunConfig& cfg, bool force) {
  const auto sc = cfg.synth_config();
  auto synth = synth::generate_corpus(sc);
  nlohmann::json meta;
  meta["seed"] = sc.master_seed;
  meta["subjects"] = synth.corpus.subjects();
  meta["noise_level"] = sc.noise_level;
  const std::string dir = cfg.get_string("paths", "corpus_dir");
  if (dir.empty()) throw ConfigError("[paths] corpus_dir is required");
  pipeline::save_corpus_dir(synth.corpus, dir, meta, force);
  std::cout << "wrote " << synth.corpus.utterances.size() << " utterances for "
            << sc.n_subjects << " subjects to " << dir << "\n";
}

void cmd_prep(const RunConfig& cfg, bool force) {
  const std::string corpus_path = cfg.get_string("paths", "corpus_dir");
  if (corpus_path.empty()) throw ConfigError("[paths] corpus_dir is required");
  auto corpus = pipeline::load_corpus_dir(corpus_path);
  const std::string dir = cache_dir(cfg);
  fs::create_directories(dir);

  std::size_t done = 0, skipped = 0;
  std::vector<std::string> problems;
  for (const auto& utt : corpus.utterances) {
    const std::string path = (fs::path(dir) / (utt.id + ".feat")).string();
    if (!force && fs::exists(path)) {
      ++skipped;
      continue;
    }
    try {
      pipeline::save_prepared(pipeline::prepare_utterance(utt), path);
      ++done;
    } catch (const std::exception& e) {
      problems.push_back(utt.id + ": " + e.what());
    }
  }
  if (skipped > 0) std::cout << "cache hit for " << skipped << " utterances (skipped)\n";
  std::cout << "prepared " << done << " utterances into " << dir << "\n";
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " utterances failed:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
}

void cmd_train(const RunConfig& cfg) {
  auto prepared = load_cache(cache_dir(cfg));
  auto split = compute_split(prepared, cfg.seed());
  const auto kind = feat::feature_kind_from_name(cfg.get_string("data", "feature", "tphn"));
  const std::string model_kind = cfg.get_string("model", "kind", "blstm");
  if (!pipeline::pairing_valid(kind, model_kind))
    throw ConfigError("feature '" + std::string(feat::feature_kind_name(kind)) +
                      "' cannot drive model '" + model_kind +
                      "' (phn -> attention; tphn/mfcc/mfcc_tphn -> blstm)");

  auto tc = cfg.train_config();
  if (tc.regime == "fine_tune")
    throw ConfigError("use the finetune command for the fine_tune regime");
  if (tc.regime == "subject_dependent" && tc.subject.empty())
    throw ConfigError("[train] subject is required for the subject_dependent regime");
  const std::string filter = tc.regime == "subject_dependent" ? tc.subject : "";

  auto train_items = pipeline::select_items(prepared, split, kind, corpus::Split::kTrain, filter);
  auto valid_items =
      pipeline::select_items(prepared, split, kind, corpus::Split::kValidation, filter);
  const std::string dir = out_dir(cfg);
  num::Rng init(num::mix_seed(cfg.seed(), kInitStream));

  nlohmann::json extra = {{"feature_kind", feat::feature_kind_name(kind)},
                          {"regime", tc.regime},
                          {"subject", filter},
                          {"seed", cfg.seed()}};
  if (model_kind == "blstm") {
    model::BlstmModel model(cfg.blstm_config(static_cast<int>(train_items[0].features.cols())));
    model.init_params(init);
    auto outcome = train::train_blstm(model, train_items, valid_items, tc);
    extra["model"] = {{"kind", "blstm"},
                      {"input_width", model.config().input_width},
                      {"hidden", model.config().hidden}};
    save_outcome(dir, outcome, extra);
  } else {
    model::AttentionModel model(cfg.attention_config());
    model.init_params(init);
    auto outcome = train::train_attention(model, train_items, valid_items, tc);
    extra["model"] = attention_config_json(model.config());
    save_outcome(dir, outcome, extra);
  }
}

void cmd_finetune(const RunConfig& cfg) {
  auto base = load_checkpoint(cfg, "base_checkpoint");
  auto prepared = load_cache(cache_dir(cfg));
  auto split = compute_split(prepared, cfg.seed());
  const auto kind = feat::feature_kind_from_name(
      cfg.get_string("data", "feature", base.feature_kind.empty() ? "tphn" : base.feature_kind));

  auto tc = cfg.train_config();
  if (tc.subject.empty()) throw ConfigError("[train] subject is required for finetune");
  tc.regime = "fine_tune";

  auto train_items =
      pipeline::select_items(prepared, split, kind, corpus::Split::kTrain, tc.subject);
  auto valid_items =
      pipeline::select_items(prepared, split, kind, corpus::Split::kValidation, tc.subject);
  if (train_items.empty()) throw DataError("no training utterances for subject " + tc.subject);

  const std::string dir = out_dir(cfg);
  nlohmann::json extra = {{"feature_kind", feat::feature_kind_name(kind)},
                          {"regime", "fine_tune"},
                          {"subject", tc.subject},
                          {"seed", cfg.seed()},
                          {"base_valid_rmse", base.container.meta.value("valid_rmse", 0.0)}};

  if (base.model_kind == "blstm") {
    model::BlstmConfig mc;
    mc.input_width = base.container.meta.at("model").at("input_width");
    mc.hidden = base.container.meta.at("model").at("hidden");
    model::BlstmModel model(mc);
    restore_blstm(model, base.container);
    auto outcome = train::train_blstm(model, train_items, valid_items, tc);
    extra["model"] = base.container.meta.at("model");
    extra["valid_delta_vs_base"] = outcome.best_valid - outcome.initial_valid;
    save_outcome(dir, outcome, extra);
  } else {
    model::AttentionModel model(attention_config_from_json(base.container.meta.at("model")));
    restore_attention(model, base.container);
    auto outcome = train::train_attention(model, train_items, valid_items, tc);
    extra["model"] = base.container.meta.at("model");
    extra["valid_delta_vs_base"] = outcome.best_valid - outcome.initial_valid;
    save_outcome(dir, outcome, extra);
  }
}

void cmd_eval(const RunConfig& cfg) {
  auto ckpt = load_checkpoint(cfg);
  auto prepared = load_cache(cache_dir(cfg));
  auto split = compute_split(prepared, cfg.seed());
  const auto kind = feat::feature_kind_from_name(
      ckpt.feature_kind.empty() ? cfg.get_string("data", "feature", "tphn") : ckpt.feature_kind);

  pipeline::EvalOptions opts;
  opts.stop_threshold = cfg.get_double("eval", "stop_threshold", 0.5);
  opts.max_frames = static_cast<int>(cfg.get_int("eval", "max_frames", 450));
  opts.regime = ckpt.regime;
  opts.subject_filter = ckpt.subject;

  auto test_items =
      pipeline::select_items(prepared, split, kind, corpus::Split::kTest, ckpt.subject);
  if (test_items.empty()) throw DataError("empty test split for this configuration");

  eval::EvalReport report;
  if (ckpt.model_kind == "blstm") {
    model::BlstmConfig mc;
    mc.input_width = ckpt.container.meta.at("model").at("input_width");
    mc.hidden = ckpt.container.meta.at("model").at("hidden");
    model::BlstmModel model(mc);
    restore_blstm(model, ckpt.container);
    report = pipeline::evaluate_blstm(model, test_items, kind, opts);
  } else {
    model::AttentionModel model(attention_config_from_json(ckpt.container.meta.at("model")));
    restore_attention(model, ckpt.container);
    report = pipeline::evaluate_attention(model, test_items, opts);
  }

  const std::string dir = out_dir(cfg);
  std::ofstream js(fs::path(dir) / "report.json");
  js << report.to_json().dump(2) << "\n";
  std::ofstream cs(fs::path(dir) / "report.csv");
  cs << report.to_csv();
  std::cout << "mean CC " << report.mean_cc << " (std " << report.std_cc << "), mean RMSE "
            << report.mean_rmse << " (std " << report.std_rmse << ") over "
            << report.sentences.size() << " sentences\n";
}

void cmd_infer(const RunConfig& cfg) {
  auto ckpt = load_checkpoint(cfg);
  auto prepared = load_cache(cache_dir(cfg));
  auto split = compute_split(prepared, cfg.seed());
  const auto kind = feat::feature_kind_from_name(
      ckpt.feature_kind.empty() ? cfg.get_string("data", "feature", "tphn") : ckpt.feature_kind);
  const std::string wanted = cfg.get_string("infer", "utterance");
  const std::string dir = out_dir(cfg);

  std::unique_ptr<model::BlstmModel> blstm;
  std::unique_ptr<model::AttentionModel> attention;
  if (ckpt.model_kind == "blstm") {
    model::BlstmConfig mc;
    mc.input_width = ckpt.container.meta.at("model").at("input_width");
    mc.hidden = ckpt.container.meta.at("model").at("hidden");
    blstm = std::make_unique<model::BlstmModel>(mc);
    restore_blstm(*blstm, ckpt.container);
  } else {
    attention = std::make_unique<model::AttentionModel>(
        attention_config_from_json(ckpt.container.meta.at("model")));
    restore_attention(*attention, ckpt.container);
  }

  std::size_t written = 0;
  bool found = false;
  for (const auto& u : prepared) {
    if (!wanted.empty() && u.id != wanted) continue;
    if (wanted.empty() && split.at(u.id) != corpus::Split::kTest) continue;
    if (wanted.empty() && !ckpt.subject.empty() && u.subject != ckpt.subject) continue;
    found = true;
    auto item = pipeline::to_item(u, kind);
    MatX pred = blstm ? blstm->predict(item.features)
                      : attention
                            ->infer(item.features, cfg.get_double("eval", "stop_threshold", 0.5),
                                    static_cast<int>(cfg.get_int("eval", "max_frames", 450)))
                            .y;
    corpus::ArticulatoryTrajectory traj;
    traj.frame_rate_hz = 100.0;
    traj.frames = pred;
    traj = corpus::denormalize(traj, u.stats);
    corpus::save_trajectory(traj, (fs::path(dir) / (u.id + ".pred.csv")).string());
    ++written;
  }
  if (!found)
    throw DataError(wanted.empty() ? "no test utterances to infer"
                                   : "utterance '" + wanted + "' not found in the cache");
  std::cout << "wrote " << written << " predicted trajectories to " << dir << "\n";
}

void cmd_plot(const RunConfig& cfg) {
  auto ckpt = load_checkpoint(cfg);
  auto prepared = load_cache(cache_dir(cfg));
  const std::string wanted = cfg.get_string("plot", "utterance");
  if (wanted.empty()) throw ConfigError("[plot] utterance is required");
  const pipeline::PreparedUtterance* chosen = nullptr;
  for (const auto& u : prepared)
    if (u.id == wanted) chosen = &u;
  if (!chosen) throw DataError("utterance '" + wanted + "' not found in the cache");

  std::vector<int> channels;
  {
    std::stringstream ss(cfg.get_string("plot", "channels", "LL_y,TT_y"));
    std::string name;
    while (std::getline(ss, name, ',')) {
      auto& names = corpus::channel_names();
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError("[plot] channels: unknown channel '" + name + "'");
      channels.push_back(static_cast<int>(it - names.begin()));
    }
  }

  const auto kind = feat::feature_kind_from_name(
      ckpt.feature_kind.empty() ? cfg.get_string("data", "feature", "tphn") : ckpt.feature_kind);
  auto item = pipeline::to_item(*chosen, kind);
  const std::string dir = out_dir(cfg);

  MatX pred;
  if (ckpt.model_kind == "blstm") {
    model::BlstmConfig mc;
    mc.input_width = ckpt.container.meta.at("model").at("input_width");
    mc.hidden = ckpt.container.meta.at("model").at("hidden");
    model::BlstmModel model(mc);
    restore_blstm(model, ckpt.container);
    pred = model.predict(item.features);
  } else {
    model::AttentionModel model(attention_config_from_json(ckpt.container.meta.at("model")));
    restore_attention(model, ckpt.container);
    auto inf =
        model.infer(item.features, cfg.get_double("eval", "stop_threshold", 0.5),
                    static_cast<int>(cfg.get_int("eval", "max_frames", 450)));
    pred = inf.y;
    std::vector<std::string> labels = {feat::PhonemeInventory::kStartToken};
    for (const auto& iv : chosen->alignment.intervals) labels.push_back(iv.phoneme);
    std::ofstream os(fs::path(dir) / (wanted + ".attention.svg"));
    os << attention_svg(inf.alphas, labels);
  }
  std::ofstream os(fs::path(dir) / (wanted + ".trajectories.svg"));
  os << trajectory_svg(chosen->target, pred, chosen->alignment, channels, 100.0);
  std::cout << "wrote plots for " << wanted << " to " << dir << "\n";
}

}  // namespace artic::cli
