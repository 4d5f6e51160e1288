#include <CLI11.hpp>
#include <iostream>

#include "artic/cli/commands.hpp"

namespace {

// 0 success, 1 usage/config, 2 data error, 3 numeric failure
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"articulatory movement estimation from phonemes and acoustics"};
  app.require_subcommand(1);

  std::string config_path, seed_override, out_override;
  bool force = false;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--seed", seed_override, "override [data] seed");
  app.add_option("--out", out_override, "override [paths] out_dir");
  app.add_flag("--force", force, "overwrite existing outputs");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  auto* prep = app.add_subcommand("prep", "preprocess and cache features");
  auto* training = app.add_subcommand("train", "train a model");
  auto* finetune = app.add_subcommand("finetune", "fine-tune from a base checkpoint");
  auto* evaluate = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  auto* infer = app.add_subcommand("infer", "write predicted trajectories");
  auto* plot = app.add_subcommand("plot", "emit trajectory/attention figures");
  for (auto* sub : {synth, prep, training, finetune, evaluate, infer, plot})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    auto cfg = artic::cli::RunConfig::load(config_path);
    if (!seed_override.empty()) cfg.set("data", "seed", seed_override);
    if (!out_override.empty()) cfg.set("paths", "out_dir", out_override);

    if (synth->parsed()) artic::cli::cmd_synth(cfg, force);
    if (prep->parsed()) artic::cli::cmd_prep(cfg, force);
    if (training->parsed()) artic::cli::cmd_train(cfg);
    if (finetune->parsed()) artic::cli::cmd_finetune(cfg);
    if (evaluate->parsed()) artic::cli::cmd_eval(cfg);
    if (infer->parsed()) artic::cli::cmd_infer(cfg);
    if (plot->parsed()) artic::cli::cmd_plot(cfg);
    return 0;
  } catch (const artic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const artic::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const artic::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const artic::DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
