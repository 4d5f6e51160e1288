#pragma once

#include "artic/cli/config.hpp"

namespace artic::cli {

// Command-line verbs. They throw; the CLI maps exception categories onto
// exit codes (1 usage/config, 2 data, 3 numeric).
void cmd_synth(const RunConfig& cfg, bool force);
void cmd_prep(const RunConfig& cfg, bool force);
void cmd_train(const RunConfig& cfg);
void cmd_finetune(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_infer(const RunConfig& cfg);
void cmd_plot(const RunConfig& cfg);

}  // namespace artic::cli
