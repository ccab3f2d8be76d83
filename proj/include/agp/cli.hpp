#pragma once
// Command implementations behind the agp binary. Each returns a process exit
// code: 0 success, 1 configuration error, 2 data error, 3 gateway error.

#include <string>

#include "agp/config.hpp"

namespace agp {

int cmd_train(const AppConfig& config, bool resume);

// mode: agp | dir | cot | base. prompt_version -1 selects the checkpointed
// best version from the run directory.
int cmd_eval(const AppConfig& config, const std::string& mode, int prompt_version);

int cmd_budget(int batch_size, int n_train, int epochs);

int cmd_synth(const AppConfig& config, const std::string& out_dir);

}  // namespace agp
