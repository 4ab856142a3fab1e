// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "oscagent/agents/loop.hpp"
#include "oscagent/predictor/regressor.hpp"

namespace osc::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a domain error and 2 on a usage error; errors print one
/// JSON line to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Everything `run` needs, read from a flat key=value file.
struct RunSettings {
  agents::LoopConfig loop;
  std::string reference;  // inputs resolve against the config file's directory
  std::string backend = "scripted";
  std::string script;
  agents::HttpConfig http;
  std::string models = "train";  // "train" or a directory holding pce/homo/lumo.json
  predictor::TrainConfig train;
  std::string sascore_table;
  std::string prompts;
  std::string candidate_db = "candidates.jsonl";  // outputs resolve against the output directory
  std::string run_log = "run_log.jsonl";
  std::string summary = "summary.json";
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values raise AgentError with kind ConfigError.
RunSettings load_run_config(const std::string& path, const std::string& out_dir);

std::map<std::string, std::string> read_key_values(const std::string& path);

}  // namespace osc::cli
