// Copyright 2026 The Kinonav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The `kinonav` command line. Every subcommand is deterministic for its
// arguments and --seed, and writes plain JSON/CSV/text files.

#ifndef KINONAV_CLI_H_
#define KINONAV_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kinonav/policy.h"
#include "kinonav/simulator.h"

namespace kinonav::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInfeasible = 3,
};

// Settings a --config file may override, e.g. `sim.max_steps = 300` or
// `mpc.horizon = 1`.
struct RunConfig {
  std::uint64_t seed = 0;
  sim::SimConfig sim;
  policy::MpcConfig mpc;
};

// Applies `key = value` overrides; throws DataError on unknown keys or bad
// values, naming the key.
void ApplyOverrides(const std::map<std::string, std::string>& overrides, RunConfig& config);

struct EvaluateOptions {
  std::filesystem::path episodes;
  std::filesystem::path model;  // empty: default parameters
  std::string policy = "mpc";
  bool noisy_pose = false;
  int jobs = 1;
  std::filesystem::path output_dir;
};

// Runs every episode and writes results.jsonl, report.json, report.txt and
// traces/<id>.csv plus traces/<id>.commands.csv. Episodes that cannot be
// set up become failures carrying an error message.
metrics::Report Evaluate(const EvaluateOptions& options, const RunConfig& config,
                         std::ostream& log);

// Entry point; args[0] is the program name. Returns an ExitCode.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kinonav::cli

#endif  // KINONAV_CLI_H_
