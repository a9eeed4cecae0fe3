// Copyright 2026 The saddlelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run, check, rate, sweep.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "saddlelab/config.hpp"
#include "saddlelab/report_io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw saddlelab::Error(saddlelab::ErrorCode::Io, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> trials;
  std::optional<std::string> seed;
  std::optional<std::string> parallelism;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Path to a key = value config file")->required();
  cmd->add_option("--out", flags.out, "Output directory (output.dir)");
  cmd->add_option("--trials", flags.trials, "Number of Monte Carlo trials (trials)");
  cmd->add_option("--seed", flags.seed, "Master seed, unsigned 64-bit (seed)");
  cmd->add_option("--parallelism", flags.parallelism, "Worker threads (parallelism)");
}

saddlelab::RunConfigDocument load(const CommonFlags& flags) {
  auto entries = saddlelab::parse_entries(read_file(flags.config));
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) entries[key] = saddlelab::parse_value(key, *v);
  };
  if (flags.out) entries["output.dir"] = *flags.out;
  set("trials", flags.trials);
  set("seed", flags.seed);
  set("parallelism", flags.parallelism);
  return saddlelab::finalize(std::move(entries));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"saddlelab: stochastic momentum methods and saddle avoidance experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, check_flags, rate_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "Monte Carlo escape experiment");
  add_common(run, run_flags);
  auto* check = app.add_subcommand("check", "Probe the standing assumptions on a box");
  add_common(check, check_flags);
  auto* rate = app.add_subcommand("rate", "Fit the momentum decay rate");
  add_common(rate, rate_flags);
  auto* sweep = app.add_subcommand("sweep", "Repeat run over values of one key");
  add_common(sweep, sweep_flags);
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  sweep->add_option("--key", sweep_key, "Config key to vary")->required();
  sweep->add_option("--values", sweep_values, "Values, comma separated")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return saddlelab::command_run(load(run_flags), std::cout);
    if (check->parsed()) return saddlelab::command_check(load(check_flags), std::cout);
    if (rate->parsed()) return saddlelab::command_rate(load(rate_flags), std::cout);
    if (sweep->parsed()) {
      return saddlelab::command_sweep(load(sweep_flags), sweep_key, sweep_values, std::cout);
    }
  } catch (const saddlelab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
