// Copyright 2026 The dexgrasp Authors
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

// Command-line entry point for grasp synthesis and dataset tooling.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dexgrasp/cli.h"
#include "dexgrasp/types.h"

namespace {

namespace fs = std::filesystem;
using dexgrasp::cli::RunConfig;

struct Overrides {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

void AddCommon(CLI::App* cmd, Overrides& o, bool required_config = true) {
  auto* opt = cmd->add_option("--config", o.config, "run config JSON file");
  if (required_config) opt->required()->check(CLI::ExistingFile);
}

// Applies CLI flag overrides on top of the config file.
RunConfig Resolve(const Overrides& o) {
  RunConfig config = RunConfig::Load(o.config);
  if (o.seed) config.seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  if (!o.out.empty()) config.output = o.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Force-closure grasp synthesis for multi-fingered hands"};
  app.require_subcommand(1);

  Overrides o;
  std::string input, dataset, json_out;
  std::vector<double> scales = RunConfig{}.scales;
  bool dry_run = false, strict = false;
  int index = 0, states = 20;

  auto* pre = app.add_subcommand("preprocess", "normalize meshes, scale copies, hulls");
  pre->add_option("input", input, "directory of .obj/.off/.stl meshes")->required();
  pre->add_option("--out", o.out, "output directory")->required();
  pre->add_option("--scales", scales, "object scales");

  auto* synth = app.add_subcommand("synth", "synthesize grasps for every object and scale");
  AddCommon(synth, o);
  synth->add_option("--seed", o.seed, "master seed");
  synth->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  synth->add_option("--out", o.out, "dataset output path");
  synth->add_flag("--dry-run", dry_run, "print the plan and exit");

  auto* eval = app.add_subcommand("eval", "recompute metrics and check stored values");
  AddCommon(eval, o);
  eval->add_option("dataset", dataset, "dataset .jsonl")->required();
  eval->add_flag("--strict", strict, "fail on malformed lines");

  auto* stats = app.add_subcommand("stats", "print dataset statistics");
  AddCommon(stats, o);
  stats->add_option("dataset", dataset, "dataset .jsonl")->required();
  stats->add_option("--out", json_out, "also write statistics as JSON");
  stats->add_flag("--strict", strict, "fail on malformed lines");

  auto* exp = app.add_subcommand("export", "export a posed hand and its object as OBJ");
  AddCommon(exp, o);
  exp->add_option("dataset", dataset, "dataset .jsonl")->required();
  exp->add_option("--index", index, "record index")->required();
  exp->add_option("--out", o.out, "output .obj path")->required();

  auto* grad = app.add_subcommand("check-gradients", "finite-difference gradient check");
  AddCommon(grad, o);
  grad->add_option("--seed", o.seed, "probe seed");
  grad->add_option("--states", states, "random states per object")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dexgrasp::cli::kUsageError;
  }

  try {
    if (pre->parsed()) {
      return dexgrasp::cli::CmdPreprocess(input, o.out, scales, std::cout, std::cerr);
    }
    const RunConfig config = Resolve(o);
    if (synth->parsed()) return dexgrasp::cli::CmdSynth(config, dry_run, std::cout, std::cerr);
    if (eval->parsed()) {
      return dexgrasp::cli::CmdEval(config, dataset, strict, std::cout, std::cerr);
    }
    if (stats->parsed()) {
      std::optional<fs::path> json_path;
      if (!json_out.empty()) json_path = json_out;
      return dexgrasp::cli::CmdStats(config, dataset, json_path, strict, std::cout, std::cerr);
    }
    if (exp->parsed()) {
      return dexgrasp::cli::CmdExport(config, dataset, index, o.out, std::cout, std::cerr);
    }
    if (grad->parsed()) {
      return dexgrasp::cli::CmdCheckGradients(config, o.seed.value_or(0), states, std::cout,
                                              std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dexgrasp::cli::kUsageError;
  }
  return dexgrasp::cli::kUsageError;
}
