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

#ifndef DEXGRASP_CLI_H_
#define DEXGRASP_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dexgrasp/energy.h"
#include "dexgrasp/gradient_check.h"
#include "dexgrasp/optimizer.h"
#include "dexgrasp/quality.h"

namespace dexgrasp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kPartialFailure = 2,
  kVerificationFailure = 3,
};

struct RunConfig {
  std::filesystem::path hand_description;
  std::filesystem::path hand_annotations;
  std::filesystem::path objects;  // preprocessed directory, mesh directory or mesh file
  std::vector<double> scales = {0.06, 0.08, 0.10, 0.12, 0.15};
  OptimConfig optim;
  Weights weights;
  Q1Config q1;
  ValidationConfig validation;
  int batch_size = 64;
  uint64_t seed = 0;
  int workers = 1;
  int penetration_samples = kDefaultPenetrationSamples;
  std::filesystem::path output = "dataset.jsonl";

  // Relative paths in the file are resolved against the file's directory.
  static RunConfig Load(const std::filesystem::path& path);
  static RunConfig FromJsonText(const std::string& text,
                                const std::filesystem::path& base_dir);
  std::string ToJsonText() const;
  // Throws Error when a referenced path is missing or a value is out of range.
  void Validate() const;
};

// A normalized object mesh before scaling.
struct SourceObject {
  std::string id;
  TriMesh mesh;
};
std::vector<SourceObject> LoadObjects(const std::filesystem::path& objects);

// Seed for the fixed penetration samples of one (object, scale).
uint64_t ObjectSampleSeed(uint64_t master_seed, const std::string& object_id,
                          double scale);

int CmdPreprocess(const std::filesystem::path& in_dir,
                  const std::filesystem::path& out_dir,
                  const std::vector<double>& scales, std::ostream& out,
                  std::ostream& err);
int CmdSynth(const RunConfig& config, bool dry_run, std::ostream& out,
             std::ostream& err);
int CmdEval(const RunConfig& config, const std::filesystem::path& dataset,
            bool strict, std::ostream& out, std::ostream& err);
int CmdStats(const RunConfig& config, const std::filesystem::path& dataset,
             const std::optional<std::filesystem::path>& json_out, bool strict,
             std::ostream& out, std::ostream& err);
int CmdExport(const RunConfig& config, const std::filesystem::path& dataset,
              int index, const std::filesystem::path& out_path, std::ostream& out,
              std::ostream& err);
int CmdCheckGradients(const RunConfig& config, uint64_t seed, int states,
                      std::ostream& out, std::ostream& err,
                      const GradientCheckOptions* options = nullptr);

}  // namespace dexgrasp::cli

#endif  // DEXGRASP_CLI_H_
