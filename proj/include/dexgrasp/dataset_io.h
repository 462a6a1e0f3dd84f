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

#ifndef DEXGRASP_DATASET_IO_H_
#define DEXGRASP_DATASET_IO_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dexgrasp/energy.h"
#include "dexgrasp/hand_model.h"
#include "dexgrasp/quality.h"

namespace dexgrasp {

inline constexpr int kRecordSchemaMajor = 1;

struct EnergyValues {
  double fc = 0.0, dis = 0.0, pen = 0.0, spen = 0.0, joints = 0.0, total = 0.0;
  bool operator==(const EnergyValues&) const = default;
};

struct RecordMeta {
  Weights weights;
  Q1Config q1_config;
  int iterations = 0;
  uint64_t master_seed = 0;
  int penetration_samples = kDefaultPenetrationSamples;
  bool operator==(const RecordMeta&) const = default;
};

// One synthesized grasp. Contact indices used during optimization are not
// part of the record.
struct GraspRecord {
  std::string object_id;
  double scale = 1.0;
  std::array<double, 3> translation{};
  std::array<double, 4> rotation_quat_wxyz{1.0, 0.0, 0.0, 0.0};
  std::vector<double> joint_angles;
  EnergyValues energy;
  double q1 = 0.0;
  double penetration_cm = 0.0;
  ValidityFlags flags;
  uint64_t seed = 0;
  RecordMeta meta;

  bool operator==(const GraspRecord&) const = default;

  GraspPose Pose() const;
  void SetPose(const GraspPose& pose);
  void SetEnergy(const EnergyBreakdown& e);
};

// One JSON object per line. Throws on non-finite values.
int WriteRecords(std::span<const GraspRecord> records, const std::string& path);

struct ReadResult {
  std::vector<GraspRecord> records;
  std::vector<std::string> errors;  // "line N: reason" for skipped lines
};
// Strict mode throws Error naming the first bad line; lenient mode skips it.
ReadResult ReadRecords(const std::string& path, bool strict = true);

std::string RecordToJsonLine(const GraspRecord& record);
GraspRecord RecordFromJsonLine(const std::string& line);

// Orders by (object_id, scale, seed) so files do not depend on worker scheduling.
void SortRecords(std::vector<GraspRecord>& records);

// One OBJ group per link with world-frame vertices.
void ExportPosedHand(const HandModel& hand, const GraspPose& pose,
                     const std::string& path);

struct ObjectStats {
  int count = 0;
  int valid = 0;
};

struct DatasetStats {
  int count = 0;
  double valid_fraction = 0.0;
  double mean_q1 = 0.0;
  double best10_q1 = 0.0;  // mean of the top ceil(10%) records by Q1
  double entropy_mean = 0.0;
  double entropy_std = 0.0;
  std::map<std::string, ObjectStats> per_object;
};

DatasetStats ComputeStats(std::span<const GraspRecord> records, const HandModel& hand);
std::string FormatStatsTable(const DatasetStats& stats);
std::string StatsToJson(const DatasetStats& stats);

}  // namespace dexgrasp

#endif  // DEXGRASP_DATASET_IO_H_
