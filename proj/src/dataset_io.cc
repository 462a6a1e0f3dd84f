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

#include "dexgrasp/dataset_io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace dexgrasp {
namespace {

using nlohmann::json;

double FiniteNumber(const json& j, const char* field) {
  if (!j.is_number()) throw Error(std::string(field) + " is not a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(std::string(field) + " is not finite");
  return v;
}

void RequireFinite(const GraspRecord& r) {
  auto check = [&](double v, const char* field) {
    if (!std::isfinite(v)) {
      throw Error("record " + r.object_id + "/" + std::to_string(r.seed) + ": " +
                  field + " is not finite");
    }
  };
  for (double v : r.translation) check(v, "translation");
  for (double v : r.rotation_quat_wxyz) check(v, "rotation_quat_wxyz");
  for (double v : r.joint_angles) check(v, "joint_angles");
  check(r.energy.fc, "energy.fc");
  check(r.energy.dis, "energy.dis");
  check(r.energy.pen, "energy.pen");
  check(r.energy.spen, "energy.spen");
  check(r.energy.joints, "energy.joints");
  check(r.energy.total, "energy.total");
  check(r.q1, "q1");
  check(r.penetration_cm, "penetration_cm");
  check(r.scale, "scale");
}

json MetaToJson(const RecordMeta& m) {
  return {
      {"weights",
       {{"dis", m.weights.dis},
        {"pen", m.weights.pen},
        {"spen", m.weights.spen},
        {"joints", m.weights.joints}}},
      {"q1_config",
       {{"friction", m.q1_config.friction},
        {"cone_edges", m.q1_config.cone_edges},
        {"contact_threshold", m.q1_config.contact_threshold},
        {"penetration_override", m.q1_config.penetration_override},
        {"torque_scale", m.q1_config.torque_scale},
        {"hand_samples_per_link", m.q1_config.hand_samples_per_link}}},
      {"iterations", m.iterations},
      {"master_seed", m.master_seed},
      {"penetration_samples", m.penetration_samples},
  };
}

RecordMeta MetaFromJson(const json& j) {
  RecordMeta m;
  const json& w = j.at("weights");
  m.weights = {FiniteNumber(w.at("dis"), "weights.dis"),
               FiniteNumber(w.at("pen"), "weights.pen"),
               FiniteNumber(w.at("spen"), "weights.spen"),
               FiniteNumber(w.at("joints"), "weights.joints")};
  const json& q = j.at("q1_config");
  m.q1_config.friction = FiniteNumber(q.at("friction"), "q1_config.friction");
  m.q1_config.cone_edges = q.at("cone_edges").get<int>();
  m.q1_config.contact_threshold =
      FiniteNumber(q.at("contact_threshold"), "q1_config.contact_threshold");
  m.q1_config.penetration_override =
      FiniteNumber(q.at("penetration_override"), "q1_config.penetration_override");
  m.q1_config.torque_scale = FiniteNumber(q.at("torque_scale"), "q1_config.torque_scale");
  m.q1_config.hand_samples_per_link = q.at("hand_samples_per_link").get<int>();
  m.iterations = j.at("iterations").get<int>();
  m.master_seed = j.at("master_seed").get<uint64_t>();
  m.penetration_samples = j.at("penetration_samples").get<int>();
  return m;
}

}  // namespace

GraspPose GraspRecord::Pose() const {
  GraspPose pose;
  pose.translation = Vec3(translation[0], translation[1], translation[2]);
  pose.rotation = Quat(rotation_quat_wxyz[0], rotation_quat_wxyz[1],
                       rotation_quat_wxyz[2], rotation_quat_wxyz[3]);
  pose.theta = Eigen::Map<const VecX>(joint_angles.data(), joint_angles.size());
  return pose;
}

void GraspRecord::SetPose(const GraspPose& pose) {
  translation = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  const Quat q = pose.rotation.normalized();
  rotation_quat_wxyz = {q.w(), q.x(), q.y(), q.z()};
  joint_angles.assign(pose.theta.data(), pose.theta.data() + pose.theta.size());
}

void GraspRecord::SetEnergy(const EnergyBreakdown& e) {
  energy = {e.fc, e.dis, e.pen, e.spen, e.joints, e.total};
}

std::string RecordToJsonLine(const GraspRecord& r) {
  RequireFinite(r);
  json j = {
      {"schema_version", kRecordSchemaMajor},
      {"object_id", r.object_id},
      {"scale", r.scale},
      {"translation", r.translation},
      {"rotation_quat_wxyz", r.rotation_quat_wxyz},
      {"joint_angles", r.joint_angles},
      {"energy",
       {{"fc", r.energy.fc},
        {"dis", r.energy.dis},
        {"pen", r.energy.pen},
        {"spen", r.energy.spen},
        {"joints", r.energy.joints},
        {"total", r.energy.total}}},
      {"q1", r.q1},
      {"penetration_cm", r.penetration_cm},
      {"flags",
       {{"penetration_ok", r.flags.penetration_ok},
        {"has_contacts", r.flags.has_contacts},
        {"q1_positive", r.flags.q1_positive},
        {"valid", r.flags.valid}}},
      {"seed", r.seed},
      {"meta", MetaToJson(r.meta)},
  };
  return j.dump();
}

GraspRecord RecordFromJsonLine(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw Error("record is not a JSON object");
    const int version = j.at("schema_version").get<int>();
    if (version != kRecordSchemaMajor) {
      throw Error("unsupported record schema version " + std::to_string(version));
    }
    GraspRecord r;
    r.object_id = j.at("object_id").get<std::string>();
    r.scale = FiniteNumber(j.at("scale"), "scale");
    const json& t = j.at("translation");
    const json& q = j.at("rotation_quat_wxyz");
    if (t.size() != 3 || q.size() != 4) throw Error("bad pose array length");
    for (int i = 0; i < 3; ++i) r.translation[i] = FiniteNumber(t[i], "translation");
    for (int i = 0; i < 4; ++i) r.rotation_quat_wxyz[i] = FiniteNumber(q[i], "rotation_quat_wxyz");
    for (const json& v : j.at("joint_angles")) r.joint_angles.push_back(FiniteNumber(v, "joint_angles"));
    const json& e = j.at("energy");
    r.energy = {FiniteNumber(e.at("fc"), "energy.fc"),
                FiniteNumber(e.at("dis"), "energy.dis"),
                FiniteNumber(e.at("pen"), "energy.pen"),
                FiniteNumber(e.at("spen"), "energy.spen"),
                FiniteNumber(e.at("joints"), "energy.joints"),
                FiniteNumber(e.at("total"), "energy.total")};
    r.q1 = FiniteNumber(j.at("q1"), "q1");
    r.penetration_cm = FiniteNumber(j.at("penetration_cm"), "penetration_cm");
    const json& f = j.at("flags");
    r.flags = {f.at("penetration_ok").get<bool>(), f.at("has_contacts").get<bool>(),
               f.at("q1_positive").get<bool>(), f.at("valid").get<bool>()};
    r.seed = j.at("seed").get<uint64_t>();
    r.meta = MetaFromJson(j.at("meta"));
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
}

int WriteRecords(std::span<const GraspRecord> records, const std::string& path) {
  // Serialize everything first so a bad record leaves no partial file.
  std::string buffer;
  for (const GraspRecord& r : records) {
    buffer += RecordToJsonLine(r);
    buffer += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << buffer;
  if (!out) throw Error("failed writing " + path);
  return static_cast<int>(records.size());
}

ReadResult ReadRecords(const std::string& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  ReadResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      result.records.push_back(RecordFromJsonLine(line));
    } catch (const Error& e) {
      const std::string message = "line " + std::to_string(line_no) + ": " + e.what();
      if (strict) throw Error(path + ": " + message);
      result.errors.push_back(message);
    }
  }
  return result;
}

void SortRecords(std::vector<GraspRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const GraspRecord& a, const GraspRecord& b) {
                     if (a.object_id != b.object_id) return a.object_id < b.object_id;
                     if (a.scale != b.scale) return a.scale < b.scale;
                     return a.seed < b.seed;
                   });
}

void ExportPosedHand(const HandModel& hand, const GraspPose& pose,
                     const std::string& path) {
  const Posed posed = ForwardKinematics(hand, pose);
  std::vector<ObjGroup> groups;
  for (int l = 0; l < hand.num_links(); ++l) {
    const TriMesh& mesh = hand.links()[l].mesh;
    if (mesh.empty()) continue;
    groups.push_back({hand.links()[l].name, mesh.Transformed(posed.link_transforms[l])});
  }
  SaveObjGroups(groups, path);
}

DatasetStats ComputeStats(std::span<const GraspRecord> records, const HandModel& hand) {
  if (records.empty()) throw Error("no records");
  DatasetStats stats;
  stats.count = static_cast<int>(records.size());
  std::vector<double> q1s;
  std::vector<VecX> joints;
  int valid = 0;
  for (const GraspRecord& r : records) {
    if (static_cast<int>(r.joint_angles.size()) != hand.num_dofs()) {
      throw Error("record has " + std::to_string(r.joint_angles.size()) +
                  " joint angles, hand has " + std::to_string(hand.num_dofs()));
    }
    ObjectStats& o = stats.per_object[r.object_id];
    ++o.count;
    if (r.flags.valid) {
      ++o.valid;
      ++valid;
    }
    q1s.push_back(r.q1);
    joints.push_back(r.Pose().theta);
  }
  stats.valid_fraction = static_cast<double>(valid) / stats.count;
  // Sorting first makes the sums independent of record order.
  std::sort(q1s.begin(), q1s.end(), std::greater<>());
  for (double q : q1s) stats.mean_q1 += q;
  stats.mean_q1 /= stats.count;
  const int top = (stats.count + 9) / 10;
  for (int i = 0; i < top; ++i) stats.best10_q1 += q1s[i];
  stats.best10_q1 /= top;
  const EntropyResult h =
      JointEntropy(joints, hand.lower_limits(), hand.upper_limits(), 100);
  stats.entropy_mean = h.mean;
  stats.entropy_std = h.stddev;
  return stats;
}

std::string FormatStatsTable(const DatasetStats& s) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %8s %8s %10s\n", "object", "grasps", "valid",
                "valid_frac");
  out << line;
  for (const auto& [id, o] : s.per_object) {
    std::snprintf(line, sizeof(line), "%-24s %8d %8d %10.4f\n", id.c_str(), o.count,
                  o.valid, o.count ? static_cast<double>(o.valid) / o.count : 0.0);
    out << line;
  }
  out << '\n';
  std::snprintf(line, sizeof(line), "%-12s %14s %18s %8s %8s %10s\n", "records",
                "100% Q1 mean", "best 10% Q1 mean", "H mean", "H std", "valid_frac");
  out << line;
  std::snprintf(line, sizeof(line), "%-12d %14.4f %18.4f %8.3f %8.3f %10.4f\n", s.count,
                s.mean_q1, s.best10_q1, s.entropy_mean, s.entropy_std, s.valid_fraction);
  out << line;
  return out.str();
}

std::string StatsToJson(const DatasetStats& s) {
  json objects = json::object();
  for (const auto& [id, o] : s.per_object) {
    objects[id] = {{"count", o.count}, {"valid", o.valid}};
  }
  json j = {{"count", s.count},
            {"valid_fraction", s.valid_fraction},
            {"mean_q1", s.mean_q1},
            {"best10_q1", s.best10_q1},
            {"entropy_mean", s.entropy_mean},
            {"entropy_std", s.entropy_std},
            {"per_object", objects}};
  return j.dump(2);
}

}  // namespace dexgrasp
