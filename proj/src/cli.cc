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

#include "dexgrasp/cli.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "dexgrasp/convex_hull.h"
#include "dexgrasp/dataset_io.h"
#include "dexgrasp/gradient_check.h"
#include "json.hpp"

namespace dexgrasp::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

void RejectUnknownKeys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw Error(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw Error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void Read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

bool IsMeshFile(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".obj" || ext == ".off" || ext == ".stl";
}

std::string ScaleTag(double scale) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scale_%.4f", scale);
  return buf;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Loads a hand or reports why not.
HandModel LoadHand(const RunConfig& config) {
  return HandModel::Load(config.hand_description.string(), config.hand_annotations.string());
}

}  // namespace

RunConfig RunConfig::FromJsonText(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    RejectUnknownKeys(j,
                      {"hand", "objects", "scales", "optim", "weights", "q1", "validation",
                       "batch_size", "seed", "workers", "penetration_samples", "output"},
                      "config");
    if (j.contains("hand")) {
      const json& h = j.at("hand");
      RejectUnknownKeys(h, {"description", "annotations"}, "hand");
      c.hand_description = Resolve(base_dir, h.at("description").get<std::string>());
      c.hand_annotations = Resolve(base_dir, h.at("annotations").get<std::string>());
    }
    if (j.contains("objects")) c.objects = Resolve(base_dir, j.at("objects").get<std::string>());
    if (j.contains("output")) c.output = Resolve(base_dir, j.at("output").get<std::string>());
    Read(j, "scales", c.scales);
    Read(j, "batch_size", c.batch_size);
    Read(j, "seed", c.seed);
    Read(j, "workers", c.workers);
    Read(j, "penetration_samples", c.penetration_samples);
    if (j.contains("optim")) {
      const json& o = j.at("optim");
      RejectUnknownKeys(o,
                        {"iterations", "step_translation", "step_rotation", "step_joints",
                         "decay_factor", "decay_interval", "resample_probability",
                         "metropolis", "temperature", "num_contacts", "step_rule",
                         "rms_decay", "init"},
                        "optim");
      OptimConfig& oc = c.optim;
      Read(o, "iterations", oc.iterations);
      Read(o, "step_translation", oc.step_translation);
      Read(o, "step_rotation", oc.step_rotation);
      Read(o, "step_joints", oc.step_joints);
      Read(o, "decay_factor", oc.decay_factor);
      Read(o, "decay_interval", oc.decay_interval);
      Read(o, "resample_probability", oc.resample_probability);
      Read(o, "metropolis", oc.metropolis);
      Read(o, "temperature", oc.temperature);
      Read(o, "num_contacts", oc.num_contacts);
      Read(o, "rms_decay", oc.rms_decay);
      if (o.contains("step_rule")) {
        const std::string rule = o.at("step_rule").get<std::string>();
        if (rule == "gradient") {
          oc.step_rule = StepRule::kGradient;
        } else if (rule == "rms") {
          oc.step_rule = StepRule::kRmsNormalized;
        } else {
          throw Error("step_rule must be 'gradient' or 'rms'");
        }
      }
      if (o.contains("init")) {
        const json& i = o.at("init");
        RejectUnknownKeys(i,
                          {"inflate_offset", "cone_half_angle_deg", "push_min", "push_max",
                           "theta_sigma_fraction", "fixed_roll_deg"},
                          "optim.init");
        Read(i, "inflate_offset", oc.init.inflate_offset);
        Read(i, "push_min", oc.init.push_min);
        Read(i, "push_max", oc.init.push_max);
        Read(i, "theta_sigma_fraction", oc.init.theta_sigma_fraction);
        if (i.contains("cone_half_angle_deg")) {
          oc.init.cone_half_angle = i.at("cone_half_angle_deg").get<double>() * kPi / 180.0;
        }
        if (i.contains("fixed_roll_deg") && !i.at("fixed_roll_deg").is_null()) {
          oc.init.fixed_roll = i.at("fixed_roll_deg").get<double>() * kPi / 180.0;
        }
      }
    }
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      RejectUnknownKeys(w, {"dis", "pen", "spen", "joints"}, "weights");
      Read(w, "dis", c.weights.dis);
      Read(w, "pen", c.weights.pen);
      Read(w, "spen", c.weights.spen);
      Read(w, "joints", c.weights.joints);
    }
    if (j.contains("q1")) {
      const json& q = j.at("q1");
      RejectUnknownKeys(q,
                        {"friction", "cone_edges", "contact_threshold",
                         "penetration_override", "torque_scale", "hand_samples_per_link"},
                        "q1");
      Read(q, "friction", c.q1.friction);
      Read(q, "cone_edges", c.q1.cone_edges);
      Read(q, "contact_threshold", c.q1.contact_threshold);
      Read(q, "penetration_override", c.q1.penetration_override);
      Read(q, "torque_scale", c.q1.torque_scale);
      Read(q, "hand_samples_per_link", c.q1.hand_samples_per_link);
    }
    if (j.contains("validation")) {
      const json& v = j.at("validation");
      RejectUnknownKeys(v, {"max_penetration_cm", "min_contacts"}, "validation");
      Read(v, "max_penetration_cm", c.validation.max_penetration_cm);
      Read(v, "min_contacts", c.validation.min_contacts);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::Load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJsonText(buffer.str(), path.parent_path());
}

std::string RunConfig::ToJsonText() const {
  const OptimConfig& o = optim;
  json init = {{"inflate_offset", o.init.inflate_offset},
               {"cone_half_angle_deg", o.init.cone_half_angle * 180.0 / kPi},
               {"push_min", o.init.push_min},
               {"push_max", o.init.push_max},
               {"theta_sigma_fraction", o.init.theta_sigma_fraction},
               {"fixed_roll_deg", o.init.fixed_roll ? json(*o.init.fixed_roll * 180.0 / kPi)
                                                    : json(nullptr)}};
  json j = {
      {"hand",
       {{"description", hand_description.string()},
        {"annotations", hand_annotations.string()}}},
      {"objects", objects.string()},
      {"scales", scales},
      {"optim",
       {{"iterations", o.iterations},
        {"step_translation", o.step_translation},
        {"step_rotation", o.step_rotation},
        {"step_joints", o.step_joints},
        {"decay_factor", o.decay_factor},
        {"decay_interval", o.decay_interval},
        {"resample_probability", o.resample_probability},
        {"metropolis", o.metropolis},
        {"temperature", o.temperature},
        {"num_contacts", o.num_contacts},
        {"step_rule", o.step_rule == StepRule::kGradient ? "gradient" : "rms"},
        {"rms_decay", o.rms_decay},
        {"init", init}}},
      {"weights",
       {{"dis", weights.dis},
        {"pen", weights.pen},
        {"spen", weights.spen},
        {"joints", weights.joints}}},
      {"q1",
       {{"friction", q1.friction},
        {"cone_edges", q1.cone_edges},
        {"contact_threshold", q1.contact_threshold},
        {"penetration_override", q1.penetration_override},
        {"torque_scale", q1.torque_scale},
        {"hand_samples_per_link", q1.hand_samples_per_link}}},
      {"validation",
       {{"max_penetration_cm", validation.max_penetration_cm},
        {"min_contacts", validation.min_contacts}}},
      {"batch_size", batch_size},
      {"seed", seed},
      {"workers", workers},
      {"penetration_samples", penetration_samples},
      {"output", output.string()},
  };
  return j.dump(2) + "\n";
}

void RunConfig::Validate() const {
  for (const fs::path& p : {hand_description, hand_annotations, objects}) {
    if (p.empty()) throw Error("config is missing a hand or objects path");
    if (!fs::exists(p)) throw Error("path does not exist: " + p.string());
  }
  if (scales.empty()) throw Error("scales must not be empty");
  for (double s : scales) {
    if (!(s > 0.0)) throw Error("scales must be positive");
  }
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (workers < 1) throw Error("workers must be >= 1");
  if (penetration_samples < 1) throw Error("penetration_samples must be >= 1");
  optim.Validate();
  q1.Validate();
  if (weights.dis < 0 || weights.pen < 0 || weights.spen < 0 || weights.joints < 0) {
    throw Error("weights must be non-negative");
  }
}

uint64_t ObjectSampleSeed(uint64_t master_seed, const std::string& object_id,
                          double scale) {
  // FNV-1a over the id and the scale's bit pattern; stable across platforms.
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  for (unsigned char ch : object_id) mix(ch);
  uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(scale));
  std::memcpy(&bits, &scale, sizeof(bits));
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(bits >> (8 * i)));
  return MixSeed(master_seed ^ h);
}

std::vector<SourceObject> LoadObjects(const fs::path& objects) {
  std::vector<SourceObject> out;
  if (fs::is_directory(objects) && fs::exists(objects / "manifest.json")) {
    std::ifstream in(objects / "manifest.json");
    const json manifest = json::parse(in);
    for (const auto& id : manifest.at("objects")) {
      const std::string name = id.get<std::string>();
      out.push_back({name, LoadMesh((objects / name / "normalized.obj").string())});
    }
    return out;
  }
  std::vector<fs::path> files;
  if (fs::is_directory(objects)) {
    for (const auto& entry : fs::directory_iterator(objects)) {
      if (entry.is_regular_file() && IsMeshFile(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(objects);
  }
  for (const fs::path& f : files) {
    out.push_back({f.stem().string(), NormalizeToUnitSphere(LoadMesh(f.string())).mesh});
  }
  return out;
}

int CmdPreprocess(const fs::path& in_dir, const fs::path& out_dir,
                  const std::vector<double>& scales, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(in_dir)) {
    err << "error: input directory " << in_dir << " does not exist\n";
    return kUsageError;
  }
  for (double s : scales) {
    if (!(s > 0.0)) {
      err << "error: scales must be positive\n";
      return kUsageError;
    }
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && IsMeshFile(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(out_dir);

  json manifest = {{"objects", json::array()}, {"scales", scales}, {"failed", json::array()}};
  for (const fs::path& file : files) {
    const std::string id = file.stem().string();
    try {
      const NormalizedMesh normalized = NormalizeToUnitSphere(LoadMesh(file.string()));
      const fs::path dir = out_dir / id;
      fs::create_directories(dir);
      SaveObj(normalized.mesh, (dir / "normalized.obj").string());
      for (double s : scales) {
        SaveObj(normalized.mesh.Scaled(s), (dir / (ScaleTag(s) + ".obj")).string());
      }
      SaveObj(ConvexHull3(normalized.mesh.vertices()), (dir / "hull.obj").string());
      manifest["objects"].push_back(id);
      out << "processed " << id << " (" << normalized.mesh.num_faces() << " faces, "
          << (normalized.mesh.watertight() ? "watertight" : "not watertight")
          << ", factor " << normalized.factor << ")\n";
    } catch (const std::exception& e) {
      manifest["failed"].push_back({{"file", file.filename().string()}, {"error", e.what()}});
      err << "failed " << file.filename().string() << ": " << e.what() << "\n";
    }
  }
  WriteText(out_dir / "manifest.json", manifest.dump(2) + "\n");
  json run = {{"command", "preprocess"},
              {"input", in_dir.string()},
              {"output", out_dir.string()},
              {"scales", scales}};
  WriteText(out_dir / "run.json", run.dump(2) + "\n");
  return manifest["failed"].empty() ? kOk : kPartialFailure;
}

int CmdSynth(const RunConfig& config, bool dry_run, std::ostream& out, std::ostream& err) {
  std::vector<SourceObject> objects;
  HandModel hand;
  try {
    config.Validate();
    hand = LoadHand(config);
    objects = LoadObjects(config.objects);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  if (dry_run) {
    out << "plan: " << objects.size() << " object(s) x " << config.scales.size()
        << " scale(s) x " << config.batch_size << " grasps, " << config.optim.iterations
        << " iterations, hand with " << hand.num_dofs() << " joints\n";
    for (const SourceObject& o : objects) {
      for (double s : config.scales) out << "  " << o.id << " @ " << s << "\n";
    }
    out << "output: " << config.output.string() << " (dry run, nothing written)\n";
    return kOk;
  }

  BatchOptions options;
  options.optim = config.optim;
  options.weights = config.weights;
  options.q1 = config.q1;
  options.validation = config.validation;
  options.workers = config.workers;

  std::vector<GraspRecord> all;
  int failures = 0;
  for (const SourceObject& o : objects) {
    for (double s : config.scales) {
      try {
        const GraspObject object =
            PrepareObject(o.id, s, o.mesh.Scaled(s), ObjectSampleSeed(config.seed, o.id, s),
                          config.penetration_samples);
        std::vector<GraspRecord> records =
            RunBatch(hand, object, config.batch_size, options, config.seed);
        int valid = 0;
        for (const GraspRecord& r : records) valid += r.flags.valid;
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s scale %.4f  valid %d/%d (%.1f%%)\n",
                      o.id.c_str(), s, valid, static_cast<int>(records.size()),
                      100.0 * valid / records.size());
        out << line;
        all.insert(all.end(), records.begin(), records.end());
      } catch (const std::exception& e) {
        ++failures;
        err << "failed " << o.id << " @ " << s << ": " << e.what() << "\n";
      }
    }
  }
  SortRecords(all);
  try {
    if (config.output.has_parent_path()) fs::create_directories(config.output.parent_path());
    const int written = WriteRecords(all, config.output.string());
    WriteText(config.output.parent_path() / "run.json", config.ToJsonText());
    out << "wrote " << written << " records to " << config.output.string() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPartialFailure;
  }
  return failures ? kPartialFailure : kOk;
}

int CmdEval(const RunConfig& config, const fs::path& dataset, bool strict, std::ostream& out,
            std::ostream& err) {
  HandModel hand;
  std::map<std::string, TriMesh> sources;
  ReadResult data;
  try {
    hand = LoadHand(config);
    for (SourceObject& o : LoadObjects(config.objects)) sources.emplace(o.id, std::move(o.mesh));
    data = ReadRecords(dataset.string(), strict);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  for (const std::string& e : data.errors) err << "skipped " << e << "\n";
  if (data.records.empty()) {
    err << "error: no records in " << dataset.string() << "\n";
    return kPartialFailure;
  }

  std::map<std::tuple<std::string, double, uint64_t, int>, GraspObject> prepared;
  std::map<std::string, GraspEvaluator> evaluators;
  double worst_q1 = 0.0, worst_pen = 0.0;
  int mismatched_flags = 0;
  std::vector<GraspRecord> recomputed;
  for (const GraspRecord& r : data.records) {
    if (static_cast<int>(r.joint_angles.size()) != hand.num_dofs()) {
      err << "error: record " << r.object_id << "/" << r.seed << " has "
          << r.joint_angles.size() << " joint angles, hand has " << hand.num_dofs() << "\n";
      return kPartialFailure;
    }
    auto src = sources.find(r.object_id);
    if (src == sources.end()) {
      err << "error: unknown object '" << r.object_id << "'\n";
      return kPartialFailure;
    }
    const auto key = std::make_tuple(r.object_id, r.scale, r.meta.master_seed,
                                     r.meta.penetration_samples);
    auto it = prepared.find(key);
    if (it == prepared.end()) {
      it = prepared
               .emplace(key, PrepareObject(r.object_id, r.scale, src->second.Scaled(r.scale),
                                           ObjectSampleSeed(r.meta.master_seed, r.object_id,
                                                            r.scale),
                                           r.meta.penetration_samples))
               .first;
    }
    const std::string q1_key = json(r.meta.q1_config.friction).dump() + "/" +
                               std::to_string(r.meta.q1_config.cone_edges) + "/" +
                               json(r.meta.q1_config.contact_threshold).dump() + "/" +
                               json(r.meta.q1_config.penetration_override).dump() + "/" +
                               json(r.meta.q1_config.torque_scale).dump() + "/" +
                               std::to_string(r.meta.q1_config.hand_samples_per_link);
    auto ev = evaluators.find(q1_key);
    if (ev == evaluators.end()) {
      ev = evaluators.emplace(q1_key, GraspEvaluator(hand, r.meta.q1_config, config.validation))
               .first;
    }
    const GraspQuality q = ev->second.Evaluate(it->second, r.Pose());
    worst_q1 = std::max(worst_q1, std::abs(q.q1 - r.q1));
    worst_pen = std::max(worst_pen, std::abs(q.penetration_cm - r.penetration_cm));
    if (!(q.flags == r.flags)) ++mismatched_flags;
    GraspRecord copy = r;
    copy.q1 = q.q1;
    copy.penetration_cm = q.penetration_cm;
    copy.flags = q.flags;
    recomputed.push_back(std::move(copy));
  }

  const DatasetStats stats = ComputeStats(recomputed, hand);
  out << FormatStatsTable(stats);
  out << "\nreference (published full-scale datasets, context only):\n";
  out << "  DDGdata      100% Q1 mean 0.0712  best 10% Q1 mean 0.2277  H mean 4.246\n";
  out << "  DexGraspNet  100% Q1 mean 0.1145  best 10% Q1 mean 0.2533  H mean 5.962\n";
  char line[200];
  std::snprintf(line, sizeof(line),
                "\nconsistency: max |dQ1| %.3e, max |dpen| %.3e cm, flag mismatches %d\n",
                worst_q1, worst_pen, mismatched_flags);
  out << line;
  if (worst_q1 > 1e-9 || worst_pen > 1e-9 || mismatched_flags > 0) {
    err << "stored metrics do not match recomputed metrics\n";
    return kVerificationFailure;
  }
  return data.errors.empty() ? kOk : kPartialFailure;
}

int CmdStats(const RunConfig& config, const fs::path& dataset,
             const std::optional<fs::path>& json_out, bool strict, std::ostream& out,
             std::ostream& err) {
  try {
    const HandModel hand = LoadHand(config);
    const ReadResult data = ReadRecords(dataset.string(), strict);
    for (const std::string& e : data.errors) err << "skipped " << e << "\n";
    if (data.records.empty()) {
      err << "error: no records in " << dataset.string() << "\n";
      return kPartialFailure;
    }
    const DatasetStats stats = ComputeStats(data.records, hand);
    out << FormatStatsTable(stats);
    if (json_out) WriteText(*json_out, StatsToJson(stats) + "\n");
    return data.errors.empty() ? kOk : kPartialFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

int CmdExport(const RunConfig& config, const fs::path& dataset, int index,
              const fs::path& out_path, std::ostream& out, std::ostream& err) {
  try {
    const HandModel hand = LoadHand(config);
    const ReadResult data = ReadRecords(dataset.string(), true);
    if (index < 0 || index >= static_cast<int>(data.records.size())) {
      err << "error: record index " << index << " out of range (" << data.records.size()
          << " records)\n";
      return kUsageError;
    }
    const GraspRecord& r = data.records[index];
    if (static_cast<int>(r.joint_angles.size()) != hand.num_dofs()) {
      err << "error: record/hand joint count mismatch\n";
      return kPartialFailure;
    }
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    ExportPosedHand(hand, r.Pose(), out_path.string());
    out << "wrote hand " << out_path.string() << "\n";
    for (SourceObject& o : LoadObjects(config.objects)) {
      if (o.id != r.object_id) continue;
      fs::path object_path = out_path;
      object_path.replace_filename(out_path.stem().string() + "_object.obj");
      SaveObj(o.mesh.Scaled(r.scale), object_path.string());
      out << "wrote object " << object_path.string() << "\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

int CmdCheckGradients(const RunConfig& config, uint64_t seed, int states, std::ostream& out,
                      std::ostream& err, const GradientCheckOptions* options) {
  HandModel hand;
  std::vector<SourceObject> objects;
  try {
    hand = LoadHand(config);
    objects = LoadObjects(config.objects);
    if (objects.empty()) throw Error("no objects found");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  GradientCheckOptions opts = options ? *options : GradientCheckOptions{};
  opts.states = states;
  bool passed = true;
  for (const SourceObject& o : objects) {
    const double scale = config.scales.front();
    const GraspObject object =
        PrepareObject(o.id, scale, o.mesh.Scaled(scale), ObjectSampleSeed(seed, o.id, scale),
                      config.penetration_samples);
    const GradientReport report = CheckGradients(hand, object, seed, opts);
    out << "object " << o.id << " @ scale " << scale << "\n" << report.Format();
    passed = passed && report.passed;
  }
  return passed ? kOk : kVerificationFailure;
}

}  // namespace dexgrasp::cli
