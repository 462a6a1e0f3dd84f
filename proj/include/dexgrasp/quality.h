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

#ifndef DEXGRASP_QUALITY_H_
#define DEXGRASP_QUALITY_H_

#include <span>
#include <vector>

#include "dexgrasp/energy.h"
#include "dexgrasp/hand_model.h"
#include "dexgrasp/types.h"

namespace dexgrasp {

struct Contact {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // into the object
  int link = 0;
};

struct Q1Config {
  double friction = 0.5;             // mu
  int cone_edges = 8;                // m
  double contact_threshold = 0.001;  // meters
  double penetration_override = 0.005;  // meters; Q1 := 0 beyond this depth
  double torque_scale = 1.0;         // lambda, meters
  int hand_samples_per_link = 256;   // hand surface samples used to find contacts

  void Validate() const;
  bool operator==(const Q1Config&) const = default;
};

struct ValidationConfig {
  double max_penetration_cm = 0.1;
  int min_contacts = 2;
};

struct ValidityFlags {
  bool penetration_ok = false;
  bool has_contacts = false;
  bool q1_positive = false;
  bool valid = false;
  bool operator==(const ValidityFlags&) const = default;
};

// For each link, the hand surface sample closest to the object, kept when
// it lies within `threshold` of the surface. Points and normals are taken
// from the nearest object surface point.
std::vector<Contact> FindContacts(const HandModel& hand, const Posed& posed,
                                  const TriMesh& object, double threshold,
                                  std::span<const LinkSample> hand_samples);

// Edges of the linearized friction cone as unit forces with their torques
// (x cross f) / lambda.
std::vector<Wrench> ConeWrenches(const Contact& contact, const Q1Config& cfg);

// Radius of the largest origin-centered ball inside the convex hull of the
// wrenches; zero when the origin is outside, on the boundary, or the set is
// flat in wrench space.
double Q1FromWrenches(std::span<const Wrench> wrenches);

// Q1 of a contact set with the empty-set and penetration overrides applied.
// `penetration` is in meters.
double Q1(std::span<const Contact> contacts, const Q1Config& cfg, double penetration);

// Deepest object sample inside the hand, in centimeters.
double PenetrationDepthCm(const HandModel& hand, const Posed& posed,
                          std::span<const SurfaceSample> object_samples);

ValidityFlags Validate(double penetration_cm, int contact_count, double q1,
                       const ValidationConfig& cfg);

struct EntropyResult {
  double mean = 0.0;
  double stddev = 0.0;  // population std over joints
  std::vector<double> per_joint;
};
// Base-2 Shannon entropy of each joint's histogram over its limits.
EntropyResult JointEntropy(std::span<const VecX> samples, const VecX& lower,
                           const VecX& upper, int bins = 100);

struct GraspQuality {
  std::vector<Contact> contacts;
  double q1 = 0.0;
  double penetration_cm = 0.0;
  ValidityFlags flags;
};

// Bundles the per-hand sample set so repeated evaluations agree exactly.
class GraspEvaluator {
 public:
  GraspEvaluator(const HandModel& hand, Q1Config q1, ValidationConfig validation);

  GraspQuality Evaluate(const GraspObject& object, const GraspPose& pose) const;

  const Q1Config& q1_config() const { return q1_; }
  const ValidationConfig& validation_config() const { return validation_; }

 private:
  const HandModel* hand_;
  Q1Config q1_;
  ValidationConfig validation_;
  std::vector<LinkSample> samples_;
};

}  // namespace dexgrasp

#endif  // DEXGRASP_QUALITY_H_
