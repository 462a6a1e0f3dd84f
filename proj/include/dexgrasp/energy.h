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

#ifndef DEXGRASP_ENERGY_H_
#define DEXGRASP_ENERGY_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dexgrasp/hand_model.h"
#include "dexgrasp/mesh.h"
#include "dexgrasp/types.h"

namespace dexgrasp {

struct Weights {
  double dis = 100.0;
  double pen = 100.0;
  double spen = 10.0;
  double joints = 1.0;
  bool operator==(const Weights&) const = default;
};

struct EnergyBreakdown {
  double fc = 0.0;
  double dis = 0.0;
  double pen = 0.0;
  double spen = 0.0;
  double joints = 0.0;
  double total = 0.0;
  VecX grad;  // d total / d pose tangent (T, R, theta)
};

// An object prepared for synthesis: the (scaled) mesh plus the fixed surface
// samples used by the reverse penetration energy.
struct GraspObject {
  std::string id;
  double scale = 1.0;
  TriMesh mesh;
  std::vector<SurfaceSample> samples;
};

// Surface samples drawn once per object/scale from the run seed.
inline constexpr int kDefaultPenetrationSamples = 2048;
GraspObject PrepareObject(std::string id, double scale, TriMesh mesh,
                          uint64_t seed,
                          int sample_count = kDefaultPenetrationSamples);

// Pose-space energy term: value and gradient over the pose tangent.
struct Term {
  double value = 0.0;
  VecX grad;
};

// ||(sum c_i, sum x_i x c_i)||. `point_grads[i]` is d/dx_i with the
// normals held fixed.
struct ForceClosure {
  double value = 0.0;
  std::vector<Vec3> point_grads;
};
ForceClosure ForceClosureEnergy(std::span<const Vec3> points,
                                std::span<const Vec3> normals);

// Object normal at each contact, pointing into the object: minus the
// signed-distance gradient at the contact point.
std::vector<Vec3> ContactNormals(std::span<const WorldCandidate> contacts,
                                 const TriMesh& object);

// Force-closure energy pulled back to the pose through the candidates'
// jacobians.
Term ForceClosureTerm(std::span<const WorldCandidate> contacts,
                      std::span<const Vec3> normals, int tangent_size);

// Sum of unsigned distances from the contacts to the object surface.
Term DistanceTerm(std::span<const WorldCandidate> contacts, const TriMesh& object,
                  int tangent_size);

// Depth of a world point inside the union of hand links: the largest
// max(0, -sd) over links. `link` is -1 when the point is outside every link.
struct HandDepth {
  double depth = 0.0;
  int link = -1;
  Vec3 gradient = Vec3::Zero();  // world gradient of that link's sd
};
HandDepth DepthInsideHand(const HandModel& hand, const Posed& posed,
                          const Vec3& world_point);

// Sum over object samples of their depth inside the hand.
Term ReversePenetrationTerm(std::span<const SurfaceSample> object_samples,
                            const HandModel& hand, const Posed& posed);

// Sum over ordered sphere pairs of max(delta - |p - q|, 0), skipping pairs
// on the same or adjacent links. delta is the mean radius of the pair.
Term SelfPenetrationTerm(const HandModel& hand, std::span<const WorldSphere> spheres,
                         int tangent_size);

// Distance of each joint outside its limits. Gradient has one entry per joint.
Term JointLimitTerm(const VecX& theta, const VecX& lower, const VecX& upper);

// All five terms and the weighted total at one pose. When `frozen_normals`
// is given, those contact normals are used instead of recomputing them.
EnergyBreakdown TotalEnergy(const HandModel& hand, const GraspObject& object,
                            const GraspPose& pose, std::span<const int> contact_indices,
                            const Weights& weights,
                            const std::vector<Vec3>* frozen_normals = nullptr);

}  // namespace dexgrasp

#endif  // DEXGRASP_ENERGY_H_
