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

#ifndef DEXGRASP_HAND_MODEL_H_
#define DEXGRASP_HAND_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "dexgrasp/mesh.h"
#include "dexgrasp/random.h"
#include "dexgrasp/types.h"

namespace dexgrasp {

enum class JointType { kRevolute, kFixed };

struct Link {
  std::string name;
  TriMesh mesh;  // link frame
};

struct Joint {
  std::string name;
  JointType type = JointType::kRevolute;
  int parent_link = -1;
  int child_link = -1;
  Isometry origin = Isometry::Identity();  // child frame in parent frame at theta = 0
  Vec3 axis = Vec3::UnitX();               // unit, joint frame
  double lower = 0.0;
  double upper = 0.0;
  int dof = -1;  // index into theta, -1 for fixed joints
};

struct ContactCandidate {
  int link = 0;
  Vec3 point = Vec3::Zero();   // link frame
  Vec3 normal = Vec3::UnitZ(); // link frame, unit
};

struct SpenSphere {
  int link = 0;
  Vec3 center = Vec3::Zero();  // link frame
  double radius = 0.01;
};

// Articulated hand: a tree of links connected by revolute or fixed joints,
// rooted at the palm (link 0), plus the annotated contact candidates and
// self-penetration spheres.
class HandModel {
 public:
  HandModel() = default;
  // Joints must be listed parents-first. Throws Error on any violated
  // invariant (cycles, bad indices, inverted limits, theta_ref out of range).
  HandModel(std::vector<Link> links, std::vector<Joint> joints,
            std::vector<ContactCandidate> candidates,
            std::vector<SpenSphere> spheres, VecX theta_ref,
            Vec3 palm_axis = Vec3::UnitZ());

  // Parses a URDF subset (revolute/fixed joints, mesh or box geometry) and
  // the JSON annotation sidecar.
  static HandModel Load(const std::string& urdf_path,
                        const std::string& annotation_path);

  int num_dofs() const { return num_dofs_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<ContactCandidate>& contact_candidates() const { return candidates_; }
  const std::vector<SpenSphere>& spen_spheres() const { return spheres_; }
  const VecX& theta_ref() const { return theta_ref_; }
  const VecX& lower_limits() const { return lower_; }
  const VecX& upper_limits() const { return upper_; }
  // Direction the palm faces, in the root link frame.
  const Vec3& palm_axis() const { return palm_axis_; }

  int LinkIndex(const std::string& name) const;
  // Revolute dofs whose motion moves `link`, root-most first.
  const std::vector<int>& link_dofs(int link) const { return link_dofs_[link]; }
  // Same link or directly connected by a joint.
  bool LinksAdjacent(int a, int b) const;

  GraspPose RestPose() const;

 private:
  std::vector<Link> links_;
  std::vector<Joint> joints_;
  std::vector<ContactCandidate> candidates_;
  std::vector<SpenSphere> spheres_;
  VecX theta_ref_;
  VecX lower_;
  VecX upper_;
  Vec3 palm_axis_ = Vec3::UnitZ();
  int num_dofs_ = 0;
  std::vector<int> parent_joint_;
  std::vector<std::vector<int>> link_dofs_;
};

// World-frame kinematic state of a hand at one pose.
struct Posed {
  Vec3 translation = Vec3::Zero();
  std::vector<Isometry> link_transforms;
  std::vector<Vec3> dof_axes;     // world axis of each revolute dof
  std::vector<Vec3> dof_origins;  // a world point on that axis

  // d(point)/d(pose tangent) for a point rigidly attached to `link` that
  // currently sits at `world_point`.
  PointJacobian JacobianAt(const HandModel& hand, int link,
                           const Vec3& world_point) const;
};

// Joint angles are evaluated as given; limits are not enforced here.
Posed ForwardKinematics(const HandModel& hand, const GraspPose& pose);

struct WorldCandidate {
  Vec3 point;
  Vec3 normal;
  int link = 0;
  PointJacobian jacobian;
};
std::vector<WorldCandidate> WorldCandidates(const HandModel& hand,
                                            const Posed& posed,
                                            std::span<const int> indices);

struct WorldSphere {
  Vec3 center;
  double radius = 0.0;
  int link = 0;
  PointJacobian jacobian;
};
std::vector<WorldSphere> WorldSpheres(const HandModel& hand, const Posed& posed);

// Link-frame surface samples, drawn once and re-posed as needed.
struct LinkSample {
  int link = 0;
  SurfaceSample local;
};
std::vector<LinkSample> SampleHandSurface(const HandModel& hand,
                                          int per_link, Rng& rng);
std::vector<SurfaceSample> PoseHandSamples(std::span<const LinkSample> samples,
                                           const Posed& posed);
std::vector<SurfaceSample> HandSurface(const HandModel& hand, const Posed& posed,
                                       int per_link, Rng& rng);

}  // namespace dexgrasp

#endif  // DEXGRASP_HAND_MODEL_H_
