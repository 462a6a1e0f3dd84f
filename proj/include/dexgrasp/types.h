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

#ifndef DEXGRASP_TYPES_H_
#define DEXGRASP_TYPES_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace dexgrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Isometry = Eigen::Isometry3d;
using VecX = Eigen::VectorXd;
using Wrench = Eigen::Matrix<double, 6, 1>;

// Matrix whose columns are d(point)/d(T_x, T_y, T_z, w_x, w_y, w_z, theta...).
using PointJacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// Number of rigid-body coordinates in the pose tangent vector (T then R).
inline constexpr int kRigidDofs = 6;

// Raised for malformed inputs: unreadable files, broken descriptions,
// violated preconditions on public operations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Mat3 Skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),  //
      v.z(), 0, -v.x(),   //
      -v.y(), v.x(), 0;
  return m;
}

// Rotation exp(omega) as a unit quaternion.
inline Quat ExpMap(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z());
    return q.normalized();
  }
  return Quat(Eigen::AngleAxisd(angle, omega / angle));
}

// Hand configuration: global translation, rotation (w-x-y-z unit quaternion)
// and joint angles in radians.
struct GraspPose {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();
  VecX theta;

  // Number of pose tangent coordinates: 3 translation + 3 rotation + joints.
  int tangent_size() const { return kRigidDofs + static_cast<int>(theta.size()); }

  // Applies a tangent-space increment; rotation is left-multiplied by
  // exp(delta[3:6]) so that delta[3:6] is a world-frame rotation vector.
  GraspPose Retract(const VecX& delta) const;
};

inline GraspPose GraspPose::Retract(const VecX& delta) const {
  GraspPose out = *this;
  out.translation += delta.head<3>();
  out.rotation = (ExpMap(delta.segment<3>(3)) * rotation).normalized();
  out.theta += delta.tail(theta.size());
  return out;
}

}  // namespace dexgrasp

#endif  // DEXGRASP_TYPES_H_
