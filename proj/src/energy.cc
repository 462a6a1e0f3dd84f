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

#include "dexgrasp/energy.h"

#include <cmath>

#include "dexgrasp/random.h"
#include "dexgrasp/signed_distance.h"

namespace dexgrasp {

GraspObject PrepareObject(std::string id, double scale, TriMesh mesh,
                          uint64_t seed, int sample_count) {
  GraspObject object;
  object.id = std::move(id);
  object.scale = scale;
  Rng rng = MakeRng(seed);
  object.samples = SampleSurface(mesh, sample_count, rng);
  object.mesh = std::move(mesh);
  return object;
}

ForceClosure ForceClosureEnergy(std::span<const Vec3> points,
                                std::span<const Vec3> normals) {
  if (points.empty()) throw Error("force closure energy needs at least one contact");
  if (points.size() != normals.size()) throw Error("contact points and normals differ in count");
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  for (size_t i = 0; i < points.size(); ++i) {
    force += normals[i];
    torque += points[i].cross(normals[i]);
  }
  ForceClosure out;
  out.value = std::sqrt(force.squaredNorm() + torque.squaredNorm());
  out.point_grads.assign(points.size(), Vec3::Zero());
  if (out.value > 0.0) {
    // d(x x c)/dx = -[c]x, so dE/dx = [c]x^T tau / E = c x tau / E.
    for (size_t i = 0; i < points.size(); ++i) {
      out.point_grads[i] = normals[i].cross(torque) / out.value;
    }
  }
  return out;
}

std::vector<Vec3> ContactNormals(std::span<const WorldCandidate> contacts,
                                 const TriMesh& object) {
  std::vector<Vec3> normals;
  normals.reserve(contacts.size());
  for (const WorldCandidate& c : contacts) {
    normals.push_back(-SignedDistance(object, c.point).gradient);
  }
  return normals;
}

Term ForceClosureTerm(std::span<const WorldCandidate> contacts,
                      std::span<const Vec3> normals, int tangent_size) {
  std::vector<Vec3> points;
  points.reserve(contacts.size());
  for (const WorldCandidate& c : contacts) points.push_back(c.point);
  const ForceClosure fc = ForceClosureEnergy(points, normals);
  Term term{fc.value, VecX::Zero(tangent_size)};
  for (size_t i = 0; i < contacts.size(); ++i) {
    term.grad += contacts[i].jacobian.transpose() * fc.point_grads[i];
  }
  return term;
}

Term DistanceTerm(std::span<const WorldCandidate> contacts, const TriMesh& object,
                  int tangent_size) {
  Term term{0.0, VecX::Zero(tangent_size)};
  for (const WorldCandidate& c : contacts) {
    const SignedDistanceResult sd = SignedDistance(object, c.point);
    term.value += std::abs(sd.distance);
    const double sign = (sd.distance > 0.0) - (sd.distance < 0.0);
    term.grad += sign * (c.jacobian.transpose() * sd.gradient);
  }
  return term;
}

HandDepth DepthInsideHand(const HandModel& hand, const Posed& posed,
                          const Vec3& world_point) {
  HandDepth best;
  for (int l = 0; l < hand.num_links(); ++l) {
    const TriMesh& mesh = hand.links()[l].mesh;
    if (mesh.empty()) continue;
    const Isometry& tf = posed.link_transforms[l];
    const Vec3 local = tf.linear().transpose() * (world_point - tf.translation());
    if (!mesh.bounds().contains(local)) continue;
    const SignedDistanceResult sd = SignedDistance(mesh, local);
    const double depth = -sd.distance;
    if (depth > best.depth) {
      best.depth = depth;
      best.link = l;
      best.gradient = tf.linear() * sd.gradient;
    }
  }
  return best;
}

Term ReversePenetrationTerm(std::span<const SurfaceSample> object_samples,
                            const HandModel& hand, const Posed& posed) {
  const int n = kRigidDofs + hand.num_dofs();
  Term term{0.0, VecX::Zero(n)};
  for (const SurfaceSample& s : object_samples) {
    const HandDepth d = DepthInsideHand(hand, posed, s.point);
    if (d.link < 0) continue;
    term.value += d.depth;
    // The sample is fixed; moving the link by J shifts it by -J relative
    // to the link, so d(depth) = -d(sd) = g . J.
    term.grad += posed.JacobianAt(hand, d.link, s.point).transpose() * d.gradient;
  }
  return term;
}

Term SelfPenetrationTerm(const HandModel& hand, std::span<const WorldSphere> spheres,
                         int tangent_size) {
  Term term{0.0, VecX::Zero(tangent_size)};
  for (size_t p = 0; p < spheres.size(); ++p) {
    for (size_t q = p + 1; q < spheres.size(); ++q) {
      if (hand.LinksAdjacent(spheres[p].link, spheres[q].link)) continue;
      const double delta = 0.5 * (spheres[p].radius + spheres[q].radius);
      const Vec3 diff = spheres[p].center - spheres[q].center;
      const double dist = diff.norm();
      if (dist >= delta) continue;
      // (p, q) and (q, p) both appear in the ordered double sum.
      term.value += 2.0 * (delta - dist);
      if (dist > 0.0) {
        const Vec3 g = -2.0 * diff / dist;
        term.grad += spheres[p].jacobian.transpose() * g -
                     spheres[q].jacobian.transpose() * g;
      }
    }
  }
  return term;
}

Term JointLimitTerm(const VecX& theta, const VecX& lower, const VecX& upper) {
  Term term{0.0, VecX::Zero(theta.size())};
  for (int i = 0; i < theta.size(); ++i) {
    if (theta[i] > upper[i]) {
      term.value += theta[i] - upper[i];
      term.grad[i] = 1.0;
    } else if (theta[i] < lower[i]) {
      term.value += lower[i] - theta[i];
      term.grad[i] = -1.0;
    }
  }
  return term;
}

EnergyBreakdown TotalEnergy(const HandModel& hand, const GraspObject& object,
                            const GraspPose& pose, std::span<const int> contact_indices,
                            const Weights& weights,
                            const std::vector<Vec3>* frozen_normals) {
  const int n = pose.tangent_size();
  const Posed posed = ForwardKinematics(hand, pose);
  const auto contacts = WorldCandidates(hand, posed, contact_indices);
  const std::vector<Vec3> normals =
      frozen_normals ? *frozen_normals : ContactNormals(contacts, object.mesh);

  const Term fc = ForceClosureTerm(contacts, normals, n);
  const Term dis = DistanceTerm(contacts, object.mesh, n);
  const Term pen = ReversePenetrationTerm(object.samples, hand, posed);
  const Term spen = SelfPenetrationTerm(hand, WorldSpheres(hand, posed), n);
  const Term joints = JointLimitTerm(pose.theta, hand.lower_limits(), hand.upper_limits());

  EnergyBreakdown e;
  e.fc = fc.value;
  e.dis = dis.value;
  e.pen = pen.value;
  e.spen = spen.value;
  e.joints = joints.value;
  e.total = e.fc + weights.dis * e.dis + weights.pen * e.pen +
            weights.spen * e.spen + weights.joints * e.joints;
  e.grad = fc.grad + weights.dis * dis.grad + weights.pen * pen.grad +
           weights.spen * spen.grad;
  e.grad.tail(hand.num_dofs()) += weights.joints * joints.grad;
  return e;
}

}  // namespace dexgrasp
