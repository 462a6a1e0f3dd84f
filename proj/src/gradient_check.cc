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

#include "dexgrasp/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dexgrasp/random.h"

namespace dexgrasp {
namespace {

using TermFn = std::function<double(const GraspPose&)>;

VecX CentralDifference(const TermFn& f, const GraspPose& pose, double h) {
  const int n = pose.tangent_size();
  VecX out(n);
  for (int k = 0; k < n; ++k) {
    VecX e = VecX::Zero(n);
    e[k] = h;
    out[k] = (f(pose.Retract(e)) - f(pose.Retract(-e))) / (2.0 * h);
  }
  return out;
}

double RelativeError(const VecX& analytic, const VecX& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale < 1e-10) return 0.0;
  return (analytic - numeric).norm() / scale;
}

}  // namespace

GraspPose RandomProbePose(const HandModel& hand, const GraspObject& object, Rng& rng,
                          bool curled) {
  double radius = 0.0;
  for (const Vec3& v : object.mesh.vertices()) radius = std::max(radius, v.norm());
  GraspPose pose;
  pose.rotation = RandomRotation(rng);
  const Vec3 facing = pose.rotation * hand.palm_axis();
  pose.translation = -facing * radius * Uniform(rng, 0.6, 1.3);
  pose.theta.resize(hand.num_dofs());
  for (int j = 0; j < hand.num_dofs(); ++j) {
    const double lo = hand.lower_limits()[j], hi = hand.upper_limits()[j];
    const double range = hi - lo;
    pose.theta[j] = curled ? Uniform(rng, lo + 0.3 * range, lo + 0.6 * range)
                           : Uniform(rng, lo - 0.1 * range, hi + 0.1 * range);
  }
  return pose;
}

GradientReport CheckGradients(const HandModel& hand, const GraspObject& object,
                              uint64_t seed, const GradientCheckOptions& options) {
  const char* names[] = {"E_fc", "E_dis", "E_pen", "E_spen", "E_joints"};
  GradientReport report;
  report.tolerance = options.tolerance;
  for (const char* n : names) report.terms.push_back({n});

  Rng rng = MakeRng(seed);
  const int candidates = static_cast<int>(hand.contact_candidates().size());
  const int num_contacts = std::min(4, candidates);
  for (int s = 0; s < options.states; ++s) {
    const GraspPose pose = RandomProbePose(hand, object, rng, s % 2 == 1);
    std::vector<int> indices(candidates);
    for (int i = 0; i < candidates; ++i) indices[i] = i;
    for (int i = 0; i < num_contacts; ++i) {
      std::swap(indices[i],
                indices[std::uniform_int_distribution<int>(i, candidates - 1)(rng)]);
    }
    indices.resize(num_contacts);

    const int n = pose.tangent_size();
    const Posed base = ForwardKinematics(hand, pose);
    const auto base_contacts = WorldCandidates(hand, base, indices);
    const std::vector<Vec3> frozen = ContactNormals(base_contacts, object.mesh);

    const TermFn fns[] = {
        [&](const GraspPose& p) {
          const Posed posed = ForwardKinematics(hand, p);
          return ForceClosureTerm(WorldCandidates(hand, posed, indices), frozen, n).value;
        },
        [&](const GraspPose& p) {
          const Posed posed = ForwardKinematics(hand, p);
          return DistanceTerm(WorldCandidates(hand, posed, indices), object.mesh, n).value;
        },
        [&](const GraspPose& p) {
          return ReversePenetrationTerm(object.samples, hand, ForwardKinematics(hand, p))
              .value;
        },
        [&](const GraspPose& p) {
          const Posed posed = ForwardKinematics(hand, p);
          return SelfPenetrationTerm(hand, WorldSpheres(hand, posed), n).value;
        },
        [&](const GraspPose& p) {
          return JointLimitTerm(p.theta, hand.lower_limits(), hand.upper_limits()).value;
        },
    };
    VecX joints_grad = VecX::Zero(n);
    const Term joints = JointLimitTerm(pose.theta, hand.lower_limits(), hand.upper_limits());
    joints_grad.tail(hand.num_dofs()) = joints.grad;
    const Term analytic[] = {
        ForceClosureTerm(base_contacts, frozen, n),
        DistanceTerm(base_contacts, object.mesh, n),
        ReversePenetrationTerm(object.samples, hand, base),
        SelfPenetrationTerm(hand, WorldSpheres(hand, base), n),
        Term{joints.value, joints_grad},
    };

    for (int t = 0; t < 5; ++t) {
      TermCheck& check = report.terms[t];
      VecX grad = analytic[t].grad;
      if (options.tamper) options.tamper(check.name, grad);
      const VecX fd = CentralDifference(fns[t], pose, options.step);
      const VecX fd_fine = CentralDifference(fns[t], pose, options.step / 4.0);
      if (RelativeError(fd_fine, fd) > 1e-4) {
        ++check.skipped;
        continue;
      }
      ++check.checked;
      if (analytic[t].value > 0.0) ++check.active;
      check.worst_relative_error =
          std::max(check.worst_relative_error, RelativeError(grad, fd));
    }
  }
  report.passed = std::all_of(report.terms.begin(), report.terms.end(), [&](const TermCheck& c) {
    return c.checked > 0 && c.worst_relative_error <= options.tolerance;
  });
  return report;
}

std::string GradientReport::Format() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %16s %8s %8s %8s\n", "term", "worst rel err",
                "checked", "active", "skipped");
  out << line;
  for (const TermCheck& t : terms) {
    const bool ok = t.checked > 0 && t.worst_relative_error <= tolerance;
    std::snprintf(line, sizeof(line), "%-10s %16.3e %8d %8d %8d  %s\n", t.name.c_str(),
                  t.worst_relative_error, t.checked, t.active, t.skipped,
                  ok ? "ok" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof(line), "tolerance %.1e: %s\n", tolerance,
                passed ? "PASS" : "FAIL");
  out << line;
  return out.str();
}

}  // namespace dexgrasp
