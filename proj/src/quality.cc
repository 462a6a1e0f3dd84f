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

#include "dexgrasp/quality.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dexgrasp/convex_hull.h"
#include "dexgrasp/random.h"
#include "dexgrasp/signed_distance.h"

namespace dexgrasp {
namespace {

// Origin within this distance of a facet plane counts as on the boundary.
constexpr double kBoundaryTolerance = 1e-9;
// Hand surface samples for contact detection are always drawn from this
// seed so that stored and recomputed metrics agree.
constexpr uint64_t kHandSampleSeed = 0x5eed;

}  // namespace

void Q1Config::Validate() const {
  if (!(friction > 0.0)) throw Error("friction coefficient must be positive");
  if (cone_edges < 3) throw Error("friction cone needs at least 3 edges");
  if (!(contact_threshold > 0.0) || !(penetration_override > 0.0)) {
    throw Error("Q1 thresholds must be positive");
  }
  if (!(torque_scale > 0.0)) throw Error("torque scale must be positive");
  if (hand_samples_per_link < 1) throw Error("hand_samples_per_link must be >= 1");
}

std::vector<Contact> FindContacts(const HandModel& hand, const Posed& posed,
                                  const TriMesh& object, double threshold,
                                  std::span<const LinkSample> hand_samples) {
  if (!(threshold > 0.0)) throw Error("contact threshold must be positive");
  const int nl = hand.num_links();
  std::vector<double> best(nl, std::numeric_limits<double>::infinity());
  std::vector<Contact> found(nl);
  for (const LinkSample& s : hand_samples) {
    const Vec3 world = posed.link_transforms[s.link] * s.local.point;
    const SignedDistanceResult sd = SignedDistance(object, world);
    const double dist = std::abs(sd.distance);
    if (dist < best[s.link]) {
      best[s.link] = dist;
      found[s.link] = {sd.nearest.point, -sd.gradient, s.link};
    }
  }
  std::vector<Contact> contacts;
  for (int l = 0; l < nl; ++l) {
    if (best[l] <= threshold) contacts.push_back(found[l]);
  }
  return contacts;
}

std::vector<Wrench> ConeWrenches(const Contact& contact, const Q1Config& cfg) {
  const Vec3 n = contact.normal.normalized();
  const Vec3 t1 = AnyOrthogonal(n);
  const Vec3 t2 = n.cross(t1);
  std::vector<Wrench> out;
  out.reserve(cfg.cone_edges);
  for (int k = 0; k < cfg.cone_edges; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / cfg.cone_edges;
    const Vec3 f =
        (n + cfg.friction * (std::cos(phi) * t1 + std::sin(phi) * t2)).normalized();
    Wrench w;
    w.head<3>() = f;
    w.tail<3>() = contact.point.cross(f) / cfg.torque_scale;
    out.push_back(w);
  }
  return out;
}

double Q1FromWrenches(std::span<const Wrench> wrenches) {
  if (wrenches.size() < 7) return 0.0;
  std::vector<VecX> points(wrenches.begin(), wrenches.end());
  const HullResult hull = QuickHull(points);
  if (!hull.full_dimensional(6)) return 0.0;
  double radius = std::numeric_limits<double>::infinity();
  for (const HullFacet& f : hull.facets) radius = std::min(radius, f.offset);
  return radius > kBoundaryTolerance ? radius : 0.0;
}

double Q1(std::span<const Contact> contacts, const Q1Config& cfg, double penetration) {
  if (contacts.empty()) return 0.0;
  if (penetration > cfg.penetration_override) return 0.0;
  std::vector<Wrench> wrenches;
  for (const Contact& c : contacts) {
    const auto edges = ConeWrenches(c, cfg);
    wrenches.insert(wrenches.end(), edges.begin(), edges.end());
  }
  return Q1FromWrenches(wrenches);
}

double PenetrationDepthCm(const HandModel& hand, const Posed& posed,
                          std::span<const SurfaceSample> object_samples) {
  if (object_samples.empty()) throw Error("penetration depth needs object samples");
  double deepest = 0.0;
  for (const SurfaceSample& s : object_samples) {
    deepest = std::max(deepest, DepthInsideHand(hand, posed, s.point).depth);
  }
  return 100.0 * deepest;
}

ValidityFlags Validate(double penetration_cm, int contact_count, double q1,
                       const ValidationConfig& cfg) {
  ValidityFlags flags;
  flags.penetration_ok = penetration_cm <= cfg.max_penetration_cm;
  flags.has_contacts = contact_count >= cfg.min_contacts;
  flags.q1_positive = q1 > 0.0;
  flags.valid = flags.penetration_ok && flags.has_contacts && flags.q1_positive;
  return flags;
}

EntropyResult JointEntropy(std::span<const VecX> samples, const VecX& lower,
                           const VecX& upper, int bins) {
  if (samples.empty()) throw Error("joint entropy needs at least one sample");
  if (bins < 2) throw Error("joint entropy needs at least 2 bins");
  const int d = static_cast<int>(lower.size());
  EntropyResult out;
  out.per_joint.assign(d, 0.0);
  std::vector<long> counts(bins);
  for (int j = 0; j < d; ++j) {
    std::fill(counts.begin(), counts.end(), 0);
    const double width = upper[j] - lower[j];
    for (const VecX& s : samples) {
      if (s.size() != d) throw Error("joint vector length does not match the hand");
      const double u = (s[j] - lower[j]) / width;
      const long bin = std::clamp(static_cast<long>(std::floor(u * bins)), 0L,
                                  static_cast<long>(bins - 1));
      ++counts[bin];
    }
    double h = 0.0;
    const double n = static_cast<double>(samples.size());
    for (long c : counts) {
      if (c == 0) continue;
      const double p = c / n;
      h -= p * std::log2(p);
    }
    out.per_joint[j] = h;
  }
  if (d > 0) {
    for (double h : out.per_joint) out.mean += h;
    out.mean /= d;
    double var = 0.0;
    for (double h : out.per_joint) var += (h - out.mean) * (h - out.mean);
    out.stddev = std::sqrt(var / d);
  }
  return out;
}

GraspEvaluator::GraspEvaluator(const HandModel& hand, Q1Config q1,
                               ValidationConfig validation)
    : hand_(&hand), q1_(q1), validation_(validation) {
  q1_.Validate();
  Rng rng = MakeRng(kHandSampleSeed);
  samples_ = SampleHandSurface(hand, q1_.hand_samples_per_link, rng);
}

GraspQuality GraspEvaluator::Evaluate(const GraspObject& object,
                                      const GraspPose& pose) const {
  GraspQuality out;
  const Posed posed = ForwardKinematics(*hand_, pose);
  out.penetration_cm = PenetrationDepthCm(*hand_, posed, object.samples);
  out.contacts =
      FindContacts(*hand_, posed, object.mesh, q1_.contact_threshold, samples_);
  out.q1 = Q1(out.contacts, q1_, out.penetration_cm / 100.0);
  out.flags = Validate(out.penetration_cm, static_cast<int>(out.contacts.size()),
                       out.q1, validation_);
  return out;
}

}  // namespace dexgrasp
