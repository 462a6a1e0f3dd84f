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

#include "dexgrasp/hand_model.h"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "dexgrasp/signed_distance.h"
#include "testing/fixtures.h"

namespace dexgrasp {
namespace {

namespace fs = std::filesystem;
namespace fx = ::dexgrasp::testing;

// A palm box with a chain of `joints` unit boxes along +x, one revolute
// joint per link about z.
void WriteChain(const fs::path& dir, int joints, double lower, double upper, double ref,
                const std::string& extra_joint_xml = "") {
  fs::create_directories(dir);
  SaveObj(MakeBox(Vec3(0, -0.01, -0.01), Vec3(0.05, 0.01, 0.01)), (dir / "seg.obj").string());
  std::ofstream urdf(dir / "hand.urdf");
  urdf << "<robot name=\"chain\">\n";
  for (int i = 0; i <= joints; ++i) {
    urdf << "<link name=\"l" << i << "\"><visual><geometry><mesh filename=\"seg.obj\"/>"
         << "</geometry></visual></link>\n";
  }
  for (int i = 0; i < joints; ++i) {
    urdf << "<joint name=\"j" << i << "\" type=\"revolute\"><parent link=\"l" << i
         << "\"/><child link=\"l" << i + 1 << "\"/><origin xyz=\"0.05 0 0\"/>"
         << "<axis xyz=\"0 0 1\"/><limit lower=\"" << lower << "\" upper=\"" << upper
         << "\"/></joint>\n";
  }
  urdf << extra_joint_xml << "</robot>\n";
  std::ofstream ann(dir / "ann.json");
  ann << "{\"theta_ref\": [";
  for (int i = 0; i < joints; ++i) ann << (i ? ", " : "") << ref;
  ann << "], \"contact_candidates\": [{\"link\": \"l" << joints
      << "\", \"point\": [0.05, 0, 0], \"normal\": [1, 0, 0]}]}\n";
}

HandModel LoadChain(const fs::path& dir) {
  return HandModel::Load((dir / "hand.urdf").string(), (dir / "ann.json").string());
}

GraspPose RandomPose(const HandModel& hand, Rng& rng) {
  GraspPose pose;
  pose.translation = Vec3(Uniform(rng, -0.1, 0.1), Uniform(rng, -0.1, 0.1), Uniform(rng, -0.1, 0.1));
  pose.rotation = RandomRotation(rng);
  pose.theta.resize(hand.num_dofs());
  for (int j = 0; j < hand.num_dofs(); ++j) {
    pose.theta[j] = Uniform(rng, hand.lower_limits()[j], hand.upper_limits()[j]);
  }
  return pose;
}

TEST(HandModelTest, MinimalChainHasOneDof) {
  const fs::path dir = fx::ScratchDir("chain1");
  WriteChain(dir, 1, -1.0, 1.0, 0.0);
  const HandModel hand = LoadChain(dir);
  EXPECT_EQ(hand.num_dofs(), 1);
  EXPECT_EQ(hand.num_links(), 2);
}

TEST(HandModelTest, TwentyTwoJointHand) {
  const fs::path dir = fx::ScratchDir("chain22");
  WriteChain(dir, 22, -1.0, 1.0, 0.0);
  EXPECT_EQ(LoadChain(dir).num_dofs(), 22);
}

TEST(HandModelTest, ThetaRefOutsideLimitsIsRejected) {
  const fs::path dir = fx::ScratchDir("chain_ref");
  WriteChain(dir, 1, -0.5, 0.5, 0.6);
  EXPECT_THROW(LoadChain(dir), Error);
}

TEST(HandModelTest, CycleIsRejected) {
  const fs::path dir = fx::ScratchDir("chain_cycle");
  WriteChain(dir, 2, -1.0, 1.0, 0.0,
             "<joint name=\"back\" type=\"fixed\"><parent link=\"l2\"/>"
             "<child link=\"l1\"/></joint>\n");
  EXPECT_THROW(LoadChain(dir), Error);
}

TEST(HandModelTest, MissingMeshAndUnknownLinkAreRejected) {
  const fs::path dir = fx::ScratchDir("chain_missing");
  WriteChain(dir, 1, -1.0, 1.0, 0.0);
  fs::remove(dir / "seg.obj");
  EXPECT_THROW(LoadChain(dir), Error);

  const fs::path dir2 = fx::ScratchDir("chain_unknown");
  WriteChain(dir2, 1, -1.0, 1.0, 0.0);
  std::ofstream(dir2 / "ann.json")
      << R"({"theta_ref": [0], "contact_candidates": [{"link": "nope", "point": [0,0,0], "normal": [1,0,0]}]})";
  EXPECT_THROW(LoadChain(dir2), Error);
}

TEST(HandModelTest, ThetaRefByJointName) {
  const HandModel& hand = fx::ToyHand();
  ASSERT_EQ(hand.num_dofs(), 6);
  for (const Joint& j : hand.joints()) {
    if (j.dof < 0) continue;
    const bool proximal = j.name.ends_with("joint0");
    EXPECT_EQ(hand.theta_ref()[j.dof], proximal ? -0.2 : 0.2) << j.name;
  }
}

TEST(HandModelTest, PlanarRotation) {
  const fs::path dir = fx::ScratchDir("chain_planar");
  WriteChain(dir, 1, -2.0, 2.0, 0.0);
  const HandModel hand = LoadChain(dir);
  GraspPose pose = hand.RestPose();
  pose.theta[0] = std::numbers::pi / 2;
  const Posed posed = ForwardKinematics(hand, pose);
  const Vec3 tip = posed.link_transforms[1] * Vec3(0.05, 0, 0);
  EXPECT_NEAR(tip.y(), 0.05, 1e-12);
  EXPECT_NEAR(tip.x(), 0.05, 1e-12);
}

TEST(HandModelTest, RestPoseComposesOrigins) {
  const HandModel& hand = fx::ToyHand();
  GraspPose pose = hand.RestPose();
  pose.theta.setZero();
  const Posed posed = ForwardKinematics(hand, pose);
  EXPECT_TRUE(posed.link_transforms[0].isApprox(Isometry::Identity(), 1e-15));
  for (const Joint& j : hand.joints()) {
    const Isometry expected = posed.link_transforms[j.parent_link] * j.origin;
    EXPECT_LE((posed.link_transforms[j.child_link].matrix() - expected.matrix()).norm(), 1e-12);
  }
}

TEST(HandModelTest, ChainConsistencyAtRandomAngles) {
  const HandModel& hand = fx::ToyHand();
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const GraspPose pose = RandomPose(hand, rng);
    const Posed posed = ForwardKinematics(hand, pose);
    Isometry root = Isometry::Identity();
    root.linear() = pose.rotation.toRotationMatrix();
    root.translation() = pose.translation;
    EXPECT_LE((posed.link_transforms[0].matrix() - root.matrix()).norm(), 1e-12);
    for (const Joint& j : hand.joints()) {
      Isometry rot = Isometry::Identity();
      if (j.dof >= 0) rot.linear() = Eigen::AngleAxisd(pose.theta[j.dof], j.axis).toRotationMatrix();
      const Isometry expected = posed.link_transforms[j.parent_link] * j.origin * rot;
      EXPECT_LE((posed.link_transforms[j.child_link].matrix() - expected.matrix()).norm(), 1e-12);
    }
  }
}

TEST(HandModelTest, TranslationShiftsEverything) {
  const HandModel& hand = fx::ToyHand();
  GraspPose pose = hand.RestPose();
  const Posed a = ForwardKinematics(hand, pose);
  pose.translation = Vec3(0.1, 0, 0);
  const Posed b = ForwardKinematics(hand, pose);
  std::vector<int> all(hand.contact_candidates().size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const auto ca = WorldCandidates(hand, a, all);
  const auto cb = WorldCandidates(hand, b, all);
  for (size_t i = 0; i < all.size(); ++i) {
    EXPECT_LE((cb[i].point - ca[i].point - Vec3(0.1, 0, 0)).norm(), 1e-15);
    EXPECT_LE((cb[i].normal - ca[i].normal).norm(), 1e-15);
  }
  const auto sa = WorldSpheres(hand, a);
  const auto sb = WorldSpheres(hand, b);
  ASSERT_EQ(sa.size(), hand.spen_spheres().size());
  for (size_t i = 0; i < sa.size(); ++i) {
    EXPECT_LE((sb[i].center - sa[i].center - Vec3(0.1, 0, 0)).norm(), 1e-15);
  }
}

TEST(HandModelTest, IdentityPoseCandidatesAndSpheres) {
  const HandModel& hand = fx::ToyHand();
  const GraspPose pose = hand.RestPose();
  const Posed posed = ForwardKinematics(hand, pose);
  std::vector<int> all(hand.contact_candidates().size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const auto world = WorldCandidates(hand, posed, all);
  for (size_t i = 0; i < all.size(); ++i) {
    const ContactCandidate& c = hand.contact_candidates()[i];
    EXPECT_LE((world[i].point - posed.link_transforms[c.link] * c.point).norm(), 1e-15);
  }
  const auto spheres = WorldSpheres(hand, posed);
  for (size_t i = 0; i < spheres.size(); ++i) {
    const SpenSphere& s = hand.spen_spheres()[i];
    EXPECT_LE((spheres[i].center - posed.link_transforms[s.link] * s.center).norm(), 1e-15);
  }
}

TEST(HandModelTest, RotationPreservesDistances) {
  const HandModel& hand = fx::ToyHand();
  Rng rng(67);
  GraspPose pose = RandomPose(hand, rng);
  pose.translation.setZero();
  pose.rotation.setIdentity();
  std::vector<int> all(hand.contact_candidates().size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const auto a = WorldCandidates(hand, ForwardKinematics(hand, pose), all);
  const Quat r = RandomRotation(rng);
  pose.rotation = r;
  const auto b = WorldCandidates(hand, ForwardKinematics(hand, pose), all);
  for (size_t i = 0; i < all.size(); ++i) {
    EXPECT_LE((b[i].point - r * a[i].point).norm(), 1e-12);
    for (size_t k = 0; k < all.size(); ++k) {
      EXPECT_NEAR((b[i].point - b[k].point).norm(), (a[i].point - a[k].point).norm(), 1e-9);
    }
  }
}

TEST(HandModelTest, JacobiansMatchFiniteDifferences) {
  const HandModel& hand = fx::ToyHand();
  Rng rng(71);
  std::vector<int> all(hand.contact_candidates().size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const GraspPose pose = RandomPose(hand, rng);
    const auto at = WorldCandidates(hand, ForwardKinematics(hand, pose), all);
    const auto spheres = WorldSpheres(hand, ForwardKinematics(hand, pose));
    const int n = pose.tangent_size();
    for (int k = 0; k < n; ++k) {
      VecX e = VecX::Zero(n);
      e[k] = h;
      const GraspPose plus = pose.Retract(e), minus = pose.Retract(-e);
      const auto cp = WorldCandidates(hand, ForwardKinematics(hand, plus), all);
      const auto cm = WorldCandidates(hand, ForwardKinematics(hand, minus), all);
      const auto sp = WorldSpheres(hand, ForwardKinematics(hand, plus));
      const auto sm = WorldSpheres(hand, ForwardKinematics(hand, minus));
      auto check = [&](const Vec3& fd, const Vec3& analytic) {
        const double scale = std::max(analytic.norm(), 1e-3);
        worst = std::max(worst, (fd - analytic).norm() / scale);
      };
      for (size_t i = 0; i < all.size(); ++i) {
        check((cp[i].point - cm[i].point) / (2 * h), at[i].jacobian.col(k));
      }
      for (size_t i = 0; i < spheres.size(); ++i) {
        check((sp[i].center - sm[i].center) / (2 * h), spheres[i].jacobian.col(k));
      }
    }
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(HandModelTest, LimitsAreNotClampedByKinematics) {
  const HandModel& hand = fx::ToyHand();
  GraspPose a = hand.RestPose();
  GraspPose b = a;
  b.theta[0] = hand.upper_limits()[0] + 1.0;
  a.theta[0] = hand.upper_limits()[0];
  const int link = hand.joints()[0].child_link;
  const Vec3 p = Vec3(0, 0, 0.05);
  EXPECT_GT((ForwardKinematics(hand, a).link_transforms[link] * p -
             ForwardKinematics(hand, b).link_transforms[link] * p).norm(), 0.01);
}

TEST(HandModelTest, HandSurfaceSamplesAreAreaWeightedAndOnSurface) {
  const TriMesh cube = MakeBox(Vec3::Constant(-0.5), Vec3::Constant(0.5));
  const HandModel one_link({{"cube", cube}}, {}, {{0, Vec3(0.5, 0, 0), Vec3::UnitX()}}, {},
                           VecX());
  Rng rng(73);
  GraspPose pose = one_link.RestPose();
  pose.translation = Vec3(1, 2, 3);
  pose.rotation = RandomRotation(rng);
  const Posed posed = ForwardKinematics(one_link, pose);
  const auto samples = HandSurface(one_link, posed, 6000, rng);
  ASSERT_EQ(samples.size(), 6000u);
  const TriMesh world = cube.Transformed(posed.link_transforms[0]);
  std::map<int, int> sides;
  for (const SurfaceSample& s : samples) {
    EXPECT_LE(std::abs(SignedDistance(world, s.point).distance), 1e-6);
    const Vec3 local = posed.link_transforms[0].linear().transpose() * s.normal;
    int axis;
    local.cwiseAbs().maxCoeff(&axis);
    sides[2 * axis + (local[axis] > 0)]++;
  }
  ASSERT_EQ(sides.size(), 6u);
  for (const auto& [side, count] : sides) EXPECT_NEAR(count / 6000.0, 1.0 / 6.0, 0.02);

  Rng r1(5), r2(5);
  const auto s1 = HandSurface(one_link, posed, 50, r1);
  const auto s2 = HandSurface(one_link, posed, 50, r2);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(s1[i].point, s2[i].point);
}

TEST(HandModelTest, AdjacencyFollowsTheTree) {
  const HandModel& hand = fx::ToyHand();
  const int palm = hand.LinkIndex("palm");
  const int p0 = hand.LinkIndex("finger0_proximal");
  const int d0 = hand.LinkIndex("finger0_distal");
  const int d1 = hand.LinkIndex("finger1_distal");
  EXPECT_EQ(palm, 0);
  EXPECT_TRUE(hand.LinksAdjacent(palm, p0));
  EXPECT_TRUE(hand.LinksAdjacent(p0, d0));
  EXPECT_TRUE(hand.LinksAdjacent(d0, d0));
  EXPECT_FALSE(hand.LinksAdjacent(palm, d0));
  EXPECT_FALSE(hand.LinksAdjacent(d0, d1));
  EXPECT_EQ(hand.link_dofs(d0).size(), 2u);
}

}  // namespace
}  // namespace dexgrasp
