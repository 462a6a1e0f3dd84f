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

#include "dexgrasp/optimizer.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "dexgrasp/signed_distance.h"
#include "testing/fixtures.h"

namespace dexgrasp {
namespace {

namespace fx = ::dexgrasp::testing;

GraspState StateAt(const GraspPose& pose, std::vector<int> indices) {
  GraspState s;
  s.pose = pose;
  s.contact_indices = std::move(indices);
  s.rng = Rng(5);
  return s;
}

// ||T - T*||^2 with every other coordinate flat.
EnergyFunction Quadratic(const Vec3& target, int tangent_size) {
  return [target, tangent_size](const GraspPose& pose, std::span<const int>) {
    EnergyBreakdown e;
    const Vec3 d = pose.translation - target;
    e.total = d.squaredNorm();
    e.grad = VecX::Zero(tangent_size);
    e.grad.head<3>() = 2.0 * d;
    return e;
  };
}

EnergyFunction Flat(int tangent_size) {
  return [tangent_size](const GraspPose&, std::span<const int>) {
    EnergyBreakdown e;
    e.grad = VecX::Zero(tangent_size);
    return e;
  };
}

OptimConfig PlainGradient(double lr) {
  OptimConfig cfg;
  cfg.step_rule = StepRule::kGradient;
  cfg.step_translation = lr;
  cfg.decay_interval = 1 << 30;
  cfg.resample_probability = 0.0;
  return cfg;
}

TEST(StepTest, QuadraticConvergesAtGradientDescentRate) {
  const double lr = 0.1;
  const Vec3 target(0.3, -0.2, 0.1);
  GraspPose pose;
  pose.translation = Vec3(1.0, 1.0, -1.0);
  const EnergyFunction energy = Quadratic(target, pose.tangent_size());
  GraspState state = StateAt(pose, {});
  state.energy = energy(state.pose, state.contact_indices);
  const OptimConfig cfg = PlainGradient(lr);
  double err = (state.pose.translation - target).norm();
  for (int it = 0; it < 50; ++it) {
    Step(state, energy, cfg, 0);
    const double next = (state.pose.translation - target).norm();
    EXPECT_NEAR(next / err, 1.0 - 2.0 * lr, 1e-9);
    err = next;
  }
  EXPECT_LT(err, 1e-4);
}

TEST(StepTest, EnergyNonIncreasingOnConvexEnergy) {
  GraspPose pose;
  pose.translation = Vec3(0.5, 0.0, 0.0);
  const EnergyFunction energy = Quadratic(Vec3::Zero(), pose.tangent_size());
  for (StepRule rule : {StepRule::kGradient, StepRule::kRmsNormalized}) {
    GraspState state = StateAt(pose, {});
    state.energy = energy(state.pose, state.contact_indices);
    OptimConfig cfg = PlainGradient(0.01);
    cfg.step_rule = rule;
    cfg.decay_interval = 100;
    double previous = state.energy.total;
    for (int it = 0; it < 1000; ++it) {
      Step(state, energy, cfg, 0);
      EXPECT_LE(state.energy.total, previous + 1e-15);
      previous = state.energy.total;
    }
  }
}

TEST(StepTest, ZeroGradientIsFixedPoint) {
  const HandModel& hand = fx::ToyHand();
  GraspPose pose = hand.RestPose();
  pose.translation = Vec3(0.1, 0.2, 0.3);
  pose.rotation = Quat(Eigen::AngleAxisd(0.4, Vec3(1, 2, 3).normalized()));
  const EnergyFunction energy = Flat(pose.tangent_size());
  for (StepRule rule : {StepRule::kGradient, StepRule::kRmsNormalized}) {
    GraspState state = StateAt(pose, {0, 1, 2, 3});
    state.energy = energy(state.pose, state.contact_indices);
    OptimConfig cfg = PlainGradient(0.1);
    cfg.step_rule = rule;
    for (int it = 0; it < 10; ++it) Step(state, energy, cfg, 26);
    EXPECT_EQ(state.pose.translation, pose.translation);
    EXPECT_EQ(state.pose.theta, pose.theta);
    EXPECT_NEAR(state.pose.rotation.angularDistance(pose.rotation), 0.0, 1e-12);
    EXPECT_EQ(state.contact_indices, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(state.step, 10);
  }
}

TEST(StepTest, ResampleChangesExactlyOneIndex) {
  const int candidates = 140;
  GraspPose pose;
  const EnergyFunction energy = Flat(pose.tangent_size());
  GraspState state = StateAt(pose, {3, 50, 77, 139});
  state.energy = energy(state.pose, state.contact_indices);
  OptimConfig cfg = PlainGradient(0.1);
  cfg.resample_probability = 1.0;
  for (int it = 0; it < 2000; ++it) {
    const std::vector<int> before = state.contact_indices;
    Step(state, energy, cfg, candidates);
    int changed = 0;
    for (size_t k = 0; k < before.size(); ++k) changed += before[k] != state.contact_indices[k];
    ASSERT_EQ(changed, 1);
    const std::set<int> unique(state.contact_indices.begin(), state.contact_indices.end());
    ASSERT_EQ(unique.size(), before.size());
    for (int i : state.contact_indices) ASSERT_TRUE(i >= 0 && i < candidates);
    for (int i : state.contact_indices) {
      // The new index was not selected before the step.
      if (std::find(before.begin(), before.end(), i) == before.end()) {
        EXPECT_EQ(std::count(before.begin(), before.end(), i), 0);
      }
    }
  }
}

TEST(StepTest, QuaternionStaysUnitOnRealEnergy) {
  const HandModel& hand = fx::ToyHand();
  const GraspObject object = PrepareObject("cube", 1.0, fx::CubeFixture(), 11, 512);
  OptimConfig cfg;
  cfg.iterations = 200;
  GraspState state = InitGrasp(hand, object, Rng(3), cfg);
  for (int it = 0; it < cfg.iterations; ++it) {
    Step(state, hand, object, Weights{}, cfg);
    ASSERT_NEAR(state.pose.rotation.norm(), 1.0, 1e-9);
    for (int j = 0; j < hand.num_dofs(); ++j) ASSERT_TRUE(std::isfinite(state.pose.theta[j]));
  }
  EXPECT_FALSE(state.failed);
}

TEST(StepTest, NonFiniteGradientFlagsFailure) {
  GraspPose pose;
  GraspState state = StateAt(pose, {});
  const EnergyFunction energy = [](const GraspPose& p, std::span<const int>) {
    EnergyBreakdown e;
    e.grad = VecX::Zero(p.tangent_size());
    e.grad[0] = std::numeric_limits<double>::quiet_NaN();
    return e;
  };
  state.energy = energy(state.pose, state.contact_indices);
  Step(state, energy, PlainGradient(0.1), 0);
  EXPECT_TRUE(state.failed);
  EXPECT_EQ(state.pose.translation, pose.translation);
}

TEST(OptimConfigTest, RejectsBadValues) {
  OptimConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.resample_probability = 1.5;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.step_joints = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.iterations = -1;
  EXPECT_THROW(cfg.Validate(), Error);
}

class InitTest : public ::testing::Test {
 protected:
  static const GraspObject& UnitSphere() {
    static const GraspObject object =
        PrepareObject("unit", 1.0, MakeIcosphere(1.0, 5), 1, 256);
    return object;
  }
};

TEST_F(InitTest, StartsOnInflatedSphereHullFacingCenter) {
  const HandModel& hand = fx::ToyHand();
  InitConfig cfg;
  cfg.push_min = cfg.push_max = 0.0;
  const Initializer init(hand, UnitSphere(), cfg);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const GraspState s = init.Sample(Rng(seed), 4);
    const Vec3 p = s.pose.translation;
    EXPECT_GE(p.norm(), 1.195);
    EXPECT_LE(p.norm(), 1.205);
    // The tessellated sphere bends the nearest-point direction slightly.
    EXPECT_GT(s.approach.dot(-p.normalized()), std::cos(0.03));
  }
}

TEST_F(InitTest, ZeroJitterAlignsPalmExactly) {
  const HandModel& hand = fx::ToyHand();
  InitConfig cfg;
  cfg.cone_half_angle = 0.0;
  cfg.push_min = cfg.push_max = 0.0;
  cfg.fixed_roll = 0.3;
  const Initializer init(hand, UnitSphere(), cfg);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const GraspState s = init.Sample(Rng(seed), 4);
    const Vec3 palm = s.pose.rotation * hand.palm_axis();
    const ClosestPoint target = FindClosestPoint(UnitSphere().mesh, s.pose.translation);
    const Vec3 expected = (target.point - s.pose.translation).normalized();
    EXPECT_NEAR((palm - expected).norm(), 0.0, 1e-9);
  }
}

TEST_F(InitTest, InvariantsHold) {
  const HandModel& hand = fx::ToyHand();
  const GraspObject object = PrepareObject("sphere", 1.0, fx::SphereFixture(), 2, 256);
  InitConfig cfg;
  const Initializer init(hand, object, cfg);
  for (uint64_t seed = 0; seed < 300; ++seed) {
    const GraspState s = init.Sample(MakeRng(seed), 4);
    const Vec3 palm = s.pose.rotation * hand.palm_axis();
    EXPECT_LE(std::acos(std::clamp(palm.dot(s.approach), -1.0, 1.0)),
              cfg.cone_half_angle + 1e-9);
    for (int j = 0; j < hand.num_dofs(); ++j) {
      EXPECT_GE(s.pose.theta[j], hand.lower_limits()[j]);
      EXPECT_LE(s.pose.theta[j], hand.upper_limits()[j]);
    }
    EXPECT_GE(SignedDistance(object.mesh, s.pose.translation).distance, 0.0);
    const std::set<int> unique(s.contact_indices.begin(), s.contact_indices.end());
    EXPECT_EQ(unique.size(), 4u);
    EXPECT_NEAR(s.pose.rotation.norm(), 1.0, 1e-12);
  }
}

TEST_F(InitTest, DeterministicForSeed) {
  const HandModel& hand = fx::ToyHand();
  const Initializer init(hand, UnitSphere(), InitConfig{});
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const GraspState a = init.Sample(MakeRng(seed), 4);
    const GraspState b = init.Sample(MakeRng(seed), 4);
    EXPECT_EQ(a.pose.translation, b.pose.translation);
    EXPECT_EQ(a.pose.rotation.coeffs(), b.pose.rotation.coeffs());
    EXPECT_EQ(a.pose.theta, b.pose.theta);
    EXPECT_EQ(a.contact_indices, b.contact_indices);
  }
}

TEST_F(InitTest, TooManyContactsThrows) {
  const Initializer init(fx::ToyHand(), UnitSphere(), InitConfig{});
  EXPECT_THROW(init.Sample(Rng(1), 27), Error);
}

BatchOptions SmallBatch(int iterations, int workers) {
  BatchOptions opt;
  opt.optim.iterations = iterations;
  opt.q1.hand_samples_per_link = 64;
  opt.workers = workers;
  return opt;
}

TEST(RunBatchTest, ZeroIterationsEvaluatesInitialState) {
  const HandModel& hand = fx::ToyHand();
  const GraspObject object = PrepareObject("cube", 1.0, fx::CubeFixture(), 4, 512);
  const BatchOptions opt = SmallBatch(0, 1);
  const uint64_t master = 1234;
  const std::vector<GraspRecord> records = RunBatch(hand, object, 1, opt, master);
  ASSERT_EQ(records.size(), 1u);
  const GraspRecord& r = records[0];
  EXPECT_EQ(r.seed, master ^ 0u);

  const Initializer init(hand, object, opt.optim.init);
  const GraspState s = init.Sample(MakeRng(master), opt.optim.num_contacts);
  const EnergyBreakdown e =
      TotalEnergy(hand, object, s.pose, s.contact_indices, opt.weights);
  EXPECT_EQ(r.Pose().translation, s.pose.translation);
  EXPECT_EQ(r.energy.total, e.total);
  EXPECT_EQ(r.energy.fc, e.fc);
  const GraspEvaluator evaluator(hand, opt.q1, opt.validation);
  const GraspQuality q = evaluator.Evaluate(object, s.pose);
  EXPECT_EQ(r.q1, q.q1);
  EXPECT_EQ(r.penetration_cm, q.penetration_cm);
  EXPECT_EQ(r.flags, q.flags);
  EXPECT_EQ(r.meta.iterations, 0);
  EXPECT_EQ(r.meta.master_seed, master);
}

TEST(RunBatchTest, DeterministicAcrossRerunsAndWorkers) {
  const HandModel& hand = fx::ToyHand();
  const GraspObject object = PrepareObject("cube", 1.0, fx::CubeFixture(), 4, 512);
  const auto a = RunBatch(hand, object, 8, SmallBatch(30, 1), 77);
  const auto b = RunBatch(hand, object, 8, SmallBatch(30, 1), 77);
  const auto c = RunBatch(hand, object, 8, SmallBatch(30, 4), 77);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  const auto d = RunBatch(hand, object, 8, SmallBatch(30, 1), 78);
  EXPECT_NE(a, d);
}

TEST(RunBatchTest, ReportsProgressAndRejectsEmptyBatch) {
  const HandModel& hand = fx::ToyHand();
  const GraspObject object = PrepareObject("cube", 1.0, fx::CubeFixture(), 4, 512);
  BatchOptions opt = SmallBatch(2, 3);
  std::atomic<int> calls{0};
  opt.progress = [&](int, int total) {
    EXPECT_EQ(total, 5);
    ++calls;
  };
  EXPECT_EQ(RunBatch(hand, object, 5, opt, 1).size(), 5u);
  EXPECT_EQ(calls.load(), 5);
  EXPECT_THROW(RunBatch(hand, object, 0, opt, 1), Error);
}

TEST(TruncatedNormalTest, Properties) {
  Rng rng(9);
  EXPECT_EQ(TruncatedNormal(rng, 0.3, 0.0, 0.0, 1.0), 0.3);
  EXPECT_EQ(TruncatedNormal(rng, 2.0, 0.0, 0.0, 1.0), 1.0);
  // Far tail: rejection fails and the inverse-CDF fallback must stay in range.
  for (int i = 0; i < 1000; ++i) {
    const double x = TruncatedNormal(rng, 0.0, 0.01, 0.5, 0.6);
    ASSERT_GE(x, 0.5);
    ASSERT_LE(x, 0.6);
  }
}

}  // namespace
}  // namespace dexgrasp
