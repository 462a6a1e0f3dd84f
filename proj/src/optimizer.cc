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

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "dexgrasp/convex_hull.h"
#include "dexgrasp/signed_distance.h"

namespace dexgrasp {
namespace {

std::vector<int> SampleWithoutReplacement(Rng& rng, int population, int count) {
  std::vector<int> pool(population);
  for (int i = 0; i < population; ++i) pool[i] = i;
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

// Replaces one selected index by a uniformly chosen unselected candidate.
void ResampleOneContact(Rng& rng, std::vector<int>& indices, int num_candidates) {
  const int n = static_cast<int>(indices.size());
  if (n == 0 || num_candidates <= n) return;
  const int slot = std::uniform_int_distribution<int>(0, n - 1)(rng);
  int rank = std::uniform_int_distribution<int>(0, num_candidates - n - 1)(rng);
  std::vector<int> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  int candidate = rank;
  for (int used : sorted) {
    if (used <= candidate) ++candidate;
  }
  indices[slot] = candidate;
}

}  // namespace

void OptimConfig::Validate() const {
  if (iterations < 0) throw Error("iterations must be >= 0");
  if (!(step_translation > 0.0) || !(step_rotation > 0.0) || !(step_joints > 0.0)) {
    throw Error("step sizes must be positive");
  }
  if (!(resample_probability >= 0.0 && resample_probability <= 1.0)) {
    throw Error("resample probability must lie in [0, 1]");
  }
  if (!(decay_factor > 0.0) || decay_interval < 1) throw Error("bad step decay schedule");
  if (metropolis && !(temperature > 0.0)) throw Error("temperature must be positive");
  if (num_contacts < 1) throw Error("num_contacts must be >= 1");
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) throw Error("rms_decay must lie in [0, 1)");
  if (init.cone_half_angle < 0.0 || init.push_min < 0.0 || init.push_max < init.push_min) {
    throw Error("bad initialization ranges");
  }
  if (init.theta_sigma_fraction < 0.0) throw Error("theta jitter must be >= 0");
}

EnergyFunction MakeEnergyFunction(const HandModel& hand, const GraspObject& object,
                                  const Weights& weights) {
  return [&hand, &object, weights](const GraspPose& pose, std::span<const int> idx) {
    return TotalEnergy(hand, object, pose, idx, weights);
  };
}

Initializer::Initializer(const HandModel& hand, const GraspObject& object,
                         InitConfig config)
    : hand_(&hand), object_(&object), config_(config) {
  const TriMesh hull = ConvexHull3(object.mesh.vertices());
  inflated_hull_ = InflateHull(hull, config_.inflate_offset);
}

GraspState Initializer::Sample(Rng rng, int num_contacts) const {
  const HandModel& hand = *hand_;
  const int candidates = static_cast<int>(hand.contact_candidates().size());
  if (num_contacts > candidates) {
    throw Error("hand has fewer contact candidates than contacts requested");
  }
  GraspState state;

  // Opened fingers: jitter the canonical pose inside the limits.
  state.pose.theta = hand.theta_ref();
  for (int j = 0; j < hand.num_dofs(); ++j) {
    const double lo = hand.lower_limits()[j], hi = hand.upper_limits()[j];
    state.pose.theta[j] = TruncatedNormal(rng, hand.theta_ref()[j],
                                          config_.theta_sigma_fraction * (hi - lo), lo, hi);
  }

  // Palm toward the object from a point on the inflated hull.
  const SurfaceSample start = SampleSurface(inflated_hull_, 1, rng).front();
  const ClosestPoint target = FindClosestPoint(object_->mesh, start.point);
  Vec3 approach = target.point - start.point;
  approach = approach.norm() > 0.0 ? approach.normalized() : Vec3(-start.point.normalized());
  const Vec3 facing = RandomDirectionInCone(rng, approach, config_.cone_half_angle);
  const double push = Uniform(rng, config_.push_min,
                              std::nextafter(config_.push_max, config_.push_max + 1.0));
  const double roll = config_.fixed_roll
                          ? *config_.fixed_roll
                          : Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const Quat align = Quat::FromTwoVectors(hand.palm_axis(), facing);
  state.pose.rotation = (Quat(Eigen::AngleAxisd(roll, facing)) * align).normalized();
  state.pose.translation = start.point - push * facing;
  state.approach = approach;

  state.contact_indices = SampleWithoutReplacement(rng, candidates, num_contacts);
  state.rng = rng;
  return state;
}

GraspState InitGrasp(const HandModel& hand, const GraspObject& object, Rng rng,
                     const OptimConfig& config, const Weights& weights) {
  config.Validate();
  const Initializer init(hand, object, config.init);
  GraspState state = init.Sample(std::move(rng), config.num_contacts);
  state.energy = TotalEnergy(hand, object, state.pose, state.contact_indices, weights);
  return state;
}

void Step(GraspState& state, const EnergyFunction& energy, const OptimConfig& config,
          int num_candidates) {
  if (state.failed) return;
  const VecX& grad = state.energy.grad;
  if (!grad.allFinite() || !std::isfinite(state.energy.total)) {
    state.failed = true;
    return;
  }
  const int n = static_cast<int>(grad.size());
  const double decay =
      std::pow(config.decay_factor, state.step / config.decay_interval);

  VecX direction = grad;
  if (config.step_rule == StepRule::kRmsNormalized) {
    if (state.grad_sq_avg.size() != n) state.grad_sq_avg = VecX::Zero(n);
    state.grad_sq_avg = config.rms_decay * state.grad_sq_avg +
                        (1.0 - config.rms_decay) * grad.cwiseAbs2();
    const double correction = 1.0 - std::pow(config.rms_decay, state.step + 1);
    const VecX rms = (state.grad_sq_avg / correction).cwiseSqrt();
    direction = grad.cwiseQuotient((rms.array() + 1e-12).matrix());
  }
  VecX delta(n);
  delta.head<3>() = -config.step_translation * decay * direction.head<3>();
  delta.segment<3>(3) = -config.step_rotation * decay * direction.segment<3>(3);
  delta.tail(n - kRigidDofs) = -config.step_joints * decay * direction.tail(n - kRigidDofs);

  const GraspPose old_pose = state.pose;
  const std::vector<int> old_indices = state.contact_indices;
  state.pose = state.pose.Retract(delta);
  if (Uniform(state.rng, 0.0, 1.0) < config.resample_probability) {
    ResampleOneContact(state.rng, state.contact_indices, num_candidates);
  }
  EnergyBreakdown next = energy(state.pose, state.contact_indices);
  if (config.metropolis) {
    const double accept =
        std::min(1.0, std::exp(-(next.total - state.energy.total) / config.temperature));
    if (!(Uniform(state.rng, 0.0, 1.0) < accept)) {
      state.pose = old_pose;
      state.contact_indices = old_indices;
      ++state.step;
      return;
    }
  }
  state.energy = std::move(next);
  ++state.step;
}

void Step(GraspState& state, const HandModel& hand, const GraspObject& object,
          const Weights& weights, const OptimConfig& config) {
  Step(state, MakeEnergyFunction(hand, object, weights), config,
       static_cast<int>(hand.contact_candidates().size()));
}

std::vector<GraspRecord> RunBatch(const HandModel& hand, const GraspObject& object,
                                  int batch_size, const BatchOptions& options,
                                  uint64_t master_seed) {
  if (batch_size < 1) throw Error("batch size must be >= 1");
  options.optim.Validate();
  const Initializer init(hand, object, options.optim.init);
  const GraspEvaluator evaluator(hand, options.q1, options.validation);
  const EnergyFunction energy = MakeEnergyFunction(hand, object, options.weights);
  const int num_candidates = static_cast<int>(hand.contact_candidates().size());

  RecordMeta meta;
  meta.weights = options.weights;
  meta.q1_config = options.q1;
  meta.iterations = options.optim.iterations;
  meta.master_seed = master_seed;
  meta.penetration_samples = static_cast<int>(object.samples.size());

  std::vector<GraspRecord> records(batch_size);
  auto run_one = [&](int index) {
    const uint64_t seed = master_seed ^ static_cast<uint64_t>(index);
    GraspState state = init.Sample(MakeRng(seed), options.optim.num_contacts);
    state.energy = energy(state.pose, state.contact_indices);
    for (int it = 0; it < options.optim.iterations && !state.failed; ++it) {
      Step(state, energy, options.optim, num_candidates);
    }
    GraspRecord& r = records[index];
    r.object_id = object.id;
    r.scale = object.scale;
    r.seed = seed;
    r.meta = meta;
    r.SetPose(state.pose);
    if (state.failed || !state.energy.grad.allFinite()) {
      // Keep the record but mark it invalid; energies reset to finite values.
      r.energy = {};
      r.flags = {};
      return;
    }
    r.SetEnergy(state.energy);
    const GraspQuality quality = evaluator.Evaluate(object, state.pose);
    r.q1 = quality.q1;
    r.penetration_cm = quality.penetration_cm;
    r.flags = quality.flags;
  };

  const int workers = std::clamp(options.workers, 1, batch_size);
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (int i = next++; i < batch_size; i = next++) {
      run_one(i);
      const int finished = ++done;
      if (options.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        options.progress(finished, batch_size);
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  return records;
}

}  // namespace dexgrasp
