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

#ifndef DEXGRASP_OPTIMIZER_H_
#define DEXGRASP_OPTIMIZER_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "dexgrasp/dataset_io.h"
#include "dexgrasp/energy.h"
#include "dexgrasp/hand_model.h"
#include "dexgrasp/quality.h"
#include "dexgrasp/random.h"

namespace dexgrasp {

struct InitConfig {
  double inflate_offset = 0.2;                        // meters
  double cone_half_angle = std::numbers::pi / 6.0;    // radians
  double push_min = 0.0;                              // meters
  double push_max = 0.1;
  double theta_sigma_fraction = 0.1;                  // of each joint's range
  std::optional<double> fixed_roll;                   // radians; random when unset
};

enum class StepRule {
  kGradient,       // delta = -lr * g
  kRmsNormalized,  // delta = -lr * g / sqrt(EMA(g^2)), bias-corrected
};

struct OptimConfig {
  int iterations = 6000;
  double step_translation = 0.005;  // meters
  double step_rotation = 0.005;     // radians
  double step_joints = 0.01;        // radians
  double decay_factor = 0.5;
  int decay_interval = 2000;
  double resample_probability = 0.1;
  bool metropolis = false;
  double temperature = 1.0;
  int num_contacts = 4;
  StepRule step_rule = StepRule::kRmsNormalized;
  double rms_decay = 0.98;
  InitConfig init;

  void Validate() const;
};

struct GraspState {
  GraspPose pose;
  std::vector<int> contact_indices;
  EnergyBreakdown energy;
  int step = 0;
  Rng rng;
  bool failed = false;
  VecX grad_sq_avg;           // running second moment for kRmsNormalized
  Vec3 approach = Vec3::Zero();  // unjittered direction toward the object at init
};

// Evaluates the energy at a pose with a given contact selection.
using EnergyFunction =
    std::function<EnergyBreakdown(const GraspPose&, std::span<const int>)>;

EnergyFunction MakeEnergyFunction(const HandModel& hand, const GraspObject& object,
                                  const Weights& weights);

// Hand placement around an object: precomputes the inflated convex hull.
class Initializer {
 public:
  Initializer(const HandModel& hand, const GraspObject& object, InitConfig config);

  // Pose and contact selection only; the energy cache is left empty.
  GraspState Sample(Rng rng, int num_contacts) const;

  const TriMesh& inflated_hull() const { return inflated_hull_; }

 private:
  const HandModel* hand_;
  const GraspObject* object_;
  InitConfig config_;
  TriMesh inflated_hull_;
};

GraspState InitGrasp(const HandModel& hand, const GraspObject& object, Rng rng,
                     const OptimConfig& config, const Weights& weights = {});

// One optimization step. `num_candidates` bounds contact re-sampling.
void Step(GraspState& state, const EnergyFunction& energy, const OptimConfig& config,
          int num_candidates);
void Step(GraspState& state, const HandModel& hand, const GraspObject& object,
          const Weights& weights, const OptimConfig& config);

struct BatchOptions {
  OptimConfig optim;
  Weights weights;
  Q1Config q1;
  ValidationConfig validation;
  int workers = 1;
  // Called after each finished grasp from worker threads; order unspecified.
  std::function<void(int done, int total)> progress;
};

// B independent optimizations with per-grasp seed `master_seed ^ index`.
// Results are in index order and do not depend on the worker count.
std::vector<GraspRecord> RunBatch(const HandModel& hand, const GraspObject& object,
                                  int batch_size, const BatchOptions& options,
                                  uint64_t master_seed);

}  // namespace dexgrasp

#endif  // DEXGRASP_OPTIMIZER_H_
