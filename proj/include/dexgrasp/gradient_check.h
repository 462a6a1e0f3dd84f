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

#ifndef DEXGRASP_GRADIENT_CHECK_H_
#define DEXGRASP_GRADIENT_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dexgrasp/energy.h"
#include "dexgrasp/hand_model.h"

namespace dexgrasp {

struct GradientCheckOptions {
  int states = 20;
  double step = 1e-6;
  double tolerance = 1e-3;
  // Test hook: lets a test corrupt an analytic gradient before comparison.
  std::function<void(std::string_view term, VecX& grad)> tamper;
};

struct TermCheck {
  std::string name;
  double worst_relative_error = 0.0;
  int checked = 0;   // states compared
  int active = 0;    // of those, states where the term was nonzero
  int skipped = 0;   // states next to a kink of this term
};

struct GradientReport {
  std::vector<TermCheck> terms;
  double tolerance = 0.0;
  bool passed = false;
  std::string Format() const;
};

// Compares the analytic pose gradients of the five energy terms with central
// differences at random hand placements around the object. The force
// closure term is differentiated with contact normals held fixed. A state
// is treated as a kink neighborhood for a term when central differences at
// `step` and `step / 4` disagree.
GradientReport CheckGradients(const HandModel& hand, const GraspObject& object,
                              uint64_t seed, const GradientCheckOptions& options = {});

// Random pose near the object used by the gradient suite: the palm faces the
// object center, joints are drawn from slightly beyond their limits, and
// every other state curls the fingers.
GraspPose RandomProbePose(const HandModel& hand, const GraspObject& object, Rng& rng,
                          bool curled);

}  // namespace dexgrasp

#endif  // DEXGRASP_GRADIENT_CHECK_H_
