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

#ifndef DEXGRASP_RANDOM_H_
#define DEXGRASP_RANDOM_H_

#include <cstdint>
#include <random>

#include "dexgrasp/types.h"

namespace dexgrasp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby integer seeds.
uint64_t MixSeed(uint64_t value);

inline Rng MakeRng(uint64_t seed) { return Rng(MixSeed(seed)); }

double Uniform(Rng& rng, double lo, double hi);
double StandardNormal(Rng& rng);

// Normal(mean, sigma) conditioned on [lo, hi]. Rejection sampling, switching
// to inverse-CDF sampling after 100 rejections.
double TruncatedNormal(Rng& rng, double mean, double sigma, double lo, double hi);

Vec3 RandomUnitVector(Rng& rng);
Quat RandomRotation(Rng& rng);

// Uniform direction in the cone of the given half-angle around `axis`
// (uniform with respect to solid angle).
Vec3 RandomDirectionInCone(Rng& rng, const Vec3& axis, double half_angle);

// Some unit vector orthogonal to `v`.
Vec3 AnyOrthogonal(const Vec3& v);

}  // namespace dexgrasp

#endif  // DEXGRASP_RANDOM_H_
