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

// Shared fixtures and independent oracles for tests.

#ifndef DEXGRASP_TESTS_TESTING_FIXTURES_H_
#define DEXGRASP_TESTS_TESTING_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dexgrasp/hand_model.h"
#include "dexgrasp/mesh.h"
#include "dexgrasp/random.h"
#include "dexgrasp/types.h"

namespace dexgrasp::testing {

struct ToyHandPaths {
  std::filesystem::path urdf;
  std::filesystem::path annotations;
};

// Writes a three-finger, six-joint hand (URDF, OBJ link meshes and an
// annotation file) into `dir`.
ToyHandPaths WriteToyHand(const std::filesystem::path& dir);

// The toy hand loaded through the URDF path, cached per process.
const HandModel& ToyHand();

// Sphere of radius 0.08 and cube of edge 0.1, both centered at the origin.
TriMesh SphereFixture();
TriMesh CubeFixture();

// Fresh empty directory under the system temp dir.
std::filesystem::path ScratchDir(const std::string& name);

// Inside test by counting crossings of a ray against every triangle.
bool RayParityInside(const TriMesh& mesh, const Vec3& query, Rng& rng);

// min over unit u of max_i u.w_i, estimated from `directions` random samples
// followed by local random search around the best ones. Clamped at zero.
double SupportFunctionQ1(std::span<const Wrench> wrenches, int directions, uint64_t seed);

// Exact Q1 by enumerating every 6-subset that spans a supporting hyperplane.
// Only practical for a few dozen wrenches.
double BruteForceQ1(std::span<const Wrench> wrenches);

}  // namespace dexgrasp::testing

#endif  // DEXGRASP_TESTS_TESTING_FIXTURES_H_
