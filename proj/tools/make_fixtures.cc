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

// Writes the toy hand, two test objects and an example run config.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "dexgrasp/cli.h"
#include "testing/fixtures.h"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  const auto hand = dexgrasp::testing::WriteToyHand(root / "toy_hand");
  fs::create_directories(root / "objects");
  dexgrasp::SaveObj(dexgrasp::testing::SphereFixture(), (root / "objects" / "sphere.obj").string());
  dexgrasp::SaveObj(dexgrasp::testing::CubeFixture(), (root / "objects" / "cube.obj").string());

  dexgrasp::cli::RunConfig config;
  config.hand_description = "toy_hand/toy_hand.urdf";
  config.hand_annotations = "toy_hand/annotations.json";
  config.objects = "objects";
  config.scales = {0.08};
  config.batch_size = 16;
  config.optim.iterations = 1000;
  config.optim.decay_interval = 200;
  config.output = "out/dataset.jsonl";
  std::ofstream(root / "example_config.json") << config.ToJsonText();
  std::cout << "wrote " << hand.urdf.string() << ", objects and example_config.json under "
            << root.string() << "\n";
  return 0;
}
