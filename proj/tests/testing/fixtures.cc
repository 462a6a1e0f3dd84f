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

#include "testing/fixtures.h"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

namespace dexgrasp::testing {
namespace {

namespace fs = std::filesystem;

constexpr double kFingerRadius = 0.045;
constexpr double kProximalLength = 0.07;
constexpr double kDistalLength = 0.06;
constexpr double kHalfWidth = 0.01;

std::string Triple(double a, double b, double c) {
  std::ostringstream s;
  s.precision(17);
  s << a << " " << b << " " << c;
  return s.str();
}

std::string LinkXml(const std::string& name, const std::string& mesh) {
  return "  <link name=\"" + name + "\">\n    <collision>\n      <geometry>\n" +
         "        <mesh filename=\"meshes/" + mesh + "\"/>\n" +
         "      </geometry>\n    </collision>\n  </link>\n";
}

std::string JointXml(const std::string& name, const std::string& parent,
                     const std::string& child, const std::string& xyz, const std::string& rpy,
                     double lower, double upper) {
  std::ostringstream s;
  s << "  <joint name=\"" << name << "\" type=\"revolute\">\n"
    << "    <parent link=\"" << parent << "\"/>\n"
    << "    <child link=\"" << child << "\"/>\n"
    << "    <origin xyz=\"" << xyz << "\" rpy=\"" << rpy << "\"/>\n"
    << "    <axis xyz=\"0 -1 0\"/>\n"
    << "    <limit lower=\"" << lower << "\" upper=\"" << upper
    << "\" effort=\"1\" velocity=\"1\"/>\n"
    << "  </joint>\n";
  return s.str();
}

}  // namespace

ToyHandPaths WriteToyHand(const fs::path& dir) {
  fs::create_directories(dir / "meshes");
  SaveObj(MakeBox(Vec3(-0.05, -0.05, -0.02), Vec3(0.05, 0.05, 0.0)),
          (dir / "meshes" / "palm.obj").string());
  SaveObj(MakeBox(Vec3(-kHalfWidth, -kHalfWidth, 0.0),
                  Vec3(kHalfWidth, kHalfWidth, kProximalLength)),
          (dir / "meshes" / "proximal.obj").string());
  SaveObj(MakeBox(Vec3(-kHalfWidth, -kHalfWidth, 0.0),
                  Vec3(kHalfWidth, kHalfWidth, kDistalLength)),
          (dir / "meshes" / "distal.obj").string());

  std::string urdf = "<?xml version=\"1.0\"?>\n<robot name=\"toy_hand\">\n";
  urdf += LinkXml("palm", "palm.obj");
  nlohmann::json candidates = nlohmann::json::array();
  nlohmann::json spheres = nlohmann::json::array();
  nlohmann::json theta_ref = nlohmann::json::object();
  const double angles[3] = {90.0, 210.0, 330.0};
  for (int f = 0; f < 3; ++f) {
    const std::string p = "finger" + std::to_string(f);
    const double phi = angles[f] * std::numbers::pi / 180.0;
    urdf += LinkXml(p + "_proximal", "proximal.obj");
    urdf += LinkXml(p + "_distal", "distal.obj");
    urdf += JointXml(p + "_joint0", "palm", p + "_proximal",
                     Triple(kFingerRadius * std::cos(phi), kFingerRadius * std::sin(phi), 0),
                     Triple(0, 0, phi), -0.6, 1.5);
    urdf += JointXml(p + "_joint1", p + "_proximal", p + "_distal",
                     Triple(0, 0, kProximalLength), Triple(0, 0, 0), 0.0, 1.6);
    theta_ref[p + "_joint0"] = -0.2;
    theta_ref[p + "_joint1"] = 0.2;
    for (const char* seg : {"_proximal", "_distal"}) {
      const double len = seg[1] == 'p' ? kProximalLength : kDistalLength;
      for (double t : {0.3, 0.55, 0.8}) {
        candidates.push_back({{"link", p + seg},
                              {"point", {-kHalfWidth, 0.0, t * len}},
                              {"normal", {-1.0, 0.0, 0.0}}});
      }
      spheres.push_back({{"link", p + seg}, {"center", {0.0, 0.0, 0.35 * len}}, {"radius", 0.01}});
      spheres.push_back({{"link", p + seg}, {"center", {0.0, 0.0, 0.8 * len}}, {"radius", 0.01}});
    }
    candidates.push_back(
        {{"link", p + "_distal"}, {"point", {0.0, 0.0, kDistalLength}}, {"normal", {0, 0, 1}}});
  }
  for (const auto& xy : {std::pair{0.0, 0.0}, {0.02, 0.0}, {-0.02, 0.0}, {0.0, 0.02},
                         {0.0, -0.02}}) {
    candidates.push_back(
        {{"link", "palm"}, {"point", {xy.first, xy.second, 0.0}}, {"normal", {0, 0, 1}}});
  }
  urdf += "</robot>\n";

  ToyHandPaths paths{dir / "toy_hand.urdf", dir / "annotations.json"};
  std::ofstream(paths.urdf) << urdf;
  const nlohmann::json ann = {{"theta_ref", theta_ref},
                              {"contact_candidates", candidates},
                              {"spen_spheres", spheres},
                              {"palm_axis", {0.0, 0.0, 1.0}}};
  std::ofstream(paths.annotations) << ann.dump(2) << "\n";
  return paths;
}

const HandModel& ToyHand() {
  static const HandModel hand = [] {
    const ToyHandPaths paths = WriteToyHand(ScratchDir("toy_hand"));
    return HandModel::Load(paths.urdf.string(), paths.annotations.string());
  }();
  return hand;
}

TriMesh SphereFixture() { return MakeIcosphere(0.08, 4); }

TriMesh CubeFixture() { return MakeBox(Vec3::Constant(-0.05), Vec3::Constant(0.05)); }

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("dexgrasp_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool RayParityInside(const TriMesh& mesh, const Vec3& query, Rng& rng) {
  const Vec3 dir = RandomUnitVector(rng);
  int crossings = 0;
  for (const Face& f : mesh.faces()) {
    const Vec3& a = mesh.vertices()[f[0]];
    const Vec3 e1 = mesh.vertices()[f[1]] - a;
    const Vec3 e2 = mesh.vertices()[f[2]] - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-300) continue;
    const Vec3 s = query - a;
    const double u = s.dot(p) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    if (e2.dot(q) / det > 0.0) ++crossings;
  }
  return crossings % 2 == 1;
}

namespace {

// Offset of the hyperplane through six wrenches when it supports the whole
// set (every wrench on its non-positive side after orientation); nullopt
// otherwise.
std::optional<double> SupportingOffset(std::span<const Wrench> wrenches,
                                       const std::array<int, 6>& idx) {
  Eigen::Matrix<double, 5, 6> m;
  for (int r = 0; r < 5; ++r) m.row(r) = (wrenches[idx[r + 1]] - wrenches[idx[0]]).transpose();
  Eigen::FullPivLU<Eigen::Matrix<double, 5, 6>> lu(m);
  if (lu.rank() != 5) return std::nullopt;
  const Wrench normal = lu.kernel().col(0).normalized();
  const double offset = normal.dot(wrenches[idx[0]]);
  double lo = 0.0, hi = 0.0;
  for (const Wrench& w : wrenches) {
    const double d = normal.dot(w) - offset;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  constexpr double kTol = 1e-10;
  if (hi <= kTol) return offset;
  if (lo >= -kTol) return -offset;
  return std::nullopt;
}

// Visits every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void ForEachSubset6(int n, F&& visit) {
  if (n < 6) return;
  std::array<int, 6> idx = {0, 1, 2, 3, 4, 5};
  while (true) {
    visit(idx);
    int k = 5;
    while (k >= 0 && idx[k] == n - 6 + k) --k;
    if (k < 0) return;
    ++idx[k];
    for (int j = k + 1; j < 6; ++j) idx[j] = idx[j - 1] + 1;
  }
}

constexpr double kBoundary = 1e-9;

}  // namespace

double SupportFunctionQ1(std::span<const Wrench> wrenches, int directions, uint64_t seed) {
  if (wrenches.empty()) return 0.0;
  auto support = [&](const Wrench& u) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Wrench& w : wrenches) best = std::max(best, u.dot(w));
    return best;
  };
  Rng rng(seed);
  auto random_dir = [&rng] {
    Wrench u;
    for (int k = 0; k < 6; ++k) u[k] = StandardNormal(rng);
    return Wrench(u.normalized());
  };
  constexpr int kStarts = 24;
  std::vector<std::pair<double, Wrench>> best;
  for (int i = 0; i < directions; ++i) {
    const Wrench u = random_dir();
    const double h = support(u);
    if (static_cast<int>(best.size()) < kStarts || h < best.back().first) {
      best.emplace_back(h, u);
      std::sort(best.begin(), best.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (static_cast<int>(best.size()) > kStarts) best.pop_back();
    }
  }
  double result = best.front().first;
  for (auto [h, u] : best) {
    // Adaptive random search on the sphere.
    double sigma = 0.05;
    for (int it = 0; it < 40000 && sigma > 1e-12; ++it) {
      const Wrench cand = (u + sigma * random_dir()).normalized();
      const double hc = support(cand);
      if (hc < h) {
        h = hc;
        u = cand;
        sigma *= 1.2;
      } else {
        sigma *= 0.998;
      }
    }
    result = std::min(result, h);
    // The minimum sits on a facet normal: try planes through the wrenches
    // that are nearly active at u. Any supporting plane's offset is itself
    // a support value, so this only tightens the bound.
    std::vector<int> order(wrenches.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return u.dot(wrenches[a]) > u.dot(wrenches[b]); });
    const int near = std::min<int>(16, static_cast<int>(order.size()));
    ForEachSubset6(near, [&](const std::array<int, 6>& local) {
      std::array<int, 6> idx;
      for (int k = 0; k < 6; ++k) idx[k] = order[local[k]];
      if (const auto offset = SupportingOffset(wrenches, idx)) result = std::min(result, *offset);
    });
  }
  return result > kBoundary ? result : 0.0;
}

double BruteForceQ1(std::span<const Wrench> wrenches) {
  const int n = static_cast<int>(wrenches.size());
  if (n < 7) return 0.0;
  Eigen::Matrix<double, 6, Eigen::Dynamic> diffs(6, n - 1);
  for (int i = 1; i < n; ++i) diffs.col(i - 1) = wrenches[i] - wrenches[0];
  if (Eigen::FullPivLU<Eigen::MatrixXd>(diffs).rank() < 6) return 0.0;
  double q1 = std::numeric_limits<double>::infinity();
  ForEachSubset6(n, [&](const std::array<int, 6>& idx) {
    if (const auto offset = SupportingOffset(wrenches, idx)) q1 = std::min(q1, *offset);
  });
  return q1 > kBoundary && std::isfinite(q1) ? q1 : 0.0;
}

}  // namespace dexgrasp::testing
