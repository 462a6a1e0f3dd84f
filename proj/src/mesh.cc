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

#include "dexgrasp/mesh.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "dexgrasp/signed_distance.h"

namespace dexgrasp {

TriMesh::TriMesh() : TriMesh({}, {}) {}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  const int nv = static_cast<int>(vertices_.size());
  bounds_.setEmpty();
  for (const Vec3& v : vertices_) bounds_.extend(v);
  const double diag = bounds_.isEmpty() ? 0.0 : bounds_.diagonal().norm();
  const double min_area = 1e-12 * diag * diag;

  faces_.reserve(faces.size());
  for (const Face& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= nv) {
        throw Error("face index " + std::to_string(idx) +
                    " out of range for " + std::to_string(nv) + " vertices");
      }
    }
    const Vec3 cross = (vertices_[f[1]] - vertices_[f[0]])
                           .cross(vertices_[f[2]] - vertices_[f[0]]);
    const double area = 0.5 * cross.norm();
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || !(area > min_area)) {
      ++dropped_faces_;
      continue;
    }
    faces_.push_back(f);
    face_areas_.push_back(area);
    face_normals_.push_back(cross.normalized());
  }

  std::map<std::pair<int, int>, int> edge_count;
  for (const Face& f : faces_) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  watertight_ = !faces_.empty() &&
                std::all_of(edge_count.begin(), edge_count.end(),
                            [](const auto& e) { return e.second == 2; });

  // Closed surfaces are stored outward-oriented.
  if (watertight_ && volume() < 0.0) {
    for (Face& f : faces_) std::swap(f[1], f[2]);
    for (Vec3& n : face_normals_) n = -n;
  }

  bvh_ = std::make_shared<const Bvh>(vertices_, faces_, face_areas_,
                                     face_normals_);
}

double TriMesh::surface_area() const {
  double total = 0.0;
  for (double a : face_areas_) total += a;
  return total;
}

double TriMesh::volume() const {
  double total = 0.0;
  for (const Face& f : faces_) {
    total += vertices_[f[0]].dot(vertices_[f[1]].cross(vertices_[f[2]]));
  }
  return total / 6.0;
}

TriMesh TriMesh::Transformed(const Isometry& transform) const {
  std::vector<Vec3> out;
  out.reserve(vertices_.size());
  for (const Vec3& v : vertices_) out.push_back(transform * v);
  return TriMesh(std::move(out), faces_);
}

TriMesh TriMesh::Scaled(double factor) const {
  std::vector<Vec3> out;
  out.reserve(vertices_.size());
  for (const Vec3& v : vertices_) out.push_back(factor * v);
  return TriMesh(std::move(out), faces_);
}

NormalizedMesh NormalizeToUnitSphere(const TriMesh& mesh) {
  if (mesh.num_vertices() == 0) throw Error("cannot normalize an empty mesh");
  NormalizedMesh out;
  out.center = mesh.bounds().center();
  double max_norm = 0.0;
  for (const Vec3& v : mesh.vertices()) {
    max_norm = std::max(max_norm, (v - out.center).norm());
  }
  if (!(max_norm > 0.0)) {
    throw Error("cannot normalize a mesh whose vertices all coincide");
  }
  out.factor = 1.0 / max_norm;
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertices().size());
  for (const Vec3& v : mesh.vertices()) {
    vertices.push_back((v - out.center) * out.factor);
  }
  out.mesh = TriMesh(std::move(vertices), mesh.faces());
  return out;
}

TriMesh InflateHull(const TriMesh& hull, double offset) {
  std::vector<Vec3> vertices;
  vertices.reserve(hull.vertices().size());
  for (const Vec3& v : hull.vertices()) {
    const double r = v.norm();
    if (!(r > 0.0)) throw Error("cannot inflate a hull with a vertex at the origin");
    vertices.push_back(v + offset * v / r);
  }
  return TriMesh(std::move(vertices), hull.faces());
}

std::vector<SurfaceSample> SampleSurface(const TriMesh& mesh, int count,
                                         std::mt19937_64& rng) {
  if (mesh.empty()) throw Error("cannot sample an empty mesh");
  if (count < 1) throw Error("sample count must be at least 1");
  std::vector<double> cumulative(mesh.num_faces());
  double total = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SurfaceSample> samples;
  samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pick = unit(rng) * total;
    int f = static_cast<int>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin());
    f = std::min(f, mesh.num_faces() - 1);
    const double s = std::sqrt(unit(rng));
    const double t = unit(rng);
    const Face& face = mesh.faces()[f];
    const Vec3& a = mesh.vertices()[face[0]];
    const Vec3& b = mesh.vertices()[face[1]];
    const Vec3& c = mesh.vertices()[face[2]];
    SurfaceSample sample;
    sample.point = (1.0 - s) * a + s * (1.0 - t) * b + s * t * c;
    sample.normal = mesh.face_normal(f);
    sample.face_id = f;
    samples.push_back(sample);
  }
  return samples;
}

TriMesh MakeBox(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                   (i & 4) ? hi.z() : lo.z());
  }
  std::vector<Face> f = {
      {0, 2, 1}, {1, 2, 3},  // z = lo
      {4, 5, 6}, {5, 7, 6},  // z = hi
      {0, 1, 4}, {1, 5, 4},  // y = lo
      {2, 6, 3}, {3, 6, 7},  // y = hi
      {0, 4, 2}, {2, 4, 6},  // x = lo
      {1, 3, 5}, {3, 7, 5},  // x = hi
  };
  return TriMesh(std::move(v), std::move(f));
}

TriMesh MakeIcosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace dexgrasp
