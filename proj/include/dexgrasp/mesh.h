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

#ifndef DEXGRASP_MESH_H_
#define DEXGRASP_MESH_H_

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dexgrasp/types.h"

namespace dexgrasp {

using Face = std::array<int, 3>;
using Aabb = Eigen::AlignedBox3d;

struct SurfaceSample {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // unit, outward
  int face_id = -1;
};

class Bvh;

// Indexed triangle mesh. Construction drops degenerate faces, builds the
// face hierarchy and classifies the surface; the object is immutable
// afterwards and safe to query from many threads.
class TriMesh {
 public:
  TriMesh();
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  bool empty() const { return faces_.empty(); }

  // Every undirected edge is shared by exactly two faces.
  bool watertight() const { return watertight_; }
  // Faces removed at construction because they had zero area.
  int dropped_faces() const { return dropped_faces_; }

  const Aabb& bounds() const { return bounds_; }
  double face_area(int f) const { return face_areas_[f]; }
  const Vec3& face_normal(int f) const { return face_normals_[f]; }
  double surface_area() const;
  // Signed enclosed volume; positive for outward-oriented closed meshes.
  double volume() const;

  const Bvh& bvh() const { return *bvh_; }

  TriMesh Transformed(const Isometry& transform) const;
  TriMesh Scaled(double factor) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<double> face_areas_;
  std::vector<Vec3> face_normals_;
  Aabb bounds_;
  bool watertight_ = false;
  int dropped_faces_ = 0;
  std::shared_ptr<const Bvh> bvh_;
};

// Scales and recenters so that the bounding-box center sits at the origin
// and the farthest vertex has norm one.
struct NormalizedMesh {
  TriMesh mesh;
  double factor = 1.0;
  Vec3 center = Vec3::Zero();
};
NormalizedMesh NormalizeToUnitSphere(const TriMesh& mesh);

// Pushes every vertex radially away from the origin by `offset`.
TriMesh InflateHull(const TriMesh& hull, double offset);

// Area-weighted surface samples. Face choice uses the cumulative area
// table, the point is uniform inside the chosen face.
std::vector<SurfaceSample> SampleSurface(const TriMesh& mesh, int count,
                                         std::mt19937_64& rng);

// Axis-aligned box [lo, hi] as a closed, outward-oriented 12-triangle mesh.
TriMesh MakeBox(const Vec3& lo, const Vec3& hi);

// Subdivided icosahedron projected on a sphere of the given radius.
TriMesh MakeIcosphere(double radius, int subdivisions);

// Mesh file I/O. OBJ, OFF and STL (ASCII or binary) are read; polygons are
// fan-triangulated. Meshes are written as OBJ.
TriMesh LoadMesh(const std::string& path);
TriMesh ParseObj(std::istream& in);
void SaveObj(const TriMesh& mesh, const std::string& path);

struct ObjGroup {
  std::string name;
  TriMesh mesh;
};
void SaveObjGroups(std::span<const ObjGroup> groups, const std::string& path);
std::vector<ObjGroup> LoadObjGroups(const std::string& path);

}  // namespace dexgrasp

#endif  // DEXGRASP_MESH_H_
