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

#ifndef DEXGRASP_SIGNED_DISTANCE_H_
#define DEXGRASP_SIGNED_DISTANCE_H_

#include <vector>

#include "dexgrasp/mesh.h"
#include "dexgrasp/types.h"

namespace dexgrasp {

// Bounding-volume hierarchy over the faces of a mesh. Nodes split at the
// median centroid along the longest axis. Each node also carries the
// area-weighted normal and centroid used by the far-field winding number.
class Bvh {
 public:
  struct Node {
    Aabb box;
    int left = -1;   // child node index, -1 for leaves
    int right = -1;
    int begin = 0;   // range into face_order()
    int end = 0;
    Vec3 dipole = Vec3::Zero();     // sum of area * unit normal
    Vec3 center = Vec3::Zero();     // area-weighted centroid
    double radius = 0.0;            // max distance from center to a vertex
  };

  Bvh(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
      const std::vector<double>& areas, const std::vector<Vec3>& normals);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& face_order() const { return order_; }

 private:
  int Build(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
            const std::vector<Vec3>& centroids, const std::vector<double>& areas,
            const std::vector<Vec3>& normals, int begin, int end);

  std::vector<Node> nodes_;
  std::vector<int> order_;
};

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double squared_distance = 0.0;
  int face_id = -1;
};

// Closest point on triangle (a, b, c) to p.
Vec3 ClosestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b,
                            const Vec3& c);

// Nearest surface point. Ties on distance resolve to the lowest face id.
ClosestPoint FindClosestPoint(const TriMesh& mesh, const Vec3& query);
ClosestPoint FindClosestPointBruteForce(const TriMesh& mesh, const Vec3& query);

// Generalized winding number. The hierarchical version evaluates near
// faces exactly and far clusters by their dipole term.
double WindingNumber(const TriMesh& mesh, const Vec3& query);
double WindingNumberExact(const TriMesh& mesh, const Vec3& query);
bool IsInside(const TriMesh& mesh, const Vec3& query);

struct SignedDistanceResult {
  double distance = 0.0;     // negative inside
  Vec3 gradient = Vec3::Zero();
  SurfaceSample nearest;
  bool sign_reliable = true;  // false when the mesh is not watertight
};

SignedDistanceResult SignedDistance(const TriMesh& mesh, const Vec3& query);

}  // namespace dexgrasp

#endif  // DEXGRASP_SIGNED_DISTANCE_H_
