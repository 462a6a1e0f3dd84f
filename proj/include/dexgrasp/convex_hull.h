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

#ifndef DEXGRASP_CONVEX_HULL_H_
#define DEXGRASP_CONVEX_HULL_H_

#include <span>
#include <vector>

#include "dexgrasp/mesh.h"
#include "dexgrasp/types.h"

namespace dexgrasp {

// A simplicial hull facet: `normal . x = offset` with `normal` unit length
// and pointing away from the hull interior.
struct HullFacet {
  std::vector<int> vertices;
  VecX normal;
  double offset = 0.0;
};

struct HullResult {
  // Affine dimension of the input; smaller than the ambient dimension means
  // the point set is flat and `facets` is empty.
  int rank = 0;
  std::vector<HullFacet> facets;
  VecX interior;  // a point strictly inside the hull when full-dimensional

  bool full_dimensional(int ambient) const { return rank == ambient; }
  std::vector<int> VertexIndices() const;
};

// Incremental quickhull in any dimension >= 2. Points within `tolerance`
// (relative to the coordinate scale) of a facet plane count as on it.
HullResult QuickHull(std::span<const VecX> points, double tolerance = 1e-10);

// Outward-oriented closed triangle mesh of the 3D convex hull. Throws when
// the input is coplanar, collinear or has fewer than four points.
TriMesh ConvexHull3(std::span<const Vec3> points);

}  // namespace dexgrasp

#endif  // DEXGRASP_CONVEX_HULL_H_
