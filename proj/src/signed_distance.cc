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

#include "dexgrasp/signed_distance.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

namespace dexgrasp {
namespace {

constexpr int kLeafSize = 4;
// Clusters farther than this multiple of their radius use the dipole term.
constexpr double kFarFieldRatio = 2.0;
constexpr double kGradientFallback = 1e-6;

double TriangleSolidAngle(const Vec3& q, const Vec3& a, const Vec3& b,
                          const Vec3& c) {
  const Vec3 qa = a - q, qb = b - q, qc = c - q;
  const double la = qa.norm(), lb = qb.norm(), lc = qc.norm();
  const double num = qa.dot(qb.cross(qc));
  const double den =
      la * lb * lc + qa.dot(qb) * lc + qb.dot(qc) * la + qc.dot(qa) * lb;
  return 2.0 * std::atan2(num, den);
}

// Keeps the closer candidate; equal distances prefer the lower face id.
void Consider(ClosestPoint& best, const Vec3& p, double d2, int face) {
  if (d2 < best.squared_distance ||
      (d2 == best.squared_distance && face < best.face_id)) {
    best.point = p;
    best.squared_distance = d2;
    best.face_id = face;
  }
}

}  // namespace

Bvh::Bvh(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
         const std::vector<double>& areas, const std::vector<Vec3>& normals) {
  if (faces.empty()) return;
  order_.resize(faces.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<Vec3> centroids(faces.size());
  for (size_t f = 0; f < faces.size(); ++f) {
    centroids[f] = (vertices[faces[f][0]] + vertices[faces[f][1]] +
                    vertices[faces[f][2]]) / 3.0;
  }
  nodes_.reserve(2 * faces.size() / kLeafSize + 2);
  Build(vertices, faces, centroids, areas, normals, 0,
        static_cast<int>(faces.size()));
}

int Bvh::Build(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
               const std::vector<Vec3>& centroids,
               const std::vector<double>& areas,
               const std::vector<Vec3>& normals, int begin, int end) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Node node;
  node.begin = begin;
  node.end = end;
  node.box.setEmpty();
  Aabb centroid_box;
  centroid_box.setEmpty();
  double area_sum = 0.0;
  for (int i = begin; i < end; ++i) {
    const int f = order_[i];
    for (int k = 0; k < 3; ++k) node.box.extend(vertices[faces[f][k]]);
    centroid_box.extend(centroids[f]);
    node.dipole += areas[f] * normals[f];
    node.center += areas[f] * centroids[f];
    area_sum += areas[f];
  }
  node.center /= area_sum;
  for (int i = begin; i < end; ++i) {
    for (int k = 0; k < 3; ++k) {
      node.radius = std::max(
          node.radius, (vertices[faces[order_[i]][k]] - node.center).norm());
    }
  }

  if (end - begin > kLeafSize) {
    int axis = 0;
    centroid_box.diagonal().maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       if (centroids[a][axis] != centroids[b][axis]) {
                         return centroids[a][axis] < centroids[b][axis];
                       }
                       return a < b;
                     });
    node.left = Build(vertices, faces, centroids, areas, normals, begin, mid);
    node.right = Build(vertices, faces, centroids, areas, normals, mid, end);
  }
  nodes_[index] = node;
  return index;
}

Vec3 ClosestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b,
                            const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return a + (d1 / (d1 - d3)) * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return a + (d2 / (d2 - d6)) * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

ClosestPoint FindClosestPointBruteForce(const TriMesh& mesh, const Vec3& query) {
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  const auto& v = mesh.vertices();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces()[f];
    const Vec3 p = ClosestPointOnTriangle(query, v[face[0]], v[face[1]], v[face[2]]);
    Consider(best, p, (p - query).squaredNorm(), f);
  }
  return best;
}

ClosestPoint FindClosestPoint(const TriMesh& mesh, const Vec3& query) {
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  const auto& nodes = mesh.bvh().nodes();
  if (nodes.empty()) return best;
  const auto& order = mesh.bvh().face_order();
  const auto& v = mesh.vertices();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Bvh::Node& node = nodes[stack[--top]];
    if (node.box.squaredExteriorDistance(query) > best.squared_distance) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int f = order[i];
        const Face& face = mesh.faces()[f];
        const Vec3 p =
            ClosestPointOnTriangle(query, v[face[0]], v[face[1]], v[face[2]]);
        Consider(best, p, (p - query).squaredNorm(), f);
      }
      continue;
    }
    const double dl = nodes[node.left].box.squaredExteriorDistance(query);
    const double dr = nodes[node.right].box.squaredExteriorDistance(query);
    // Push the farther child first so the nearer one is explored first.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

double WindingNumberExact(const TriMesh& mesh, const Vec3& query) {
  double total = 0.0;
  const auto& v = mesh.vertices();
  for (const Face& f : mesh.faces()) {
    total += TriangleSolidAngle(query, v[f[0]], v[f[1]], v[f[2]]);
  }
  return total / (4.0 * std::numbers::pi);
}

double WindingNumber(const TriMesh& mesh, const Vec3& query) {
  const auto& nodes = mesh.bvh().nodes();
  if (nodes.empty()) return 0.0;
  // A surface seen from outside its bounding box subtends less than a
  // hemisphere, so the winding number there is below one half.
  if (!mesh.bounds().contains(query)) {
    if (mesh.watertight()) return 0.0;
  }
  const auto& order = mesh.bvh().face_order();
  const auto& v = mesh.vertices();
  double total = 0.0;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Bvh::Node& node = nodes[stack[--top]];
    const Vec3 r = node.center - query;
    const double dist = r.norm();
    if (dist > kFarFieldRatio * node.radius) {
      total += r.dot(node.dipole) / (dist * dist * dist);
      continue;
    }
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Face& f = mesh.faces()[order[i]];
        total += TriangleSolidAngle(query, v[f[0]], v[f[1]], v[f[2]]);
      }
      continue;
    }
    stack[top++] = node.left;
    stack[top++] = node.right;
  }
  return total / (4.0 * std::numbers::pi);
}

bool IsInside(const TriMesh& mesh, const Vec3& query) {
  if (!mesh.bounds().contains(query)) return false;
  return WindingNumber(mesh, query) >= 0.5;
}

SignedDistanceResult SignedDistance(const TriMesh& mesh, const Vec3& query) {
  SignedDistanceResult out;
  if (mesh.empty()) {
    out.distance = std::numeric_limits<double>::infinity();
    out.sign_reliable = false;
    return out;
  }
  const ClosestPoint cp = FindClosestPoint(mesh, query);
  const double dist = std::sqrt(cp.squared_distance);
  const bool inside = IsInside(mesh, query);
  const double sign = inside ? -1.0 : 1.0;
  out.distance = sign * dist;
  out.nearest.point = cp.point;
  out.nearest.face_id = cp.face_id;
  out.nearest.normal = mesh.face_normal(cp.face_id);
  if (dist >= kGradientFallback) {
    out.gradient = sign * (query - cp.point) / dist;
  } else {
    out.gradient = mesh.face_normal(cp.face_id);
  }
  out.sign_reliable = mesh.watertight();
  return out;
}

}  // namespace dexgrasp
