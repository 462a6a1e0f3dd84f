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

#include "dexgrasp/convex_hull.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/QR>

namespace dexgrasp {
namespace {

struct Facet {
  std::vector<int> vertices;  // sorted
  VecX normal;
  double offset = 0.0;
  std::vector<int> outside;
  bool alive = true;
};

using Ridge = std::vector<int>;

Ridge RidgeWithout(const std::vector<int>& vertices, size_t skip) {
  Ridge r;
  r.reserve(vertices.size() - 1);
  for (size_t k = 0; k < vertices.size(); ++k) {
    if (k != skip) r.push_back(vertices[k]);
  }
  return r;
}

class QuickHullBuilder {
 public:
  QuickHullBuilder(std::span<const VecX> points, double tolerance)
      : points_(points), dim_(static_cast<int>(points[0].size())) {
    double scale = 0.0;
    for (const VecX& p : points_) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    eps_ = tolerance * std::max(scale, 1e-300);
  }

  HullResult Run() {
    HullResult result;
    std::vector<int> simplex = InitialSimplex(result.rank);
    if (result.rank < dim_) return result;

    interior_ = VecX::Zero(dim_);
    for (int i : simplex) interior_ += points_[i];
    interior_ /= static_cast<double>(simplex.size());

    std::vector<int> created;
    for (size_t skip = 0; skip < simplex.size(); ++skip) {
      created.push_back(AddFacet(RidgeWithout(simplex, skip)));
    }
    std::set<int> in_simplex(simplex.begin(), simplex.end());
    std::vector<int> rest;
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
      if (!in_simplex.count(i)) rest.push_back(i);
    }
    Distribute(rest, created, -1);

    for (;;) {
      int current = -1;
      for (int f = 0; f < static_cast<int>(facets_.size()); ++f) {
        if (facets_[f].alive && !facets_[f].outside.empty()) {
          current = f;
          break;
        }
      }
      if (current < 0) break;
      AddPoint(current);
    }

    for (const Facet& f : facets_) {
      if (!f.alive) continue;
      result.facets.push_back({f.vertices, f.normal, f.offset});
    }
    result.interior = interior_;
    return result;
  }

 private:
  double Distance(const Facet& f, int point) const {
    return f.normal.dot(points_[point]) - f.offset;
  }

  // Greedy selection of dim+1 affinely independent points.
  std::vector<int> InitialSimplex(int& rank) {
    const int n = static_cast<int>(points_.size());
    rank = 0;
    std::vector<int> chosen;
    if (n == 0) return chosen;
    int first = 0;
    for (int i = 1; i < n; ++i) {
      if (points_[i][0] < points_[first][0]) first = i;
    }
    chosen.push_back(first);
    std::vector<VecX> basis;
    while (static_cast<int>(chosen.size()) <= dim_) {
      int best = -1;
      double best_dist = eps_;
      for (int i = 0; i < n; ++i) {
        VecX r = points_[i] - points_[first];
        for (const VecX& b : basis) r -= b.dot(r) * b;
        const double d = r.norm();
        if (d > best_dist) {
          best_dist = d;
          best = i;
        }
      }
      if (best < 0) break;
      VecX r = points_[best] - points_[first];
      for (const VecX& b : basis) r -= b.dot(r) * b;
      // Second Gram-Schmidt pass for orthogonality.
      for (const VecX& b : basis) r -= b.dot(r) * b;
      basis.push_back(r.normalized());
      chosen.push_back(best);
      ++rank;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  int AddFacet(std::vector<int> vertices) {
    std::sort(vertices.begin(), vertices.end());
    Facet f;
    f.vertices = vertices;
    Eigen::MatrixXd edges(dim_, dim_ - 1);
    for (int k = 1; k < dim_; ++k) {
      edges.col(k - 1) = points_[vertices[k]] - points_[vertices[0]];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(edges);
    f.normal = qr.householderQ() * VecX::Unit(dim_, dim_ - 1);
    f.normal.normalize();
    f.offset = f.normal.dot(points_[vertices[0]]);
    if (f.normal.dot(interior_) > f.offset) {
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    const int id = static_cast<int>(facets_.size());
    facets_.push_back(std::move(f));
    for (size_t skip = 0; skip < vertices.size(); ++skip) {
      ridges_[RidgeWithout(vertices, skip)].push_back(id);
    }
    return id;
  }

  void RemoveFacet(int id) {
    Facet& f = facets_[id];
    f.alive = false;
    for (size_t skip = 0; skip < f.vertices.size(); ++skip) {
      auto it = ridges_.find(RidgeWithout(f.vertices, skip));
      if (it == ridges_.end()) continue;
      auto& owners = it->second;
      owners.erase(std::remove(owners.begin(), owners.end(), id), owners.end());
      if (owners.empty()) ridges_.erase(it);
    }
  }

  void Distribute(const std::vector<int>& candidates,
                  const std::vector<int>& targets, int skip) {
    for (int p : candidates) {
      if (p == skip) continue;
      for (int t : targets) {
        if (Distance(facets_[t], p) > eps_) {
          facets_[t].outside.push_back(p);
          break;
        }
      }
    }
  }

  void AddPoint(int start) {
    Facet& seed = facets_[start];
    int apex = seed.outside.front();
    double far = Distance(seed, apex);
    for (int p : seed.outside) {
      const double d = Distance(seed, p);
      if (d > far) {
        far = d;
        apex = p;
      }
    }

    std::map<int, bool> visible;
    std::vector<int> queue = {start};
    visible[start] = true;
    std::vector<Ridge> horizon;
    for (size_t head = 0; head < queue.size(); ++head) {
      const Facet& f = facets_[queue[head]];
      for (size_t skip = 0; skip < f.vertices.size(); ++skip) {
        Ridge ridge = RidgeWithout(f.vertices, skip);
        const auto& owners = ridges_.at(ridge);
        for (int other : owners) {
          if (other == queue[head]) continue;
          auto it = visible.find(other);
          if (it == visible.end()) {
            const bool sees = Distance(facets_[other], apex) > eps_;
            it = visible.emplace(other, sees).first;
            if (sees) queue.push_back(other);
          }
          if (!it->second) horizon.push_back(ridge);
        }
      }
    }

    std::vector<int> orphans;
    for (int f : queue) {
      orphans.insert(orphans.end(), facets_[f].outside.begin(),
                     facets_[f].outside.end());
      facets_[f].outside.clear();
      RemoveFacet(f);
    }
    std::vector<int> created;
    for (Ridge& ridge : horizon) {
      ridge.push_back(apex);
      created.push_back(AddFacet(std::move(ridge)));
    }
    Distribute(orphans, created, apex);
  }

  std::span<const VecX> points_;
  int dim_;
  double eps_ = 0.0;
  VecX interior_;
  std::vector<Facet> facets_;
  std::map<Ridge, std::vector<int>> ridges_;
};

}  // namespace

std::vector<int> HullResult::VertexIndices() const {
  std::set<int> used;
  for (const HullFacet& f : facets) used.insert(f.vertices.begin(), f.vertices.end());
  return {used.begin(), used.end()};
}

HullResult QuickHull(std::span<const VecX> points, double tolerance) {
  if (points.empty()) return {};
  const int dim = static_cast<int>(points[0].size());
  if (dim < 2) throw Error("QuickHull needs dimension >= 2");
  for (const VecX& p : points) {
    if (p.size() != dim) throw Error("QuickHull points differ in dimension");
    if (!p.allFinite()) throw Error("QuickHull point is not finite");
  }
  return QuickHullBuilder(points, tolerance).Run();
}

TriMesh ConvexHull3(std::span<const Vec3> points) {
  if (points.size() < 4) throw Error("convex hull needs at least 4 points");
  std::vector<VecX> lifted;
  lifted.reserve(points.size());
  for (const Vec3& p : points) lifted.emplace_back(p);
  const HullResult hull = QuickHull(lifted);
  if (!hull.full_dimensional(3)) {
    throw Error("convex hull input is degenerate (coplanar or collinear)");
  }
  std::map<int, int> remap;
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  for (const HullFacet& f : hull.facets) {
    Face tri;
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] =
          remap.try_emplace(f.vertices[k], static_cast<int>(vertices.size()));
      if (inserted) vertices.push_back(points[f.vertices[k]]);
      tri[k] = it->second;
    }
    const Vec3 n = (vertices[tri[1]] - vertices[tri[0]])
                       .cross(vertices[tri[2]] - vertices[tri[0]]);
    if (n.dot(Vec3(f.normal)) < 0.0) std::swap(tri[1], tri[2]);
    faces.push_back(tri);
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

}  // namespace dexgrasp
