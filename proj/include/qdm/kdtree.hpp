// Copyright 2026 The qdmesh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

#include "qdm/mesh.hpp"

namespace qdm {

struct Nearest {
  std::size_t index = 0;
  double sq_dist = 0.0;
};

/// Static 3D kd-tree for nearest-neighbour queries. Ties on distance go to
/// the lower point index, so results match nearest_brute exactly.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  /// Requires a non-empty point set.
  Nearest nearest(const Vec3& q) const;

  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    int axis = -1;  // -1: leaf
    double split = 0.0;
    std::uint32_t begin = 0, end = 0;  // leaf range into idx_
    std::uint32_t left = 0, right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& q, Nearest& best) const;

  std::vector<Vec3> pts_;
  std::vector<std::uint32_t> idx_;
  std::vector<Node> nodes_;
};

Nearest nearest_brute(std::span<const Vec3> points, const Vec3& q);

/// Distance from every query to its nearest point, in query order.
std::vector<double> nn_distances(std::span<const Vec3> queries, std::span<const Vec3> points);
std::vector<double> nn_distances_serial(std::span<const Vec3> queries, std::span<const Vec3> points);

}  // namespace qdm
