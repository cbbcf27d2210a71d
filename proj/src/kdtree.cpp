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

#include "qdm/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qdm/error.hpp"

namespace qdm {

namespace {

constexpr std::uint32_t kLeafSize = 8;

bool better(double d, std::size_t i, const Nearest& best) {
  return d < best.sq_dist || (d == best.sq_dist && i < best.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : pts_(points.begin(), points.end()) {
  idx_.resize(pts_.size());
  std::iota(idx_.begin(), idx_.end(), 0u);
  if (!pts_.empty()) build(0, static_cast<std::uint32_t>(pts_.size()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  // Split the widest extent at the median.
  Vec3 lo = pts_[idx_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(pts_[idx_[i]]);
    hi = hi.cwiseMax(pts_[idx_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(idx_.begin() + begin, idx_.begin() + mid, idx_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return pts_[a][axis] < pts_[b][axis]; });
  const double split = pts_[idx_[mid]][axis];
  const std::uint32_t l = build(begin, mid);
  const std::uint32_t r = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void KdTree::search(std::uint32_t node, const Vec3& q, Nearest& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const double d = (pts_[idx_[i]] - q).squaredNorm();
      if (better(d, idx_[i], best)) best = {idx_[i], d};
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::uint32_t near = diff < 0 ? n.left : n.right;
  const std::uint32_t far = diff < 0 ? n.right : n.left;
  search(near, q, best);
  // <= keeps equal-distance points on the far side reachable for the tie rule.
  if (diff * diff <= best.sq_dist) search(far, q, best);
}

Nearest KdTree::nearest(const Vec3& q) const {
  if (pts_.empty()) throw StructureError("nearest query on an empty point set");
  Nearest best{0, std::numeric_limits<double>::infinity()};
  best.index = std::numeric_limits<std::size_t>::max();
  search(0, q, best);
  return best;
}

Nearest nearest_brute(std::span<const Vec3> points, const Vec3& q) {
  if (points.empty()) throw StructureError("nearest query on an empty point set");
  Nearest best{0, (points[0] - q).squaredNorm()};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = (points[i] - q).squaredNorm();
    if (d < best.sq_dist) best = {i, d};
  }
  return best;
}

std::vector<double> nn_distances(std::span<const Vec3> queries, std::span<const Vec3> points) {
  const KdTree tree(points);
  std::vector<double> out(queries.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::sqrt(tree.nearest(queries[i]).sq_dist);
  return out;
}

std::vector<double> nn_distances_serial(std::span<const Vec3> queries, std::span<const Vec3> points) {
  std::vector<double> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = std::sqrt(nearest_brute(points, queries[i]).sq_dist);
  return out;
}

}  // namespace qdm
