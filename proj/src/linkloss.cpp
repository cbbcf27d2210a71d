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

#include "qdm/linkloss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "qdm/error.hpp"

namespace qdm {

namespace {

// Mean hinge over the negatives picked by `select`; nullopt without
// negatives.
template <typename Select>
std::optional<double> triplet_term(const EmbeddingBatch& b, const EmbeddingBatch::Triplet& t,
                                   double margin, Select select) {
  if (t.negatives.empty()) return std::nullopt;
  const Eigen::VectorXd& a = b.points[t.anchor];
  const double d_ap = sq_dist(a, b.points[t.positive]);
  std::vector<double> d_an(t.negatives.size());
  for (std::size_t j = 0; j < t.negatives.size(); ++j) d_an[j] = sq_dist(a, b.points[t.negatives[j]]);
  const std::vector<std::size_t> picked = select(d_ap, d_an);
  double sum = 0.0;
  for (std::size_t j : picked) sum += std::max(0.0, d_ap - d_an[j] + margin);
  return sum / static_cast<double>(picked.size());
}

template <typename Select>
double mean_loss(const EmbeddingBatch& b, double margin, Select select) {
  b.validate();
  if (!(margin > 0.0)) throw RangeError("margin must be > 0");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(b.triplets.size());
  std::vector<std::optional<double>> terms(b.triplets.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) terms[i] = triplet_term(b, b.triplets[i], margin, select);
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& t : terms) {
    if (!t) continue;
    sum += *t;
    ++counted;
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

}  // namespace

double sq_dist(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) {
    throw StructureError("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
  return (u - v).squaredNorm();
}

std::vector<std::size_t> topk_hard_negatives(double d_ap, std::span<const double> d_an,
                                             std::size_t k) {
  std::vector<std::size_t> idx(d_an.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t keep = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](std::size_t a, std::size_t b) {
    const double va = violation(d_ap, d_an[a]), vb = violation(d_ap, d_an[b]);
    return va != vb ? va > vb : a < b;
  });
  idx.resize(keep);
  return idx;
}

void EmbeddingBatch::validate() const {
  const Eigen::Index dim = points.empty() ? 0 : points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw StructureError("embeddings have mixed dimensions");
  }
  auto check = [&](std::size_t i) {
    if (i >= points.size()) throw StructureError("triplet index " + std::to_string(i) + " out of range");
  };
  for (const Triplet& t : triplets) {
    check(t.anchor);
    check(t.positive);
    for (std::size_t n : t.negatives) check(n);
  }
}

double triplet_loss(const EmbeddingBatch& batch, std::size_t k, double margin) {
  if (k < 1) throw RangeError("k must be >= 1");
  return mean_loss(batch, margin, [k](double d_ap, const std::vector<double>& d_an) {
    return topk_hard_negatives(d_ap, d_an, k);
  });
}

double triplet_loss_all(const EmbeddingBatch& batch, double margin) {
  return mean_loss(batch, margin, [](double, const std::vector<double>& d_an) {
    std::vector<std::size_t> all(d_an.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  });
}

EmbeddingBatch batch_from_mesh(const FeatureTable& features, const PolyMesh& gt) {
  gt.validate();
  const std::size_t nv = gt.vertices.size();
  if (features.size() != nv + gt.faces.size()) {
    throw StructureError("feature table has " + std::to_string(features.size()) +
                         " rows, mesh needs " + std::to_string(nv + gt.faces.size()));
  }
  EmbeddingBatch b;
  b.points = features.rows;
  std::vector<char> on_face(nv, 0);
  for (std::size_t f = 0; f < gt.faces.size(); ++f) {
    for (Index v : gt.faces[f]) on_face[v] = 1;
    std::vector<std::size_t> negatives;
    for (std::size_t v = 0; v < nv; ++v) {
      if (!on_face[v]) negatives.push_back(v);
    }
    for (Index v : gt.faces[f]) b.triplets.push_back({nv + f, v, negatives});
    for (Index v : gt.faces[f]) on_face[v] = 0;
  }
  return b;
}

double MiningSchedule::effective_alpha() const {
  if (alpha) return *alpha;
  return (k_max - k_min) / (0.6 * total_epochs);
}

void MiningSchedule::validate() const {
  if (k_min < 1 || k_min > k_max) throw RangeError("require 1 <= k_min <= k_max");
  if (total_epochs < 1) throw RangeError("total_epochs must be >= 1");
  if (alpha && !(*alpha >= 0.0)) throw RangeError("alpha must be >= 0");
  if (!(margin_start > 0 && margin_start < 1 && margin_end > 0 && margin_end < 1)) {
    throw RangeError("margins must lie in (0, 1)");
  }
}

int k_schedule(int t, const MiningSchedule& s) {
  s.validate();
  if (t < 0) throw RangeError("epoch must be >= 0");
  // The small bias keeps floor(alpha * t) exact when alpha * t is an integer
  // up to rounding, e.g. the default alpha at 60% of the epochs.
  const double grown = std::floor(s.effective_alpha() * t + 1e-9);
  return static_cast<int>(std::min<double>(s.k_max, s.k_min + grown));
}

double margin_schedule(double t, const MiningSchedule& s) {
  s.validate();
  if (!(t >= 0.0)) throw RangeError("epoch must be >= 0");
  const double u = std::min(t, static_cast<double>(s.total_epochs)) / s.total_epochs;
  return s.margin_start + (s.margin_end - s.margin_start) * (1.0 - std::cos(std::numbers::pi * u)) / 2.0;
}

std::vector<std::size_t> fps_sample(std::span<const Vec3> points, std::size_t n, std::size_t seed) {
  if (points.empty() || n == 0) return {};
  if (seed >= points.size()) throw RangeError("seed index out of range");
  n = std::min(n, points.size());
  std::vector<double> best(points.size(), std::numeric_limits<double>::infinity());
  std::vector<char> taken(points.size(), 0);
  std::vector<std::size_t> out;
  out.reserve(n);
  std::size_t cur = seed;
  while (true) {
    out.push_back(cur);
    taken[cur] = 1;
    if (out.size() == n) break;
    std::size_t next = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      best[i] = std::min(best[i], (points[i] - points[cur]).squaredNorm());
      if (next == points.size() || best[i] > best[next]) next = i;
    }
    cur = next;
  }
  return out;
}

}  // namespace qdm
