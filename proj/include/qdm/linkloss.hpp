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

// Forward values of the centroid-vertex contrastive objective: squared
// feature distance, margin violation, hard-negative mining, the triplet
// hinge loss and its k / margin schedules, plus farthest point sampling for
// negative pools.

#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "qdm/features.hpp"
#include "qdm/mesh.hpp"

namespace qdm {

/// ||u - v||^2. StructureError on dimension mismatch.
double sq_dist(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// d(A,P) - d(A,N); larger means a harder negative.
inline double violation(double d_ap, double d_an) { return d_ap - d_an; }

/// Indices of the min(k, n) largest violations, ties by ascending index,
/// returned in rank order.
std::vector<std::size_t> topk_hard_negatives(double d_ap, std::span<const double> d_an,
                                             std::size_t k);

/// Embedding table plus (anchor, positive, negatives) index triplets into it.
struct EmbeddingBatch {
  struct Triplet {
    std::size_t anchor = 0;
    std::size_t positive = 0;
    std::vector<std::size_t> negatives;
  };

  std::vector<Eigen::VectorXd> points;
  std::vector<Triplet> triplets;

  /// StructureError on bad indices or mixed dimensions.
  void validate() const;
};

/// Mean over triplets of the mean hinge max(0, d_ap - d_an + margin) over the
/// top-k hardest negatives. Triplets without negatives are left out of the
/// outer mean; 0 when no triplet has negatives. Per-triplet terms are
/// computed in parallel and summed in index order.
double triplet_loss(const EmbeddingBatch& batch, std::size_t k, double margin);

/// Same with every negative of each triplet (no mining).
double triplet_loss_all(const EmbeddingBatch& batch, double margin);

/// One triplet per (face, corner): anchor = face centroid row, positive =
/// corner vertex row, negatives = every vertex not on the face. `features`
/// holds vertex rows then centroid rows as in the anchor file.
EmbeddingBatch batch_from_mesh(const FeatureTable& features, const PolyMesh& gt);

struct MiningSchedule {
  int k_min = 20;
  int k_max = 50;
  // Per-epoch growth of k. Unset: chosen so k reaches k_max at 60% of
  // total_epochs.
  std::optional<double> alpha;
  double margin_start = 0.2;
  double margin_end = 0.3;
  int total_epochs = 100;

  double effective_alpha() const;
  void validate() const;
};

/// min(k_max, k_min + floor(alpha t)).
int k_schedule(int t, const MiningSchedule& s);

/// Cosine ramp from margin_start to margin_end over total_epochs, clamped
/// beyond.
double margin_schedule(double t, const MiningSchedule& s);

/// Farthest point sampling from `seed`; ties by ascending index. n larger
/// than the input returns every index.
std::vector<std::size_t> fps_sample(std::span<const Vec3> points, std::size_t n, std::size_t seed);

}  // namespace qdm
