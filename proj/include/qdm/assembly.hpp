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

// Face assembly from anchors: every centroid independently retrieves its
// nearest vertices in a feature space, enumerates vertex subsets of a
// growing pool in order of mean feature distance, and keeps the first
// subset that forms a valid quad (or, failing that, a valid triangle).

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qdm/features.hpp"
#include "qdm/mesh.hpp"
#include "qdm/tokenizer.hpp"
#include "qdm/verify.hpp"

namespace qdm {

/// Distance between a centroid and a vertex of an anchor set. Implementations
/// are immutable after construction and safe to query concurrently.
class FeatureSpace {
 public:
  virtual ~FeatureSpace() = default;

  virtual std::size_t num_vertices() const = 0;
  virtual std::size_t num_centroids() const = 0;

  /// Squared feature distance, >= 0.
  virtual double distance(std::size_t centroid, std::size_t vertex) const = 0;
};

/// Raw coordinates as features.
class EuclideanFeatures final : public FeatureSpace {
 public:
  explicit EuclideanFeatures(const AnchorSet& anchors) : a_(&anchors) {}
  std::size_t num_vertices() const override { return a_->vertices.size(); }
  std::size_t num_centroids() const override { return a_->centroids.size(); }
  double distance(std::size_t c, std::size_t v) const override;

 private:
  const AnchorSet* a_;
};

/// Rows of a feature table: vertices first, centroids after.
class TableFeatures final : public FeatureSpace {
 public:
  TableFeatures(FeatureTable table, std::size_t num_vertices, std::size_t num_centroids);
  std::size_t num_vertices() const override { return nv_; }
  std::size_t num_centroids() const override { return nc_; }
  double distance(std::size_t c, std::size_t v) const override;

 private:
  FeatureTable t_;
  std::size_t nv_, nc_;
};

/// Ground-truth incidence: each anchor vertex is matched to the nearest mesh
/// vertex and each centroid to the face with the nearest centroid. Incident
/// pairs are at distance |c - v|^2, others at kNonIncident + |c - v|^2.
class OracleFeatures final : public FeatureSpace {
 public:
  static constexpr double kNonIncident = 1e3;

  OracleFeatures(const AnchorSet& anchors, const PolyMesh& gt);
  std::size_t num_vertices() const override { return a_->vertices.size(); }
  std::size_t num_centroids() const override { return a_->centroids.size(); }
  double distance(std::size_t c, std::size_t v) const override;

 private:
  const AnchorSet* a_;
  std::vector<Index> vertex_to_gt_;
  std::vector<std::vector<Index>> centroid_face_;  // sorted gt vertex ids
};

struct AssemblyConfig {
  int top_k = 20;
  int pool_max = 20;
  VerifyConfig verify;

  void validate() const;
};

/// K nearest vertices of centroid `c`, ascending distance, ties by index.
/// StructureError with fewer than 3 vertices.
std::vector<Index> retrieve_topk(const FeatureSpace& fs, std::size_t c, int k);

/// Progressive cached subset enumeration. The pool starts as the first `k`
/// shortlist entries and grows by one entry up to min(pool_max, shortlist
/// size). At each pool size, subsets not produced before come out in
/// ascending mean distance, ties by index tuple.
class PcfsEnumerator {
 public:
  /// `shortlist` are vertex ids, `dist` their distances to the centroid.
  PcfsEnumerator(std::vector<Index> shortlist, std::vector<double> dist, int k, int pool_max);

  /// Next subset as vertex ids in shortlist rank order; nullopt when done.
  std::optional<std::vector<Index>> next();

  int pool_size() const { return pool_; }

 private:
  void fill();

  std::vector<Index> ids_;
  std::vector<double> dist_;
  int k_;
  int pool_limit_;
  int pool_ = 0;
  std::vector<std::vector<int>> pending_;  // rank positions, best last
  std::unordered_set<std::uint64_t> tested_;
};

/// Orders 3 or 4 points into a cycle: polar angle in the best-fit plane,
/// counter-clockwise about the plane normal whose first component with
/// |c| > 1e-12 is positive, starting at the lowest vertex id. Returns the
/// reordered ids. DegenerateError for (nearly) collinear input.
std::vector<Index> order_cycle(std::span<const Index> ids, std::span<const Vec3> positions);

enum class FaceKind { kQuad, kTri };

struct AssembledFace {
  std::size_t centroid = 0;
  std::vector<Index> cycle;
  FaceKind kind = FaceKind::kQuad;

  bool operator==(const AssembledFace&) const = default;
};

/// Every subset handed to verification, in order. Test hook.
struct AssemblyTrace {
  std::vector<std::vector<Index>> tested;
};

std::optional<AssembledFace> assemble_face(std::size_t c, const AnchorSet& anchors,
                                           const FeatureSpace& fs, const AssemblyConfig& cfg,
                                           AssemblyTrace* trace = nullptr);

struct AssembledMesh {
  std::vector<AssembledFace> faces;   // ascending centroid index
  std::vector<std::size_t> unresolved;
  double recon_rate = 0.0;            // resolved / total centroids
  double seconds = 0.0;

  PolyMesh to_mesh(const AnchorSet& anchors) const;
};

/// Centroids are assembled in parallel; equals assemble_mesh_serial apart
/// from `seconds`.
AssembledMesh assemble_mesh(const AnchorSet& anchors, const FeatureSpace& fs,
                            const AssemblyConfig& cfg);
AssembledMesh assemble_mesh_serial(const AnchorSet& anchors, const FeatureSpace& fs,
                                   const AssemblyConfig& cfg);

}  // namespace qdm
