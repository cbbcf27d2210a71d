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

// Triangle-pair merging. Every internal edge shared by two triangles is a
// candidate whose removal yields an implied quad; candidates are scored by
// corner regularity and by alignment with the local principal direction,
// filtered geometrically, and selected with a matching over faces.

#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdm/matching.hpp"
#include "qdm/mesh.hpp"
#include "qdm/verify.hpp"

namespace qdm {

enum class MergeMode { kGlobal, kGreedy };

const char* to_string(MergeMode m);
MergeMode parse_merge_mode(std::string_view s);

struct OperatorConfig {
  double alpha1 = 0.8;  // corner regularity
  double alpha2 = 0.2;  // principal-direction alignment
  VerifyConfig verify = default_verify();
  MergeMode mode = MergeMode::kGlobal;
  // Off: every candidate that passes the orientation gate reaches the
  // matching, geometry checks are skipped.
  bool prefilter = true;

  static VerifyConfig default_verify() {
    VerifyConfig v;
    v.enable_centroid = false;
    return v;
  }

  void validate() const;
  std::string to_text() const;
  static OperatorConfig from_text(std::string_view text, const OperatorConfig& base);
  static OperatorConfig from_text(std::string_view text);
};

struct MergeCandidate {
  EdgeKey edge;
  Index face_a = 0;  // lower face index
  Index face_b = 0;
  // (c, a, d, b) where face_a = (a, b, c) up to rotation and face_b holds d.
  std::array<Index, 4> quad{};
  double q_angle = 0.0;
  double q_align = 0.0;
  double weight = 0.0;
  bool principal_fallback = false;
};

/// One candidate per edge with exactly two incident faces, both triangles.
/// Ordered by edge key.
std::vector<MergeCandidate> enumerate_candidates(const PolyMesh& mesh);
std::vector<MergeCandidate> enumerate_candidates(const PolyMesh& mesh, const EdgeFaceMap& map);

/// (1/360) * sum max(0, 90 - |theta_i - 90|) over the 4 interior angles.
double q_angle_from_angles(std::span<const double> angles);

/// 0 for degenerate quads.
double q_angle(std::span<const Vec3> quad);

struct PrincipalDirection {
  Vec3 dir = Vec3::UnitX();
  bool fallback = false;
};

/// Precomputed adjacency for repeated principal-direction queries.
struct MeshNeighborhood {
  explicit MeshNeighborhood(const PolyMesh& mesh);

  const PolyMesh* mesh;
  std::vector<std::vector<Index>> neighbors;
  std::vector<std::vector<Index>> faces;
  std::vector<Vec3> face_newell;  // unnormalized, length = 2 * area
};

/// Dominant axis of the tangent-plane covariance of the one-ring of both
/// edge endpoints. Falls back to the in-plane perpendicular of the edge
/// (flagged) when the covariance has no distinct dominant axis. The sign is
/// canonical: first component with |c| > 1e-12 is positive.
PrincipalDirection principal_direction(const MeshNeighborhood& nb, EdgeKey edge);
PrincipalDirection principal_direction(const PolyMesh& mesh, EdgeKey edge);

/// sqrt(1 - (d . f)^2) for unit d, f; clamped to [0, 1].
double q_align(const Vec3& d, const Vec3& f);

/// Throws DegenerateError for a zero-length edge.
double q_align(const MeshNeighborhood& nb, EdgeKey edge);

/// Scores every candidate and keeps those with n_A . n_B > 0 that pass the
/// geometric checks (when cfg.prefilter). Output keeps input order. Runs
/// candidates in parallel; the result equals score_and_prefilter_serial.
std::vector<MergeCandidate> score_and_prefilter(const PolyMesh& mesh,
                                                std::span<const MergeCandidate> candidates,
                                                const OperatorConfig& cfg);
std::vector<MergeCandidate> score_and_prefilter_serial(const PolyMesh& mesh,
                                                       std::span<const MergeCandidate> candidates,
                                                       const OperatorConfig& cfg);

struct MergeResult {
  PolyMesh mesh;
  // Source faces of every output face: two for merged quads, one otherwise.
  std::vector<std::vector<Index>> origin;
  std::vector<MergeCandidate> scored;  // survivors of score_and_prefilter
  WeightedGraph graph;                 // nodes are input faces
  Matching matching;                   // indices into `scored`
  std::size_t merged = 0;
  std::size_t triangles_left = 0;
  std::size_t flipped = 0;
};

/// Output faces: merged quads in ascending candidate order, then every
/// unmerged input face in original order. Vertices are copied unchanged.
MergeResult merge(const PolyMesh& mesh, const OperatorConfig& cfg);

/// Reverses every two-source face whose Newell normal opposes the summed
/// source normals. Returns the number of flipped faces.
std::size_t enforce_normal_consistency(const PolyMesh& source, PolyMesh& merged,
                                       std::span<const std::vector<Index>> origin);

}  // namespace qdm
