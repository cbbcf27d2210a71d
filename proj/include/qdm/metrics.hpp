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

// Geometry metrics (Chamfer, Hausdorff, voxel IoU), topology metrics (quad
// ratio, opposite edge parallelism, edge flow continuity) and the edge flow
// ratio against feature lines of a reference mesh.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdm/kv_config.hpp"
#include "qdm/mesh.hpp"

namespace qdm {

struct SampledSurface {
  std::vector<Vec3> points;
  std::vector<Index> faces;  // source face of each sample
};

/// Area-weighted uniform samples; faces are fanned into triangles for
/// sampling only. DegenerateError on a zero-area mesh.
SampledSurface sample_surface(const PolyMesh& mesh, std::size_t n, std::uint64_t seed);

/// 0.5 * (mean_a min_b |a-b| + mean_b min_a |a-b|), plain distances.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);
double chamfer_serial(std::span<const Vec3> a, std::span<const Vec3> b);

/// Symmetric max-min distance.
double hausdorff(std::span<const Vec3> a, std::span<const Vec3> b);
double hausdorff_serial(std::span<const Vec3> a, std::span<const Vec3> b);

/// Solid occupancy on a res^3 grid; voxels vote with parity rays along x,
/// y and z and a voxel is inside on 2 of 3. The ray along axis a passes the
/// voxel center offset by kVoxelRayJitter[0] steps along axis (a+1)%3 and
/// kVoxelRayJitter[1] steps along (a+2)%3, off any lattice the mesh may sit on.
inline constexpr double kVoxelRayJitter[2] = {0.0137, 0.0071};

struct VoxelGrid {
  int res = 0;
  Vec3 origin = Vec3::Zero();
  Vec3 step = Vec3::Zero();
  std::vector<std::uint8_t> occ;  // x fastest

  std::size_t count() const;
};

VoxelGrid voxelize(const PolyMesh& mesh, const Aabb& box, int res);
VoxelGrid voxelize_serial(const PolyMesh& mesh, const Aabb& box, int res);

struct IouResult {
  double value = 1.0;
  bool both_empty = false;
};

/// Occupancy over the joint bounding box, padded by half a voxel.
IouResult voxel_iou(const PolyMesh& a, const PolyMesh& b, int res);

struct FaceCensus {
  std::size_t tris = 0, quads = 0, others = 0;
  std::size_t total() const { return tris + quads + others; }
};

FaceCensus face_census(const PolyMesh& mesh);

/// Fraction of degree-4 faces. UndefinedMetricError without faces.
double quad_ratio(const PolyMesh& mesh);

/// Mean over quads of (|cos(e0,e2)| + |cos(e1,e3)|) / 2. Quads with a
/// zero-length edge are skipped. UndefinedMetricError without quads.
double oep(const PolyMesh& mesh);

/// For every edge shared by exactly two quads and each of its endpoints,
/// |cos| between the edges of the two quads that leave the shared edge at
/// that endpoint; mean over all of them. UndefinedMetricError without a
/// quad-quad adjacency.
double efc(const PolyMesh& mesh);

struct EfrConfig {
  double delta_long = 0.05;
  double delta_loop = 0.01;
  double ang_long = 0.12;  // radians
  double ang_loop = 0.78;  // radians
  int resample_m = 100;  // minimum; raised to keep samples delta/2 apart
  int resample_ns = 500;
  double tau = 0.02;
  double sharp_dihedral_deg = 30.0;

  void validate() const;
  std::string to_text() const;
  /// Unknown keys are a ParseError.
  static EfrConfig from_text(std::string_view text);
  bool apply(const KvConfig& kv, const std::string& key);
};

struct FeatureLine {
  enum class Kind { kLong, kLoop };
  Kind kind = Kind::kLong;
  std::vector<Index> vertices;  // loops do not repeat the first vertex
  std::vector<Vec3> points;

  bool closed() const { return kind == Kind::kLoop; }
};

/// Hard edges are boundary edges, non-manifold edges and edges whose fold
/// angle exceeds sharp_dihedral_deg. Hard-edge chains are cut at vertices
/// of hard degree other than 2; a chain that closes on itself is a loop.
std::vector<FeatureLine> extract_feature_lines(const PolyMesh& gt, const EfrConfig& cfg);

/// `n` points evenly spaced by arc length. Open curves keep both ends;
/// closed curves include the closing segment and start at points[0].
/// DegenerateError on zero length.
std::vector<Vec3> resample_polyline(std::span<const Vec3> points, bool closed, std::size_t n);

/// min over forward and reversed pairing of the mean pointwise distance
/// after resampling both curves to `ns` points. With `closed`, both curves
/// are loops: `q` is re-started at its point nearest p[0] and reversal keeps
/// that start.
double curve_distance(std::span<const Vec3> p, std::span<const Vec3> q, int ns, bool closed = false);

struct TracedChain {
  std::vector<Index> vertices;
  double distance = 0.0;
};

/// Greedy tangent-following chain on `out` that best matches `feature`,
/// or nullopt when no chain of at least 2 vertices exists.
std::optional<TracedChain> trace_chain(const FeatureLine& feature, const PolyMesh& out,
                                       const EfrConfig& cfg);

/// Same, with the output one-rings precomputed.
std::optional<TracedChain> trace_chain(const FeatureLine& feature, const PolyMesh& out,
                                       const std::vector<std::vector<Index>>& neighbors,
                                       const EfrConfig& cfg);

struct EfrResult {
  double value = 0.0;
  std::size_t lines = 0, loops = 0, matched = 0;
  std::vector<double> scores;  // per feature, extraction order
};

/// Mean of exp(-d / tau) over ground-truth features; unmatched features
/// score 0. UndefinedMetricError when the reference has no features.
EfrResult efr(const PolyMesh& gt, const PolyMesh& out, const EfrConfig& cfg);

}  // namespace qdm
