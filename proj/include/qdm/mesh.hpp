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

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace qdm {

using Vec3 = Eigen::Vector3d;
using Index = std::uint32_t;
using Face = std::vector<Index>;

/// Indexed polygon mesh. Faces are vertex-index cycles of length >= 3; the
/// authored vertex order defines orientation.
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
  std::size_t degree(std::size_t f) const { return faces[f].size(); }

  /// Throws StructureError if any face invariant is broken.
  void validate() const;

  /// Positions of face `f` in cycle order.
  std::vector<Vec3> face_points(std::size_t f) const;
};

/// Unordered vertex pair, stored with `first < second`.
struct EdgeKey {
  Index first;
  Index second;

  EdgeKey() = default;
  EdgeKey(Index a, Index b) : first(a < b ? a : b), second(a < b ? b : a) {}

  auto operator<=>(const EdgeKey&) const = default;
};

/// Edge -> incident faces, ordered by edge key; incidence lists ascend.
class EdgeFaceMap {
 public:
  using Map = std::map<EdgeKey, std::vector<Index>>;

  explicit EdgeFaceMap(const PolyMesh& mesh);

  const Map& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }

  /// Empty span for absent edges.
  std::span<const Index> faces_of(EdgeKey e) const;

  bool is_internal(EdgeKey e) const { return faces_of(e).size() == 2; }
  bool is_boundary(EdgeKey e) const { return faces_of(e).size() == 1; }

  std::size_t count_internal() const;
  std::size_t count_boundary() const;

 private:
  Map edges_;
};

inline EdgeFaceMap build_edge_face_map(const PolyMesh& mesh) {
  return EdgeFaceMap(mesh);
}

struct FaceGeometry {
  Vec3 centroid;
  Vec3 newell_normal;
  double area = 0.0;
};

PolyMesh load_obj(const std::filesystem::path& path);
PolyMesh read_obj(std::istream& in);
void save_obj(const PolyMesh& mesh, const std::filesystem::path& path);
void write_obj(const PolyMesh& mesh, std::ostream& out);

/// Uniform scale + translation so the bounding box is centered at the origin
/// and the longest axis spans exactly [-1, 1].
PolyMesh normalize_unit_cube(const PolyMesh& mesh);

Vec3 face_centroid(const PolyMesh& mesh, std::size_t face);

/// Unnormalized Newell vector; its length is twice the (projected) polygon
/// area.
Vec3 newell_vector(std::span<const Vec3> cycle);

/// Unit Newell normal. Throws DegenerateError on a zero-magnitude vector.
Vec3 newell_normal(std::span<const Vec3> cycle);

FaceGeometry face_geometry(const PolyMesh& mesh, std::size_t face);

/// Per-vertex sorted list of distinct neighbor vertices (face-edge graph).
std::vector<std::vector<Index>> vertex_neighbors(const PolyMesh& mesh);

/// Per-vertex ascending list of incident faces.
std::vector<std::vector<Index>> vertex_faces(const PolyMesh& mesh);

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bool empty() const { return (lo.array() > hi.array()).any(); }
  Vec3 extent() const { return hi - lo; }
};

Aabb bounding_box(std::span<const Vec3> points);

}  // namespace qdm
