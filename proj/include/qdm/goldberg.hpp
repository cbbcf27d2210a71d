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

// Goldberg polyhedra: hex-lattice points of the fundamental triangle are
// mapped onto every icosahedron face and projected to the unit sphere; the
// convex hull of that point set is the geodesic triangulation and its dual
// is the Goldberg polyhedron.

#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "qdm/mesh.hpp"

namespace qdm {

struct GoldbergParams {
  int m = 1;
  int n = 0;

  /// RangeError unless m >= n >= 0 and (m, n) != (0, 0).
  void validate() const;
  long long t() const { return 1LL * m * m + 1LL * m * n + 1LL * n * n; }
};

/// Integer (a, b) with (m+n)a + nb >= 0, mb - na >= 0 and
/// T - ma - (m+n)b >= 0, in lexicographic order.
std::vector<std::pair<int, int>> lattice_points(const GoldbergParams& p);

/// Unit icosahedron, faces counter-clockwise seen from outside.
PolyMesh icosahedron();

/// Every lattice point on every icosahedron face via barycentric weights
/// ((T - ma - (m+n)b), ((m+n)a + nb), (mb - na)) / T, normalized to the unit
/// sphere; images closer than 1e-9 are merged, first occurrence wins.
std::vector<Vec3> project_to_icosahedron(const std::vector<std::pair<int, int>>& lattice,
                                         const GoldbergParams& p);
std::vector<Vec3> project_to_icosahedron_serial(const std::vector<std::pair<int, int>>& lattice,
                                                const GoldbergParams& p);

struct HullMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 3>> faces;  // outward
  std::vector<std::vector<Index>> vertex_faces;

  PolyMesh to_mesh() const;
};

/// Incremental hull. A point within 1e-12 of a face plane counts as seeing
/// that face, so co-circular points on a sphere all become hull vertices.
/// Points strictly inside are dropped. DegenerateError for fewer than 4
/// points or a (near) planar set.
HullMesh convex_hull(const std::vector<Vec3>& points);

enum class DualPlacement {
  kCentroid,  // hull-face centroid pushed to the unit sphere
  kPolar,     // pole n / d of the face plane n.x = d; every dual face is planar
};

/// One vertex per hull face and one face per hull vertex, ordered
/// counter-clockwise from outside. StructureError when a hull vertex is not
/// a simple fan.
PolyMesh dual_mesh(const HullMesh& hull, DualPlacement placement = DualPlacement::kCentroid);

/// Lattice, projection, hull and dual, scaled into [-1, 1]^3.
PolyMesh goldberg(const GoldbergParams& p, DualPlacement placement = DualPlacement::kCentroid);

struct CountReport {
  struct Check {
    std::string name;
    long long expected = 0;
    long long actual = 0;
    bool passed() const { return expected == actual; }
  };
  std::vector<Check> checks;

  bool passed() const;
  /// `counts: V=.. E=.. F=.. OK` or `... FAIL` followed by the failed checks.
  std::string summary() const;
};

/// V = 20T, E = 30T, F = 10T + 2, 12 pentagons, 10T - 10 hexagons and
/// V - E + F = 2.
CountReport validate_counts(const PolyMesh& mesh, const GoldbergParams& p);

}  // namespace qdm
