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


#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "qdm/error.hpp"
#include "qdm/goldberg.hpp"
#include "qdm/kdtree.hpp"
#include "qdm/verify.hpp"
#include "shapes.hpp"

namespace {

using namespace qdm;

std::vector<GoldbergParams> params_up_to(long long t_max) {
  std::vector<GoldbergParams> out;
  for (int m = 1; 1LL * m * m <= t_max; ++m) {
    for (int n = 0; n <= m; ++n) {
      const GoldbergParams p{m, n};
      if (p.t() <= t_max) out.push_back(p);
    }
  }
  return out;
}

std::size_t edge_count(const PolyMesh& m) { return EdgeFaceMap(m).size(); }

double face_area(const PolyMesh& m, const Face& f) {
  std::vector<Vec3> cyc;
  for (Index v : f) cyc.push_back(m.vertices[v]);
  return 0.5 * newell_vector(cyc).norm();
}

// Largest distance of a face vertex from the plane through the face
// centroid with the Newell normal.
double planarity_defect(const PolyMesh& m) {
  double worst = 0.0;
  for (const Face& f : m.faces) {
    std::vector<Vec3> cyc;
    Vec3 c = Vec3::Zero();
    for (Index v : f) {
      cyc.push_back(m.vertices[v]);
      c += m.vertices[v];
    }
    c /= static_cast<double>(f.size());
    const Vec3 n = newell_normal(cyc);
    for (const Vec3& p : cyc) worst = std::max(worst, std::abs(n.dot(p - c)));
  }
  return worst;
}

HullMesh hull_of(const PolyMesh& m) { return convex_hull(m.vertices); }

PolyMesh octahedron() {
  PolyMesh m;
  m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  return m;
}

// --- params and lattice -----------------------------------------------------------

TEST(GoldbergParams, Validation) {
  EXPECT_THROW((GoldbergParams{0, 0}.validate()), RangeError);
  EXPECT_THROW((GoldbergParams{1, 2}.validate()), RangeError);
  EXPECT_THROW((GoldbergParams{2, -1}.validate()), RangeError);
  EXPECT_NO_THROW((GoldbergParams{1, 0}.validate()));
  EXPECT_NO_THROW((GoldbergParams{3, 3}.validate()));
  EXPECT_EQ((GoldbergParams{2, 1}.t()), 7);
  EXPECT_EQ((GoldbergParams{18, 0}.t()), 324);
  EXPECT_THROW(lattice_points({0, 0}), RangeError);
}

TEST(LatticePoints, UnitTriangle) {
  const std::vector<std::pair<int, int>> want = {{0, 0}, {0, 1}, {1, 0}};
  EXPECT_EQ(lattice_points({1, 0}), want);
}

TEST(LatticePoints, MatchesBruteForceScan) {
  for (const GoldbergParams& p : params_up_to(49)) {
    const long long m = p.m, n = p.n, t = p.t();
    std::vector<std::pair<int, int>> want;
    for (long long a = -t; a <= t; ++a) {
      for (long long b = -t; b <= t; ++b) {
        if ((m + n) * a + n * b >= 0 && m * b - n * a >= 0 && t - m * a - (m + n) * b >= 0) {
          want.emplace_back(static_cast<int>(a), static_cast<int>(b));
        }
      }
    }
    EXPECT_EQ(lattice_points(p), want) << p.m << "," << p.n;
  }
}

// --- icosahedron and projection -------------------------------------------------------

TEST(Icosahedron, OutwardUnitFaces) {
  const PolyMesh ico = icosahedron();
  ASSERT_EQ(ico.vertices.size(), 12u);
  ASSERT_EQ(ico.faces.size(), 20u);
  EXPECT_EQ(edge_count(ico), 30u);
  for (const Vec3& v : ico.vertices) EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  for (std::size_t f = 0; f < ico.faces.size(); ++f) {
    const auto g = face_geometry(ico, f);
    EXPECT_GT(g.newell_normal.normalized().dot(face_centroid(ico, f)), 0.5);
  }
}

TEST(Project, UnitTriangleGivesIcosahedronVertices) {
  const GoldbergParams p{1, 0};
  const std::vector<Vec3> pts = project_to_icosahedron(lattice_points(p), p);
  ASSERT_EQ(pts.size(), 12u);
  const PolyMesh ico = icosahedron();
  const KdTree tree(ico.vertices);
  std::set<std::size_t> hit;
  for (const Vec3& q : pts) {
    const Nearest nn = tree.nearest(q);
    EXPECT_LT(nn.sq_dist, 1e-24);
    hit.insert(nn.index);
  }
  EXPECT_EQ(hit.size(), 12u);
}

TEST(Project, CountAndUnitLength) {
  for (const GoldbergParams& p : params_up_to(100)) {
    const std::vector<Vec3> pts = project_to_icosahedron(lattice_points(p), p);
    EXPECT_EQ(static_cast<long long>(pts.size()), 10 * p.t() + 2) << p.m << "," << p.n;
    for (const Vec3& q : pts) ASSERT_NEAR(q.norm(), 1.0, 1e-12);
    // Merged images are really distinct points.
    double closest = 1e9;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) closest = std::min(closest, (pts[i] - pts[j]).norm());
    }
    EXPECT_GT(closest, 1e-3);
  }
}

TEST(Project, ParallelMatchesSerial) {
  for (const GoldbergParams& p : {GoldbergParams{5, 2}, GoldbergParams{10, 0}, GoldbergParams{9, 9}}) {
    const auto lat = lattice_points(p);
    EXPECT_EQ(project_to_icosahedron(lat, p), project_to_icosahedron_serial(lat, p));
  }
}

TEST(Project, EmptyLatticeThrows) { EXPECT_THROW(project_to_icosahedron({}, {1, 0}), StructureError); }

// --- hull -------------------------------------------------------------------------

TEST(ConvexHull, Tetrahedron) {
  const std::vector<Vec3> pts = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const HullMesh h = convex_hull(pts);
  EXPECT_EQ(h.faces.size(), 4u);
  EXPECT_EQ(h.vertices.size(), 4u);
}

TEST(ConvexHull, OctahedronAndInteriorPoint) {
  PolyMesh oct = octahedron();
  oct.vertices.insert(oct.vertices.begin() + 3, Vec3(0.1, 0.2, -0.1));
  const HullMesh h = convex_hull(oct.vertices);
  EXPECT_EQ(h.faces.size(), 8u);
  EXPECT_EQ(h.vertices.size(), 6u);
  for (const Vec3& v : h.vertices) EXPECT_DOUBLE_EQ(v.norm(), 1.0);
}

TEST(ConvexHull, GeodesicT3Has60Faces) {
  const GoldbergParams p{1, 1};
  const HullMesh h = convex_hull(project_to_icosahedron(lattice_points(p), p));
  EXPECT_EQ(h.faces.size(), 60u);
  EXPECT_EQ(h.vertices.size(), 32u);
}

TEST(ConvexHull, DegenerateInput) {
  EXPECT_THROW(convex_hull({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), DegenerateError);
  EXPECT_THROW(convex_hull({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 3, 0}}), DegenerateError);
  EXPECT_THROW(convex_hull({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}}), DegenerateError);
  EXPECT_THROW(convex_hull({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), DegenerateError);
}

TEST(ConvexHull, ConvexClosedOutwardProperty) {
  std::vector<std::vector<Vec3>> sets;
  for (const GoldbergParams& p : {GoldbergParams{2, 0}, GoldbergParams{3, 2}, GoldbergParams{7, 7}}) {
    sets.push_back(project_to_icosahedron(lattice_points(p), p));
  }
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int s = 0; s < 5; ++s) {
    std::vector<Vec3> cloud;
    for (int i = 0; i < 300; ++i) cloud.emplace_back(g(rng), 0.5 * g(rng), 2.0 * g(rng));
    sets.push_back(cloud);
  }
  for (const auto& pts : sets) {
    const HullMesh h = convex_hull(pts);
    const PolyMesh mesh = h.to_mesh();
    const std::size_t e = edge_count(mesh);
    EXPECT_EQ(static_cast<long long>(h.vertices.size()) - static_cast<long long>(e) +
                  static_cast<long long>(h.faces.size()),
              2);
    // Closed: every edge in exactly two faces, each direction once.
    const EdgeFaceMap efm(mesh);
    for (const auto& [key, fs] : efm.edges()) ASSERT_EQ(fs.size(), 2u);
    Vec3 inside = Vec3::Zero();
    for (const Vec3& v : h.vertices) inside += v;
    inside /= static_cast<double>(h.vertices.size());
    for (const auto& f : h.faces) {
      const Vec3& a = h.vertices[f[0]];
      const Vec3 n = (h.vertices[f[1]] - a).cross(h.vertices[f[2]] - a).normalized();
      EXPECT_LT(n.dot(inside - a), 0.0);
      for (const Vec3& p : pts) ASSERT_LE(n.dot(p - a), 1e-9);
    }
  }
}

// --- dual -------------------------------------------------------------------------

TEST(DualMesh, IcosahedronToDodecahedron) {
  const PolyMesh d = dual_mesh(hull_of(icosahedron()));
  EXPECT_EQ(d.vertices.size(), 20u);
  EXPECT_EQ(d.faces.size(), 12u);
  EXPECT_EQ(edge_count(d), 30u);
  for (const Face& f : d.faces) EXPECT_EQ(f.size(), 5u);
  // Double dual, on counts: vertices and faces swap back, edges stay.
  const PolyMesh ico = icosahedron();
  EXPECT_EQ(d.faces.size(), ico.vertices.size());
  EXPECT_EQ(d.vertices.size(), ico.faces.size());
  EXPECT_EQ(edge_count(d), edge_count(ico));
}

TEST(DualMesh, OctahedronToCube) {
  const PolyMesh d = dual_mesh(hull_of(octahedron()));
  EXPECT_EQ(d.vertices.size(), 8u);
  ASSERT_EQ(d.faces.size(), 6u);
  for (std::size_t f = 0; f < d.faces.size(); ++f) {
    ASSERT_EQ(d.faces[f].size(), 4u);
    // Outward and square.
    const auto g = face_geometry(d, f);
    EXPECT_GT(g.newell_normal.dot(face_centroid(d, f)), 0.0);
    const double side = (d.vertices[d.faces[f][0]] - d.vertices[d.faces[f][1]]).norm();
    EXPECT_NEAR(side, 2.0 / std::sqrt(3.0), 1e-12);
  }
}

TEST(DualMesh, PolarVerticesArePlanePoles) {
  const HullMesh h = hull_of(octahedron());
  const PolyMesh d = dual_mesh(h, DualPlacement::kPolar);
  for (const Vec3& v : d.vertices) EXPECT_NEAR(v.cwiseAbs().maxCoeff(), 1.0, 1e-12);
  for (const Vec3& v : d.vertices) EXPECT_NEAR(v.norm(), std::sqrt(3.0), 1e-12);
}

TEST(DualMesh, NonManifoldVertexThrows) {
  // Two tetrahedra glued at vertex 0 only.
  HullMesh h;
  h.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
  h.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}, {0, 4, 5}, {0, 6, 4}, {0, 5, 6}, {4, 6, 5}};
  h.vertex_faces.assign(h.vertices.size(), {});
  for (Index f = 0; f < h.faces.size(); ++f) {
    for (Index v : h.faces[f]) h.vertex_faces[v].push_back(f);
  }
  EXPECT_THROW(dual_mesh(h), StructureError);
}

// --- goldberg ---------------------------------------------------------------------

TEST(Goldberg, WorkedCounts) {
  const PolyMesh g10 = goldberg({1, 0});
  EXPECT_EQ(g10.vertices.size(), 20u);
  EXPECT_EQ(edge_count(g10), 30u);
  EXPECT_EQ(g10.faces.size(), 12u);
  for (const Face& f : g10.faces) EXPECT_EQ(f.size(), 5u);

  const PolyMesh g11 = goldberg({1, 1});
  EXPECT_EQ(g11.vertices.size(), 60u);
  EXPECT_EQ(edge_count(g11), 90u);
  EXPECT_EQ(g11.faces.size(), 32u);

  const PolyMesh g21 = goldberg({2, 1});
  std::size_t pent = 0, hex = 0;
  for (const Face& f : g21.faces) {
    pent += f.size() == 5;
    hex += f.size() == 6;
  }
  EXPECT_EQ(g21.faces.size(), 72u);
  EXPECT_EQ(pent, 12u);
  EXPECT_EQ(hex, 60u);
}

TEST(Goldberg, NormalizedToUnitCube) {
  const PolyMesh g = goldberg({4, 1});
  const Aabb box = bounding_box(g.vertices);
  EXPECT_NEAR((box.hi - box.lo).maxCoeff(), 2.0, 1e-12);
  EXPECT_LE(box.hi.maxCoeff(), 1.0 + 1e-12);
  EXPECT_GE(box.lo.minCoeff(), -1.0 - 1e-12);
}

TEST(ValidateCounts, Examples) {
  const CountReport r1 = validate_counts(goldberg({1, 0}), {1, 0});
  EXPECT_TRUE(r1.passed());
  EXPECT_EQ(r1.summary(), "counts: V=20 E=30 F=12 OK");

  const CountReport r3 = validate_counts(goldberg({3, 0}), {3, 0});
  EXPECT_TRUE(r3.passed());
  EXPECT_EQ(r3.summary(), "counts: V=180 E=270 F=92 OK");

  const CountReport cube = validate_counts(shapes::box_quads(), {1, 0});
  EXPECT_FALSE(cube.passed());
  bool pent_failed = false;
  for (const auto& c : cube.checks) pent_failed |= c.name == "pentagons" && !c.passed();
  EXPECT_TRUE(pent_failed);
  EXPECT_NE(cube.summary().find("FAIL"), std::string::npos);
  EXPECT_NE(cube.summary().find("pentagons: expected 12, got 0"), std::string::npos);
}

TEST(Goldberg, CountsHoldUpToT400) {
  const auto all = params_up_to(400);
  auto has = [&](int m, int n) {
    return std::any_of(all.begin(), all.end(), [&](const GoldbergParams& p) { return p.m == m && p.n == n; });
  };
  EXPECT_TRUE(has(20, 0));   // T = 400
  EXPECT_TRUE(has(11, 9));   // T = 301
  EXPECT_FALSE(has(20, 1));  // T = 421
  for (const GoldbergParams& p : all) {
    const CountReport r = validate_counts(goldberg(p), p);
    EXPECT_TRUE(r.passed()) << p.m << "," << p.n << ": " << r.summary();
  }
}

TEST(Goldberg, ThreeValentEverywhere) {
  for (const GoldbergParams& p : params_up_to(100)) {
    const PolyMesh g = goldberg(p);
    const auto nb = vertex_neighbors(g);
    for (std::size_t v = 0; v < nb.size(); ++v) ASSERT_EQ(nb[v].size(), 3u) << p.m << "," << p.n;
  }
}

TEST(Goldberg, FacesConvexAndOutward) {
  for (const GoldbergParams& p : {GoldbergParams{2, 1}, GoldbergParams{4, 0}, GoldbergParams{6, 3}}) {
    const PolyMesh g = goldberg(p);
    for (std::size_t f = 0; f < g.faces.size(); ++f) {
      const auto geo = face_geometry(g, f);
      ASSERT_GT(geo.newell_normal.dot(face_centroid(g, f)), 0.0);
      std::vector<Vec3> cyc;
      for (Index v : g.faces[f]) cyc.push_back(g.vertices[v]);
      double sum = 0.0;
      for (double a : interior_angles(cyc)) {
        ASSERT_LT(a, 180.0);
        sum += a;
      }
      // Slightly non-planar hexagons fall just short of 720.
      EXPECT_NEAR(sum, 180.0 * (g.faces[f].size() - 2), 1.0);
    }
  }
}

TEST(Goldberg, PolarPlacementIsPlanar) {
  for (const GoldbergParams& p : params_up_to(100)) {
    const PolyMesh g = goldberg(p, DualPlacement::kPolar);
    EXPECT_LT(planarity_defect(g), 1e-6) << p.m << "," << p.n;
    EXPECT_TRUE(validate_counts(g, p).passed());
  }
}

TEST(Goldberg, CentroidPlacementIsNotPlanar) {
  // Hexagon vertices on the sphere cannot all lie in one plane once T > 3.
  EXPECT_LT(planarity_defect(goldberg({1, 0})), 1e-12);
  EXPECT_LT(planarity_defect(goldberg({1, 1})), 1e-12);
  EXPECT_GT(planarity_defect(goldberg({2, 0})), 1e-3);
  EXPECT_GT(planarity_defect(goldberg({5, 2})), 1e-4);
}

TEST(Goldberg, IcosahedralRotationSymmetry) {
  const PolyMesh ico = icosahedron();
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(2.0 * M_PI / 5.0, ico.vertices[0]).toRotationMatrix();
  for (const GoldbergParams& p : {GoldbergParams{3, 0}, GoldbergParams{2, 1}, GoldbergParams{4, 3}}) {
    for (DualPlacement place : {DualPlacement::kCentroid, DualPlacement::kPolar}) {
      const PolyMesh g = dual_mesh(convex_hull(project_to_icosahedron(lattice_points(p), p)), place);
      const KdTree tree(g.vertices);
      std::vector<Index> image(g.vertices.size());
      for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        const Nearest nn = tree.nearest(rot * g.vertices[v]);
        ASSERT_LT(std::sqrt(nn.sq_dist), 1e-9);
        image[v] = static_cast<Index>(nn.index);
      }
      // Faces map onto faces of the same area.
      std::map<std::vector<Index>, double> area_of;
      for (const Face& f : g.faces) {
        std::vector<Index> key(f.begin(), f.end());
        std::sort(key.begin(), key.end());
        area_of[key] = face_area(g, f);
      }
      for (const Face& f : g.faces) {
        std::vector<Index> key;
        for (Index v : f) key.push_back(image[v]);
        std::sort(key.begin(), key.end());
        const auto it = area_of.find(key);
        ASSERT_NE(it, area_of.end());
        EXPECT_NEAR(it->second, face_area(g, f), 1e-9);
      }
    }
  }
}

}  // namespace
