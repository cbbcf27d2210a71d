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
#include <cmath>
#include <random>

#include "qdm/error.hpp"
#include "qdm/kdtree.hpp"
#include "qdm/metrics.hpp"
#include "shapes.hpp"

namespace {

using namespace qdm;

PolyMesh transform(const PolyMesh& m, const Eigen::Matrix3d& r, double scale, const Vec3& t) {
  PolyMesh out = m;
  for (Vec3& v : out.vertices) v = scale * (r * v) + t;
  return out;
}

Eigen::Matrix3d some_rotation(double a) {
  return (Eigen::AngleAxisd(a, Vec3(1, 2, 3).normalized()) * Eigen::AngleAxisd(0.4, Vec3::UnitX()))
      .toRotationMatrix();
}

// --- sampling -----------------------------------------------------------------

TEST(SampleSurface, UniformOnSquare) {
  const PolyMesh sq = shapes::quad_grid(1, 1);
  const std::size_t n = 10000;
  const SampledSurface s = sample_surface(sq, n, 7);
  ASSERT_EQ(s.points.size(), n);
  std::size_t left = 0;
  for (const Vec3& p : s.points) {
    ASSERT_GE(p.x(), 0.0);
    ASSERT_LE(p.x(), 1.0);
    ASSERT_GE(p.y(), 0.0);
    ASSERT_LE(p.y(), 1.0);
    ASSERT_EQ(p.z(), 0.0);
    left += p.x() < 0.5;
  }
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_NEAR(static_cast<double>(left), n / 2.0, 3 * sigma);
}

TEST(SampleSurface, AreaWeighting) {
  PolyMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                {5, 0, 0}, {8, 0, 0}, {8, 1, 0}, {5, 1, 0}};
  m.faces = {{0, 1, 2, 3}, {4, 5, 6, 7}};
  const std::size_t n = 20000;
  const SampledSurface s = sample_surface(m, n, 3);
  std::size_t second = 0;
  for (Index f : s.faces) second += f == 1;
  EXPECT_NEAR(static_cast<double>(second), 0.75 * n, 3 * std::sqrt(n * 0.75 * 0.25));
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(s.faces[i] == 1, s.points[i].x() >= 5.0);
  }
}

TEST(SampleSurface, SingleSampleAndDeterminism) {
  const PolyMesh sq = shapes::quad_grid(1, 1);
  const SampledSurface one = sample_surface(sq, 1, 1);
  ASSERT_EQ(one.points.size(), 1u);
  EXPECT_EQ(one.points[0].z(), 0.0);
  EXPECT_EQ(sample_surface(sq, 50, 9).points, sample_surface(sq, 50, 9).points);
  EXPECT_NE(sample_surface(sq, 50, 9).points, sample_surface(sq, 50, 10).points);
}

TEST(SampleSurface, Errors) {
  PolyMesh flat;
  flat.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  flat.faces = {{0, 1, 2}};
  EXPECT_THROW(sample_surface(flat, 10, 0), DegenerateError);
  EXPECT_THROW(sample_surface(shapes::quad_grid(1, 1), 0, 0), RangeError);
  EXPECT_THROW(sample_surface(PolyMesh{}, 10, 0), StructureError);
}

// --- nearest neighbours ---------------------------------------------------------

TEST(KdTree, MatchesBruteForceIncludingTies) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> grid(-4, 4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts;
    const int n = 1 + trial * 37;
    for (int i = 0; i < n; ++i) {
      // Integer lattice points collide in distance all the time.
      pts.emplace_back(grid(rng), grid(rng), trial % 2 ? grid(rng) : u(rng));
    }
    const KdTree tree(pts);
    for (int q = 0; q < 200; ++q) {
      const Vec3 x(q % 3 ? grid(rng) + 0.5 : u(rng), grid(rng), grid(rng));
      const Nearest a = tree.nearest(x), b = nearest_brute(pts, x);
      ASSERT_EQ(a.index, b.index);
      ASSERT_EQ(a.sq_dist, b.sq_dist);
    }
  }
  EXPECT_THROW(KdTree(std::vector<Vec3>{}).nearest(Vec3::Zero()), StructureError);
}

TEST(Chamfer, Examples) {
  const std::vector<Vec3> zero = {Vec3(0, 0, 0)}, one = {Vec3(1, 0, 0)};
  EXPECT_DOUBLE_EQ(chamfer(zero, one), 1.0);
  const SampledSurface s = sample_surface(shapes::box_quads(), 2000, 5);
  EXPECT_EQ(chamfer(s.points, s.points), 0.0);
  std::vector<Vec3> moved = s.points;
  for (Vec3& p : moved) p += Vec3(1, 0, 0);
  const double cd = chamfer(s.points, moved);
  EXPECT_GT(cd, 0.0);
  EXPECT_LE(cd, 1.0);
}

TEST(Hausdorff, Examples) {
  const std::vector<Vec3> a = {Vec3(0, 0, 0), Vec3(10, 0, 0)}, b = {Vec3(0, 0, 0)};
  EXPECT_DOUBLE_EQ(hausdorff(a, b), 10.0);
  EXPECT_EQ(hausdorff(a, a), 0.0);
}

TEST(DistanceProperty, SymmetryOrderAndSerialTwin) {
  for (int seed = 0; seed < 5; ++seed) {
    const auto a = sample_surface(shapes::box_quads(), 1500, seed).points;
    const auto b = sample_surface(shapes::bumpy_blob(8, 12, seed), 1700, seed + 50).points;
    const double cd = chamfer(a, b), hd = hausdorff(a, b);
    EXPECT_EQ(cd, chamfer(b, a));
    EXPECT_EQ(hd, hausdorff(b, a));
    EXPECT_GE(hd, cd);
    EXPECT_EQ(cd, chamfer_serial(a, b));
    EXPECT_EQ(hd, hausdorff_serial(a, b));
  }
}

// --- voxels -------------------------------------------------------------------

// A point is inside a closed convex polyhedron iff it is behind every face
// plane (outward Newell normals).
bool inside_convex(const PolyMesh& m, const Vec3& p) {
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    std::vector<Vec3> cyc;
    for (Index v : m.faces[f]) cyc.push_back(m.vertices[v]);
    if (newell_vector(cyc).dot(p - cyc[0]) > 0) return false;
  }
  return true;
}

TEST(Voxelize, ConvexShapesMatchHalfspaceOracle) {
  for (const PolyMesh& m : {shapes::box_quads(1.0, 0.6, 0.3), shapes::uv_sphere(10, 14)}) {
    const Aabb box{Vec3::Constant(-1.3), Vec3::Constant(1.4)};
    const int res = 24;
    const VoxelGrid g = voxelize(m, box, res);
    std::size_t mismatch = 0, inside = 0;
    for (int z = 0; z < res; ++z)
      for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
          const Vec3 c = box.lo + Vec3(x + 0.5, y + 0.5, z + 0.5).cwiseProduct(g.step);
          // Majority over the three points the parity rays actually probe.
          int votes = 0;
          for (int a = 0; a < 3; ++a) {
            Vec3 probe = c;
            probe[(a + 1) % 3] += kVoxelRayJitter[0] * g.step[(a + 1) % 3];
            probe[(a + 2) % 3] += kVoxelRayJitter[1] * g.step[(a + 2) % 3];
            votes += inside_convex(m, probe);
          }
          const bool want = votes >= 2;
          inside += want;
          mismatch += want != static_cast<bool>(g.occ[(z * res + y) * res + x]);
        }
    EXPECT_GT(inside, 50u);
    EXPECT_EQ(mismatch, 0u);
    EXPECT_EQ(g.occ, voxelize_serial(m, box, res).occ);
  }
}

TEST(VoxelIou, Examples) {
  const PolyMesh cube = shapes::box_quads();
  EXPECT_EQ(voxel_iou(cube, cube, 32).value, 1.0);
  EXPECT_EQ(voxel_iou(cube, shapes::translate(cube, Vec3(3, 0, 0)), 32).value, 0.0);
  const double shifted = voxel_iou(cube, shapes::translate(cube, Vec3(0.5, 0, 0)), 48).value;
  EXPECT_NEAR(shifted, 1.0 / 3.0, 0.02);
  const IouResult empty = voxel_iou(PolyMesh{}, PolyMesh{}, 16);
  EXPECT_TRUE(empty.both_empty);
  EXPECT_EQ(empty.value, 1.0);
}

TEST(VoxelIou, LeakyMeshStillVotesInside) {
  // One missing face breaks parity along one axis only.
  PolyMesh open = shapes::box_quads();
  open.faces.pop_back();
  EXPECT_GT(voxel_iou(shapes::box_quads(), open, 32).value, 0.95);
}

TEST(VoxelIouProperty, BoundedAndSymmetric) {
  for (int seed = 0; seed < 4; ++seed) {
    const PolyMesh a = shapes::bumpy_blob(8, 12, seed);
    const PolyMesh b = shapes::translate(shapes::uv_sphere(8, 12), Vec3(0.1 * seed, 0, 0));
    const double ab = voxel_iou(a, b, 24).value, ba = voxel_iou(b, a, 24).value;
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(ab, ba);
  }
}

// --- topology -----------------------------------------------------------------

TEST(QuadRatio, Examples) {
  EXPECT_EQ(quad_ratio(shapes::box_quads()), 1.0);
  PolyMesh mixed;
  mixed.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {2, 0, 0}, {2, 1, 0}};
  mixed.faces = {{0, 1, 2, 3}, {1, 4, 5, 2}, {0, 1, 2}, {1, 4, 5}};
  EXPECT_EQ(quad_ratio(mixed), 0.5);
  EXPECT_EQ(quad_ratio(shapes::regular_polygon(5)), 0.0);
  EXPECT_THROW(quad_ratio(PolyMesh{}), UndefinedMetricError);
}

TEST(QuadRatioProperty, CensusSumsToOne) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    PolyMesh m;
    std::uniform_int_distribution<int> deg(3, 6);
    const int faces = 1 + trial;
    for (int f = 0; f < faces; ++f) {
      Face face;
      for (int k = deg(rng); k > 0; --k) {
        face.push_back(static_cast<Index>(m.vertices.size()));
        m.vertices.emplace_back(k, f, 0);
      }
      m.faces.push_back(face);
    }
    const FaceCensus c = face_census(m);
    const double total = static_cast<double>(c.total());
    EXPECT_EQ(c.tris / total + c.quads / total + c.others / total, 1.0);
    EXPECT_EQ(quad_ratio(m), c.quads / total);
  }
}

TEST(Oep, Examples) {
  EXPECT_DOUBLE_EQ(oep(shapes::quad_grid(1, 1, 2.0, 0.5)), 1.0);
  PolyMesh trap;
  trap.vertices = {{0, 0, 0}, {2, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  trap.faces = {{0, 1, 2, 3}};
  EXPECT_NEAR(oep(trap), (1.0 + std::sqrt(0.5)) / 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(oep(shapes::quad_grid(5, 4)), 1.0);
  EXPECT_THROW(oep(shapes::tri_grid(2)), UndefinedMetricError);
}

TEST(Efc, Examples) {
  EXPECT_DOUBLE_EQ(efc(shapes::quad_grid(2, 1)), 1.0);
  PolyMesh hinge;
  hinge.vertices = {{0, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {-1, 1, 0}, {0, 0, 1}, {0, 1, 1}};
  hinge.faces = {{2, 0, 1, 3}, {0, 4, 5, 1}};
  EXPECT_NEAR(efc(hinge), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(efc(shapes::quad_grid(6, 5)), 1.0);
  EXPECT_THROW(efc(shapes::quad_grid(1, 1)), UndefinedMetricError);
}

TEST(TopologyProperty, RigidAndScaleInvariant) {
  for (int seed = 0; seed < 6; ++seed) {
    PolyMesh m = shapes::quad_grid(5, 5, 0.3, 0.3);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.08, 0.08);
    for (Vec3& v : m.vertices) v += Vec3(u(rng), u(rng), u(rng));
    const PolyMesh t = transform(m, some_rotation(0.3 + seed), 2.5 + seed, Vec3(1, -2, 3));
    EXPECT_NEAR(oep(m), oep(t), 1e-12);
    EXPECT_NEAR(efc(m), efc(t), 1e-12);
    EXPECT_LT(oep(m), 1.0);
  }
}

// --- feature lines --------------------------------------------------------------

TEST(FeatureLines, FlatPatchIsOneLoop) {
  const auto fl = extract_feature_lines(shapes::quad_grid(3, 2), EfrConfig{});
  ASSERT_EQ(fl.size(), 1u);
  EXPECT_EQ(fl[0].kind, FeatureLine::Kind::kLoop);
  EXPECT_EQ(fl[0].vertices.size(), 10u);
  EXPECT_EQ(fl[0].vertices.front(), 0u);
}

TEST(FeatureLines, CubeHasTwelveEdges) {
  const auto fl = extract_feature_lines(shapes::box_quads(), EfrConfig{});
  ASSERT_EQ(fl.size(), 12u);
  for (const auto& f : fl) {
    EXPECT_EQ(f.kind, FeatureLine::Kind::kLong);
    EXPECT_EQ(f.vertices.size(), 2u);
  }
  // Refined cube: same 12 creases with a midpoint each.
  const auto refined = extract_feature_lines(shapes::refine_midpoint(shapes::box_quads()), EfrConfig{});
  ASSERT_EQ(refined.size(), 12u);
  for (const auto& f : refined) EXPECT_EQ(f.vertices.size(), 3u);
}

TEST(FeatureLines, SmoothSphereHasNone) {
  EXPECT_TRUE(extract_feature_lines(shapes::uv_sphere(16, 24), EfrConfig{}).empty());
}

TEST(FeatureLines, OpenCylinderHasTwoRims) {
  // Side of a cylinder: two boundary loops, no sharp edges.
  PolyMesh m;
  const int seg = 16;
  for (int z = 0; z < 2; ++z)
    for (int j = 0; j < seg; ++j) {
      const double a = 2 * 3.14159265358979 * j / seg;
      m.vertices.emplace_back(std::cos(a), std::sin(a), z);
    }
  for (int j = 0; j < seg; ++j) {
    const Index a = j, b = (j + 1) % seg;
    m.faces.push_back({a, b, static_cast<Index>(b + seg), static_cast<Index>(a + seg)});
  }
  const auto fl = extract_feature_lines(m, EfrConfig{});
  ASSERT_EQ(fl.size(), 2u);
  for (const auto& f : fl) {
    EXPECT_EQ(f.kind, FeatureLine::Kind::kLoop);
    EXPECT_EQ(f.vertices.size(), static_cast<std::size_t>(seg));
  }
}

// --- curves -------------------------------------------------------------------

TEST(Resample, EvenSpacing) {
  const std::vector<Vec3> l = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 3, 0)};
  const auto r = resample_polyline(l, false, 5);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_TRUE(r[1].isApprox(Vec3(1, 0, 0)));
  EXPECT_TRUE(r[2].isApprox(Vec3(1, 1, 0)));
  EXPECT_EQ(r.back(), l.back());
  const std::vector<Vec3> sq = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  const auto c = resample_polyline(sq, true, 8);
  EXPECT_TRUE(c[1].isApprox(Vec3(0.5, 0, 0)));
  EXPECT_TRUE(c[7].isApprox(Vec3(0, 0.5, 0)));
  const std::vector<Vec3> dup = {Vec3(1, 1, 1), Vec3(1, 1, 1)};
  EXPECT_THROW(resample_polyline(dup, false, 4), DegenerateError);
}

TEST(CurveDistance, Examples) {
  const std::vector<Vec3> p = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1, 0)};
  EXPECT_EQ(curve_distance(p, p, 500), 0.0);
  const std::vector<Vec3> rev(p.rbegin(), p.rend());
  EXPECT_NEAR(curve_distance(p, rev, 500), 0.0, 1e-12);
  const std::vector<Vec3> a = {Vec3(0, 0, 0), Vec3(1, 0, 0)}, b = {Vec3(0, 0.3, 0), Vec3(1, 0.3, 0)};
  EXPECT_NEAR(curve_distance(a, b, 500), 0.3, 1e-12);
}

TEST(CurveDistance, ClosedLoopsIgnoreStartAndDirection) {
  std::vector<Vec3> loop;
  for (int i = 0; i < 12; ++i) {
    const double t = 2 * 3.14159265358979 * i / 12;
    loop.emplace_back(std::cos(t), std::sin(t), 0);
  }
  std::vector<Vec3> shifted(loop.begin() + 5, loop.end());
  shifted.insert(shifted.end(), loop.begin(), loop.begin() + 5);
  std::vector<Vec3> reversed(shifted.rbegin(), shifted.rend());
  EXPECT_NEAR(curve_distance(loop, shifted, 480, true), 0.0, 1e-12);
  EXPECT_NEAR(curve_distance(loop, reversed, 480, true), 0.0, 1e-12);
  EXPECT_GT(curve_distance(loop, shifted, 480, false), 0.5);
}

// --- tracing and EFR ------------------------------------------------------------

TEST(TraceChain, SelfMatch) {
  for (const PolyMesh& m : {shapes::box_quads(), shapes::quad_grid(4, 3, 0.25, 0.25)}) {
    for (const FeatureLine& f : extract_feature_lines(m, EfrConfig{})) {
      const auto chain = trace_chain(f, m, EfrConfig{});
      ASSERT_TRUE(chain);
      EXPECT_EQ(chain->distance, 0.0);
    }
  }
}

// Creases on a lumpy surface zig-zag; the walk must still follow them.
TEST(TraceChain, SelfMatchOnIrregularCreases) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const PolyMesh m = normalize_unit_cube(shapes::bumpy_blob(14, 20, seed));
    const EfrResult r = efr(m, m, EfrConfig{});
    EXPECT_EQ(r.value, 1.0) << "seed " << seed;
    EXPECT_EQ(r.matched, r.lines + r.loops);
  }
}

TEST(TraceChain, OffsetBeyondDeltaFindsNothing) {
  const EfrConfig cfg;
  const PolyMesh grid = shapes::quad_grid(4, 3, 0.25, 0.25);
  const auto loop = extract_feature_lines(grid, cfg);
  ASSERT_EQ(loop.size(), 1u);
  EXPECT_FALSE(trace_chain(loop[0], shapes::translate(grid, Vec3(0, 0, 2 * cfg.delta_loop)), cfg));
  const PolyMesh cube = shapes::box_quads();
  for (const FeatureLine& f : extract_feature_lines(cube, cfg)) {
    // Move the cube away from the edge, perpendicular to it.
    const Vec3 dir = (f.points[1] - f.points[0]).normalized();
    const Vec3 away = std::abs(dir.x()) > 0.5 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    const Vec3 side = (f.points[0] - Vec3(0.5, 0.5, 0.5)).dot(away) > 0 ? away : Vec3(-away);
    EXPECT_FALSE(trace_chain(f, shapes::translate(cube, 2 * cfg.delta_long * side), cfg));
  }
}

TEST(TraceChain, RefinedMeshMatches) {
  const EfrConfig cfg;
  const PolyMesh cube = shapes::box_quads();
  const PolyMesh fine = shapes::refine_midpoint(cube);
  for (const FeatureLine& f : extract_feature_lines(cube, cfg)) {
    const auto chain = trace_chain(f, fine, cfg);
    ASSERT_TRUE(chain);
    EXPECT_EQ(chain->vertices.size(), 3u);
    EXPECT_LT(chain->distance, 1e-3);
  }
}

TEST(Efr, Examples) {
  const EfrConfig cfg;
  for (const PolyMesh& gt : {shapes::box_quads(), shapes::quad_grid(4, 3, 0.25, 0.25)}) {
    const EfrResult self = efr(gt, gt, cfg);
    EXPECT_EQ(self.value, 1.0);
    EXPECT_EQ(self.matched, self.lines + self.loops);
    EXPECT_EQ(efr(gt, PolyMesh{}, cfg).value, 0.0);
    EXPECT_GT(efr(gt, shapes::refine_midpoint(gt), cfg).value, 0.95);
  }
  EXPECT_THROW(efr(shapes::uv_sphere(16, 24), shapes::box_quads(), cfg), UndefinedMetricError);
}

TEST(EfrProperty, MonotoneInTau) {
  const PolyMesh gt = shapes::box_quads();
  PolyMesh out = shapes::refine_midpoint(gt);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (Vec3& v : out.vertices) v += Vec3(u(rng), u(rng), u(rng));
  EfrConfig cfg;
  double prev = 2.0;
  for (double tau : {0.1, 0.05, 0.02, 0.01, 0.005}) {
    cfg.tau = tau;
    const double v = efr(gt, out, cfg).value;
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1.0);
}

TEST(EfrConfig, TextRoundTrip) {
  EfrConfig c;
  c.tau = 0.05;
  c.resample_ns = 200;
  const EfrConfig d = EfrConfig::from_text(c.to_text());
  EXPECT_EQ(d.tau, 0.05);
  EXPECT_EQ(d.resample_ns, 200);
  EXPECT_THROW(EfrConfig::from_text("bogus=1"), ParseError);
  EXPECT_THROW(EfrConfig::from_text("tau=0"), RangeError);
}

}  // namespace
