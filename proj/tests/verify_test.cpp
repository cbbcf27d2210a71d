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
#include <numbers>
#include <numeric>
#include <random>

#include "qdm/error.hpp"
#include "qdm/verify.hpp"

namespace {

using namespace qdm;
using Cycle = std::vector<Vec3>;

constexpr double kPi = std::numbers::pi;

const Cycle kSquare = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};

Vec3 mean(const Cycle& c) {
  Vec3 s = Vec3::Zero();
  for (const Vec3& p : c) s += p;
  return s / static_cast<double>(c.size());
}

// Unit square whose second triangle (v0, v2, v3) is rotated about the v0-v2
// diagonal by `deg`.
Cycle folded_square(double deg) {
  const double a = deg * kPi / 180.0;
  const Vec3 mid(0.5, 0.5, 0.0);
  const Vec3 away = Vec3(-1, 1, 0).normalized();
  const double h = std::sqrt(2.0) / 2.0;
  return {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, mid + h * (std::cos(a) * away + std::sin(a) * Vec3::UnitZ())};
}

Cycle rotate_cycle(const Cycle& c, int k) {
  Cycle out(c);
  std::rotate(out.begin(), out.begin() + k, out.end());
  return out;
}

}  // namespace

TEST(InteriorAngles, Rectangles) {
  for (const Cycle& q : {kSquare, Cycle{{0, 0, 0}, {2, 0, 0}, {2, 1, 0}, {0, 1, 0}}}) {
    for (double a : interior_angles(q)) EXPECT_NEAR(a, 90.0, 1e-12);
  }
}

TEST(InteriorAngles, KiteSumsTo360) {
  const double half = 70.0 * kPi / 180.0;
  const Cycle kite = {{0, 0, 0},
                      {std::cos(half), -std::sin(half), 0},
                      {2.5, 0, 0},
                      {std::cos(half), std::sin(half), 0}};
  const auto angles = interior_angles(kite);
  EXPECT_NEAR(angles[0], 140.0, 1e-9);
  EXPECT_NEAR(std::accumulate(angles.begin(), angles.end(), 0.0), 360.0, 1e-9);
}

TEST(InteriorAngles, CoincidentRejected) {
  EXPECT_THROW(interior_angles(Cycle{{0, 0, 0}, {0, 0, 0}, {1, 1, 0}, {0, 1, 0}}), DegenerateError);
}

TEST(InteriorAngles, RandomPlanarConvexSumProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    // Four sorted angles on an ellipse give a convex quad.
    std::array<double, 4> th;
    for (double& x : th) x = 2 * kPi * u(rng);
    std::sort(th.begin(), th.end());
    Cycle q;
    for (double x : th) q.emplace_back(2 * std::cos(x), std::sin(x), 0);
    bool ok = true;
    for (int i = 0; i < 4; ++i) ok = ok && (q[i] - q[(i + 1) % 4]).norm() > 1e-6;
    if (!ok) continue;
    const auto a = interior_angles(q);
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 360.0, 1e-6);
  }
}

TEST(AngleRange, Examples) {
  const VerifyConfig cfg;
  EXPECT_TRUE(check_angle_range(std::vector<double>{90, 90, 90, 90}, cfg));
  EXPECT_FALSE(check_angle_range(std::vector<double>{150, 70, 70, 70}, cfg));
  EXPECT_TRUE(check_angle_range(std::vector<double>{30, 140, 95, 95}, cfg));
  EXPECT_FALSE(check_angle_range(std::vector<double>{29.999, 140, 95, 95}, cfg));
  EXPECT_FALSE(check_angle_range(std::vector<double>{30, 140.001, 95, 95}, cfg));
}

TEST(Convexity, Examples) {
  EXPECT_TRUE(check_convexity(kSquare));
  EXPECT_FALSE(check_convexity(Cycle{{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}}));
  EXPECT_FALSE(check_convexity(Cycle{{0, 0, 0}, {2, 0, 0}, {0.5, 0.5, 0}, {0, 2, 0}}));
  // Collinear corner: zero projection.
  EXPECT_FALSE(check_convexity(Cycle{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 1, 0}}));
}

// Hand oracle for the bowtie: corner turns e_{i-1} x e_i have z-components
// +1, -1, +1, -1 while the Newell normal of the bowtie vanishes.
TEST(Convexity, BowtieSignPattern) {
  const Cycle bow = {{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<double> z;
  for (int i = 0; i < 4; ++i) {
    const Vec3 e0 = bow[i] - bow[(i + 3) % 4];
    const Vec3 e1 = bow[(i + 1) % 4] - bow[i];
    z.push_back(e0.cross(e1).z());
  }
  EXPECT_TRUE(std::any_of(z.begin(), z.end(), [](double v) { return v > 0; }));
  EXPECT_TRUE(std::any_of(z.begin(), z.end(), [](double v) { return v < 0; }));
  EXPECT_FALSE(check_convexity(bow));
}

TEST(Convexity, RotationAndReversalProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 500; ++t) {
    Cycle q(4);
    for (Vec3& p : q) p = Vec3(u(rng), u(rng), 0.1 * u(rng));
    const bool base = check_convexity(q);
    for (int k = 1; k < 4; ++k) EXPECT_EQ(check_convexity(rotate_cycle(q, k)), base);
    Cycle r(q.rbegin(), q.rend());
    EXPECT_EQ(check_convexity(r), base);
  }
}

TEST(Dihedral, Examples) {
  const VerifyConfig cfg;
  const auto planar = check_dihedral(kSquare, cfg);
  EXPECT_TRUE(planar.passed);
  EXPECT_NEAR(planar.fold[0], 0.0, 1e-12);
  EXPECT_NEAR(planar.fold[1], 0.0, 1e-12);

  const auto right = check_dihedral(folded_square(90.0), cfg);
  EXPECT_FALSE(right.passed);
  EXPECT_NEAR(right.fold[0], 90.0, 1e-9);

  const auto boundary = check_dihedral(folded_square(45.0), cfg);
  EXPECT_NEAR(boundary.fold[0], 45.0, 1e-9);
  EXPECT_TRUE(boundary.passed);
  EXPECT_FALSE(check_dihedral(folded_square(45.1), cfg).passed);
}

TEST(Dihedral, DegenerateSplit) {
  const auto r = check_dihedral(Cycle{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 1, 0}}, VerifyConfig{});
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.degenerate);
}

TEST(Centroid, Examples) {
  const VerifyConfig cfg;
  const auto exact = check_centroid_tolerance(kSquare, mean(kSquare), cfg);
  EXPECT_TRUE(exact.passed);
  EXPECT_EQ(exact.distance, 0.0);
  EXPECT_FALSE(check_centroid_tolerance(kSquare, mean(kSquare) + Vec3(3e-3, 0, 0), cfg).passed);
  const Cycle tri = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto t = check_centroid_tolerance(tri, mean(tri) + Vec3(0, 4e-3, 0), cfg);
  EXPECT_TRUE(t.passed);
  EXPECT_NEAR(t.distance, 4e-3, 1e-15);
}

TEST(VerifyQuad, Examples) {
  const VerifyConfig cfg;
  EXPECT_TRUE(verify_quad(kSquare, mean(kSquare), cfg).passed);

  const Cycle bow = {{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto r = verify_quad(bow, std::nullopt, cfg);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.failed(Check::kConvexity));
  EXPECT_FALSE(r.failed(Check::kCentroid));

  const Cycle fold = folded_square(45.1);
  const auto f = verify_quad(fold, mean(fold), cfg);
  EXPECT_FALSE(f.passed);
  EXPECT_TRUE(f.failed(Check::kDihedral));
  EXPECT_NEAR(f.max_fold, 45.1, 1e-9);
}

TEST(VerifyQuad, ReportsAllFailures) {
  const VerifyConfig cfg;
  const Cycle bow = {{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}};
  // Bowtie corners are all 45 degrees; its two halves face opposite ways.
  const auto r = verify_quad(bow, mean(bow) + Vec3(1, 0, 0), cfg);
  EXPECT_FALSE(r.failed(Check::kAngle));
  EXPECT_TRUE(r.failed(Check::kDihedral));
  EXPECT_TRUE(r.failed(Check::kConvexity));
  EXPECT_TRUE(r.failed(Check::kCentroid));
  EXPECT_EQ(r.angles.size(), 4u);
  ASSERT_TRUE(r.centroid_distance.has_value());
  EXPECT_EQ(r.passed, r.failed_checks.empty());
}

TEST(VerifyQuad, DisabledChecksAreSkipped) {
  VerifyConfig cfg;
  cfg.enable_dihedral = false;
  EXPECT_TRUE(verify_quad(folded_square(60.0), std::nullopt, cfg).passed);
  cfg.enable_centroid = false;
  EXPECT_TRUE(verify_quad(kSquare, Vec3(5, 5, 5), cfg).passed);
}

TEST(VerifyQuad, DegenerateIsAFailureNotAnException) {
  const Cycle dup = {{0, 0, 0}, {0, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  VerifyReport r;
  EXPECT_NO_THROW(r = verify_quad(dup, std::nullopt, VerifyConfig{}));
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.degenerate);
}

TEST(VerifyTri, Examples) {
  const VerifyConfig cfg;
  const Cycle eq = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}};
  EXPECT_TRUE(verify_tri(eq, mean(eq), cfg).passed);
  const double apex = 10.0 * kPi / 180.0;
  const Cycle sliver = {{0, 0, 0}, {std::cos(apex / 2), std::sin(apex / 2), 0},
                        {std::cos(apex / 2), -std::sin(apex / 2), 0}};
  const auto s = verify_tri(sliver, std::nullopt, cfg);
  EXPECT_FALSE(s.passed);
  EXPECT_TRUE(s.failed(Check::kAngle));
  const Cycle right = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  EXPECT_TRUE(verify_tri(right, mean(right), cfg).passed);
}

TEST(VerifyQuad, RigidMotionInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  const VerifyConfig cfg;
  int passes = 0;
  for (int t = 0; t < 400; ++t) {
    Cycle q = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    for (Vec3& p : q) p += 0.35 * Vec3(u(rng), u(rng), u(rng));
    const Vec3 c = mean(q) + 1.5e-3 * Vec3(u(rng), u(rng), u(rng));
    const Eigen::Quaterniond rot = Eigen::Quaterniond::UnitRandom();
    const Vec3 shift(u(rng) * 5, u(rng) * 5, u(rng) * 5);
    Cycle moved;
    for (const Vec3& p : q) moved.push_back(rot * p + shift);
    const auto a = verify_quad(q, c, cfg);
    const auto b = verify_quad(moved, rot * c + shift, cfg);
    if (a.degenerate) continue;
    EXPECT_EQ(a.passed, b.passed);
    EXPECT_EQ(a.failed_checks, b.failed_checks);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.angles[i], b.angles[i], 1e-9);
    EXPECT_NEAR(a.max_fold, b.max_fold, 1e-9);
    passes += a.passed;
  }
  EXPECT_GT(passes, 10);
}

TEST(VerifyQuad, PassIsRotationInvariant) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  const VerifyConfig cfg;
  for (int t = 0; t < 400; ++t) {
    Cycle q = kSquare;
    for (Vec3& p : q) p += 0.2 * Vec3(u(rng), u(rng), u(rng));
    const Vec3 c = mean(q);
    if (!verify_quad(q, c, cfg).passed) continue;
    for (int k = 1; k < 4; ++k) EXPECT_TRUE(verify_quad(rotate_cycle(q, k), c, cfg).passed);
  }
}

TEST(VerifyConfig, TextRoundTripAndValidation) {
  VerifyConfig cfg;
  cfg.theta_min = 25.5;
  cfg.enable_convexity = false;
  const VerifyConfig back = VerifyConfig::from_text(cfg.to_text());
  EXPECT_EQ(back.theta_min, 25.5);
  EXPECT_FALSE(back.enable_convexity);
  EXPECT_EQ(back.tau_quad, 2e-3);
  EXPECT_THROW(VerifyConfig::from_text("bogus=1\n"), ParseError);
  VerifyConfig bad;
  bad.theta_min = 150;
  EXPECT_THROW(bad.validate(), RangeError);
  bad = VerifyConfig{};
  bad.tau_tri = 0;
  EXPECT_THROW(bad.validate(), RangeError);
}
