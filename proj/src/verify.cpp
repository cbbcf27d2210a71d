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

#include "qdm/verify.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qdm/error.hpp"
#include "qdm/kv_config.hpp"

namespace qdm {

namespace {

// Inclusive comparisons absorb rounding in the last few ulps of an angle
// computed from coordinates (e.g. a fold built to be exactly 45 degrees).
constexpr double kAngleSlackDeg = 1e-9;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double angle_between_deg(const Vec3& u, const Vec3& v) {
  return std::atan2(u.cross(v).norm(), u.dot(v)) * kRadToDeg;
}

}  // namespace

void VerifyConfig::validate() const {
  if (!(0.0 < theta_min && theta_min < theta_max && theta_max < 360.0)) {
    throw RangeError("require 0 < theta_min < theta_max < 360");
  }
  if (!(dihedral_max > 0.0 && dihedral_max <= 180.0)) {
    throw RangeError("dihedral_max must lie in (0, 180]");
  }
  if (!(tau_quad > 0.0 && tau_tri > 0.0)) throw RangeError("tau_quad and tau_tri must be > 0");
}

std::string VerifyConfig::to_text() const {
  KvConfig kv;
  kv.set("theta_min", theta_min);
  kv.set("theta_max", theta_max);
  kv.set("dihedral_max", dihedral_max);
  kv.set("tau_quad", tau_quad);
  kv.set("tau_tri", tau_tri);
  kv.set("enable_convexity", enable_convexity);
  kv.set("enable_dihedral", enable_dihedral);
  kv.set("enable_centroid", enable_centroid);
  return kv.to_text();
}

bool VerifyConfig::apply(const KvConfig& kv, const std::string& key) {
  if (key == "theta_min") theta_min = kv.get_double(key);
  else if (key == "theta_max") theta_max = kv.get_double(key);
  else if (key == "dihedral_max") dihedral_max = kv.get_double(key);
  else if (key == "tau_quad") tau_quad = kv.get_double(key);
  else if (key == "tau_tri") tau_tri = kv.get_double(key);
  else if (key == "enable_convexity") enable_convexity = kv.get_bool(key);
  else if (key == "enable_dihedral") enable_dihedral = kv.get_bool(key);
  else if (key == "enable_centroid") enable_centroid = kv.get_bool(key);
  else return false;
  return true;
}

VerifyConfig VerifyConfig::from_text(std::string_view text, const VerifyConfig& base) {
  const KvConfig kv = KvConfig::parse(text);
  VerifyConfig cfg = base;
  for (const auto& key : kv.keys()) {
    if (!cfg.apply(kv, key)) throw ParseError("unknown verify key '" + key + "'", 0);
  }
  cfg.validate();
  return cfg;
}

VerifyConfig VerifyConfig::from_text(std::string_view text) {
  return from_text(text, VerifyConfig{});
}

const char* to_string(Check c) {
  switch (c) {
    case Check::kAngle: return "angle";
    case Check::kConvexity: return "convexity";
    case Check::kDihedral: return "dihedral";
    case Check::kCentroid: return "centroid";
  }
  return "?";
}

bool VerifyReport::failed(Check c) const {
  return std::find(failed_checks.begin(), failed_checks.end(), c) != failed_checks.end();
}

void VerifyReport::fail(Check c) {
  if (!failed(c)) failed_checks.push_back(c);
  passed = false;
}

std::vector<double> interior_angles(std::span<const Vec3> cycle) {
  const std::size_t k = cycle.size();
  if (k < 3) throw DegenerateError("cycle shorter than 3");
  std::vector<double> angles(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3 to_prev = cycle[(i + k - 1) % k] - cycle[i];
    const Vec3 to_next = cycle[(i + 1) % k] - cycle[i];
    if (to_prev.squaredNorm() == 0.0 || to_next.squaredNorm() == 0.0) {
      throw DegenerateError("coincident adjacent vertices");
    }
    angles[i] = angle_between_deg(to_prev, to_next);
  }
  return angles;
}

bool check_angle_range(std::span<const double> angles, const VerifyConfig& cfg) {
  return std::all_of(angles.begin(), angles.end(), [&](double a) {
    return a >= cfg.theta_min - kAngleSlackDeg && a <= cfg.theta_max + kAngleSlackDeg;
  });
}

bool check_convexity(std::span<const Vec3> quad) {
  const Vec3 n = newell_vector(quad);
  if (!(n.squaredNorm() > 0.0)) return false;
  const std::size_t k = quad.size();
  int positive = 0, negative = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3 e_in = quad[i] - quad[(i + k - 1) % k];
    const Vec3 e_out = quad[(i + 1) % k] - quad[i];
    const double s = e_in.cross(e_out).dot(n);
    if (s > 0.0) ++positive;
    else if (s < 0.0) ++negative;
    else return false;
  }
  return positive == static_cast<int>(k) || negative == static_cast<int>(k);
}

double fold_angle_deg(const Vec3& n0, const Vec3& n1) { return angle_between_deg(n0, n1); }

DihedralResult check_dihedral(std::span<const Vec3> quad, const VerifyConfig& cfg) {
  DihedralResult r;
  auto tri_normal = [&](int a, int b, int c) -> std::optional<Vec3> {
    const Vec3 u = quad[b] - quad[a];
    const Vec3 v = quad[c] - quad[a];
    const Vec3 n = u.cross(v);
    // Relative test so tiny but well-shaped quads are not flagged.
    if (n.norm() <= 1e-14 * u.norm() * v.norm()) return std::nullopt;
    return n.normalized();
  };
  const auto n0 = tri_normal(0, 1, 2), n1 = tri_normal(0, 2, 3);
  const auto n2 = tri_normal(1, 2, 3), n3 = tri_normal(1, 3, 0);
  if (!n0 || !n1 || !n2 || !n3) {
    r.degenerate = true;
    r.max_fold = 180.0;
    return r;
  }
  r.fold = {fold_angle_deg(*n0, *n1), fold_angle_deg(*n2, *n3)};
  r.max_fold = std::max(r.fold[0], r.fold[1]);
  r.passed = r.max_fold <= cfg.dihedral_max + kAngleSlackDeg;
  return r;
}

CentroidResult check_centroid_tolerance(std::span<const Vec3> cycle, const Vec3& c_gen,
                                        const VerifyConfig& cfg) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : cycle) c += p;
  c /= static_cast<double>(cycle.size());
  CentroidResult r;
  r.distance = (c - c_gen).norm();
  const double tau = cycle.size() == 4 ? cfg.tau_quad : cfg.tau_tri;
  r.passed = r.distance <= tau;
  return r;
}

VerifyReport verify_quad(std::span<const Vec3> quad, const std::optional<Vec3>& c_gen,
                         const VerifyConfig& cfg) {
  if (quad.size() != 4) throw StructureError("verify_quad needs 4 points");
  VerifyReport rep;
  try {
    rep.angles = interior_angles(quad);
    if (!check_angle_range(rep.angles, cfg)) rep.fail(Check::kAngle);
  } catch (const DegenerateError&) {
    rep.degenerate = true;
    rep.fail(Check::kAngle);
  }
  if (cfg.enable_convexity && !check_convexity(quad)) rep.fail(Check::kConvexity);
  if (cfg.enable_dihedral) {
    const DihedralResult d = check_dihedral(quad, cfg);
    rep.fold_angles = d.fold;
    rep.max_fold = d.max_fold;
    rep.degenerate = rep.degenerate || d.degenerate;
    if (!d.passed) rep.fail(Check::kDihedral);
  }
  if (cfg.enable_centroid && c_gen) {
    const CentroidResult c = check_centroid_tolerance(quad, *c_gen, cfg);
    rep.centroid_distance = c.distance;
    if (!c.passed) rep.fail(Check::kCentroid);
  }
  return rep;
}

VerifyReport verify_tri(std::span<const Vec3> tri, const std::optional<Vec3>& c_gen,
                        const VerifyConfig& cfg) {
  if (tri.size() != 3) throw StructureError("verify_tri needs 3 points");
  VerifyReport rep;
  try {
    rep.angles = interior_angles(tri);
    // Collinear triangles measure (0, 0, 180) and fail the range anyway.
    if (!check_angle_range(rep.angles, cfg)) rep.fail(Check::kAngle);
  } catch (const DegenerateError&) {
    rep.degenerate = true;
    rep.fail(Check::kAngle);
  }
  if (cfg.enable_centroid && c_gen) {
    const CentroidResult c = check_centroid_tolerance(tri, *c_gen, cfg);
    rep.centroid_distance = c.distance;
    if (!c.passed) rep.fail(Check::kCentroid);
  }
  return rep;
}

}  // namespace qdm
