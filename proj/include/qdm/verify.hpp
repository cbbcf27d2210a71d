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

// Geometric verification shared by face assembly and triangle merging:
// interior-angle range, convexity, diagonal fold angle and centroid
// tolerance.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdm/kv_config.hpp"
#include "qdm/mesh.hpp"

namespace qdm {

struct VerifyConfig {
  double theta_min = 30.0;     // degrees
  double theta_max = 140.0;    // degrees
  double dihedral_max = 45.0;  // degrees, fold angle
  double tau_quad = 2e-3;
  double tau_tri = 5e-3;
  bool enable_convexity = true;
  bool enable_dihedral = true;
  bool enable_centroid = true;

  /// Throws RangeError when an invariant is broken.
  void validate() const;

  /// Flat `key=value` lines, one per field.
  std::string to_text() const;

  /// Parses `key=value` lines; unknown keys are a ParseError. Keys not present
  /// keep the values of `base`.
  static VerifyConfig from_text(std::string_view text, const VerifyConfig& base);
  static VerifyConfig from_text(std::string_view text);

  /// Assigns one key from `kv`; false when the key is not a verify key.
  bool apply(const KvConfig& kv, const std::string& key);
};

enum class Check { kAngle, kConvexity, kDihedral, kCentroid };

const char* to_string(Check c);

struct VerifyReport {
  bool passed = true;
  std::vector<Check> failed_checks;

  std::vector<double> angles;  // degrees, empty if degenerate
  std::array<double, 2> fold_angles{0.0, 0.0};
  double max_fold = 0.0;
  std::optional<double> centroid_distance;
  bool degenerate = false;

  bool failed(Check c) const;
  void fail(Check c);
};

/// Angles in degrees at each vertex of the cycle, measured between the raw
/// 3D edge vectors. Throws DegenerateError on coincident adjacent vertices.
std::vector<double> interior_angles(std::span<const Vec3> cycle);

/// Closed-interval test [theta_min, theta_max].
bool check_angle_range(std::span<const double> angles, const VerifyConfig& cfg);

/// Every corner's turn, projected on the Newell normal, must share one
/// strict sign. A zero-area (Newell) cycle fails.
bool check_convexity(std::span<const Vec3> quad);

struct DihedralResult {
  bool passed = false;
  bool degenerate = false;
  std::array<double, 2> fold{0.0, 0.0};  // diagonals v0v2, v1v3
  double max_fold = 0.0;
};

DihedralResult check_dihedral(std::span<const Vec3> quad, const VerifyConfig& cfg);

struct CentroidResult {
  bool passed = false;
  double distance = 0.0;
};

/// Uses tau_quad for 4-cycles and tau_tri for 3-cycles.
CentroidResult check_centroid_tolerance(std::span<const Vec3> cycle,
                                        const Vec3& c_gen,
                                        const VerifyConfig& cfg);

VerifyReport verify_quad(std::span<const Vec3> quad, const std::optional<Vec3>& c_gen,
                         const VerifyConfig& cfg);

VerifyReport verify_tri(std::span<const Vec3> tri, const std::optional<Vec3>& c_gen,
                        const VerifyConfig& cfg);

/// Angle between two triangle normals in degrees; 0 when coplanar with the
/// same orientation.
double fold_angle_deg(const Vec3& n0, const Vec3& n1);

}  // namespace qdm
