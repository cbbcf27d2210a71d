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

#include "qdm/tri2quad.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>

#include "qdm/error.hpp"
#include "qdm/kv_config.hpp"

namespace qdm {

namespace {

// Relative eigengap below which the covariance has no dominant axis.
constexpr double kEigengapTol = 1e-6;

Vec3 canonical_sign(Vec3 v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) return v[i] < 0 ? Vec3(-v) : v;
  }
  return v;
}

// Any unit vector orthogonal to n.
Vec3 orthogonal(const Vec3& n) {
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(seed).normalized();
}

std::array<Vec3, 4> quad_points(const PolyMesh& mesh, const std::array<Index, 4>& q) {
  return {mesh.vertices[q[0]], mesh.vertices[q[1]], mesh.vertices[q[2]], mesh.vertices[q[3]]};
}

std::optional<MergeCandidate> score_one(const MeshNeighborhood& nb, const MergeCandidate& in,
                                        const OperatorConfig& cfg) {
  if (nb.face_newell[in.face_a].dot(nb.face_newell[in.face_b]) <= 0.0) return std::nullopt;
  const auto pts = quad_points(*nb.mesh, in.quad);
  if (cfg.prefilter && !verify_quad(pts, std::nullopt, cfg.verify).passed) return std::nullopt;
  MergeCandidate c = in;
  c.q_angle = q_angle(pts);
  const Vec3 d = nb.mesh->vertices[c.edge.second] - nb.mesh->vertices[c.edge.first];
  if (d.norm() == 0.0) {
    c.q_align = 0.0;
  } else {
    const PrincipalDirection f = principal_direction(nb, c.edge);
    c.q_align = q_align(d.normalized(), f.dir);
    c.principal_fallback = f.fallback;
  }
  c.weight = cfg.alpha1 * c.q_angle + cfg.alpha2 * c.q_align;
  return c;
}

}  // namespace

const char* to_string(MergeMode m) { return m == MergeMode::kGlobal ? "global" : "greedy"; }

MergeMode parse_merge_mode(std::string_view s) {
  if (s == "global") return MergeMode::kGlobal;
  if (s == "greedy") return MergeMode::kGreedy;
  throw ParseError("mode must be global or greedy, got '" + std::string(s) + "'", 0);
}

void OperatorConfig::validate() const {
  if (!(alpha1 >= 0.0 && alpha2 >= 0.0) || !std::isfinite(alpha1) || !std::isfinite(alpha2)) {
    throw RangeError("alpha1 and alpha2 must be finite and >= 0");
  }
  verify.validate();
}

std::string OperatorConfig::to_text() const {
  KvConfig kv;
  kv.set("alpha1", alpha1);
  kv.set("alpha2", alpha2);
  kv.set("mode", std::string(to_string(mode)));
  kv.set("prefilter", prefilter);
  return kv.to_text() + verify.to_text();
}

OperatorConfig OperatorConfig::from_text(std::string_view text, const OperatorConfig& base) {
  const KvConfig kv = KvConfig::parse(text);
  OperatorConfig cfg = base;
  for (const auto& key : kv.keys()) {
    if (key == "alpha1") cfg.alpha1 = kv.get_double(key);
    else if (key == "alpha2") cfg.alpha2 = kv.get_double(key);
    else if (key == "mode") cfg.mode = parse_merge_mode(kv.get(key));
    else if (key == "prefilter") cfg.prefilter = kv.get_bool(key);
    else if (!cfg.verify.apply(kv, key)) throw ParseError("unknown operator key '" + key + "'", 0);
  }
  cfg.validate();
  return cfg;
}

OperatorConfig OperatorConfig::from_text(std::string_view text) {
  return from_text(text, OperatorConfig{});
}

std::vector<MergeCandidate> enumerate_candidates(const PolyMesh& mesh) {
  return enumerate_candidates(mesh, EdgeFaceMap(mesh));
}

std::vector<MergeCandidate> enumerate_candidates(const PolyMesh& mesh, const EdgeFaceMap& map) {
  std::vector<MergeCandidate> out;
  for (const auto& [edge, faces] : map.edges()) {
    if (faces.size() != 2) continue;
    const Face& fa = mesh.faces[faces[0]];
    const Face& fb = mesh.faces[faces[1]];
    if (fa.size() != 3 || fb.size() != 3) continue;
    MergeCandidate c;
    c.edge = edge;
    c.face_a = faces[0];
    c.face_b = faces[1];
    // Rotate A so the shared edge is (a, b) in A's own orientation.
    int k = 0;
    while (EdgeKey(fa[k], fa[(k + 1) % 3]) != edge) ++k;
    const Index a = fa[k], b = fa[(k + 1) % 3], cv = fa[(k + 2) % 3];
    Index d = fb[0];
    for (Index v : fb) {
      if (v != a && v != b) d = v;
    }
    if (d == cv) continue;  // duplicated triangle, no quad
    c.quad = {cv, a, d, b};
    out.push_back(c);
  }
  return out;
}

double q_angle_from_angles(std::span<const double> angles) {
  double sum = 0.0;
  for (double t : angles) sum += std::max(0.0, 90.0 - std::abs(t - 90.0));
  return sum / 360.0;
}

double q_angle(std::span<const Vec3> quad) {
  try {
    const auto angles = interior_angles(quad);
    return q_angle_from_angles(angles);
  } catch (const DegenerateError&) {
    return 0.0;
  }
}

MeshNeighborhood::MeshNeighborhood(const PolyMesh& m)
    : mesh(&m), neighbors(vertex_neighbors(m)), faces(vertex_faces(m)) {
  face_newell.reserve(m.faces.size());
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    face_newell.push_back(newell_vector(m.face_points(f)));
  }
}

PrincipalDirection principal_direction(const PolyMesh& mesh, EdgeKey edge) {
  return principal_direction(MeshNeighborhood(mesh), edge);
}

PrincipalDirection principal_direction(const MeshNeighborhood& nb, EdgeKey edge) {
  const PolyMesh& mesh = *nb.mesh;
  const Index ea = edge.first, eb = edge.second;
  if (ea >= mesh.vertices.size() || eb >= mesh.vertices.size()) {
    throw StructureError("edge vertex out of range");
  }
  const Vec3 mid = 0.5 * (mesh.vertices[ea] + mesh.vertices[eb]);
  const Vec3 d = mesh.vertices[eb] - mesh.vertices[ea];

  Vec3 normal = Vec3::Zero();
  std::vector<Index> ring_faces(nb.faces[ea].begin(), nb.faces[ea].end());
  ring_faces.insert(ring_faces.end(), nb.faces[eb].begin(), nb.faces[eb].end());
  std::sort(ring_faces.begin(), ring_faces.end());
  ring_faces.erase(std::unique(ring_faces.begin(), ring_faces.end()), ring_faces.end());
  if (ring_faces.empty()) throw StructureError("edge has no incident face");
  for (Index f : ring_faces) normal += nb.face_newell[f];
  if (normal.norm() == 0.0) normal = orthogonal(d.norm() > 0 ? d.normalized() : Vec3::UnitX());
  normal.normalize();

  const Vec3 t1 = orthogonal(normal);
  const Vec3 t2 = normal.cross(t1);

  std::vector<Index> ring(nb.neighbors[ea].begin(), nb.neighbors[ea].end());
  ring.insert(ring.end(), nb.neighbors[eb].begin(), nb.neighbors[eb].end());
  std::sort(ring.begin(), ring.end());
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(ring.size());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (Index v : ring) {
    const Vec3 r = mesh.vertices[v] - mid;
    pts.emplace_back(r.dot(t1), r.dot(t2));
    mean += pts.back();
  }
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(pts.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double lo = eig.eigenvalues()[0], hi = eig.eigenvalues()[1];
  PrincipalDirection out;
  if (!(hi > 0.0) || hi - lo <= kEigengapTol * hi) {
    const Vec3 dp = d - d.dot(normal) * normal;
    out.dir = dp.norm() > 0 ? normal.cross(dp).normalized() : t1;
    out.fallback = true;
  } else {
    const Eigen::Vector2d e = eig.eigenvectors().col(1);
    out.dir = (e.x() * t1 + e.y() * t2).normalized();
  }
  out.dir = canonical_sign(out.dir);
  return out;
}

double q_align(const Vec3& d, const Vec3& f) {
  const double c = d.dot(f);
  return std::sqrt(std::clamp(1.0 - c * c, 0.0, 1.0));
}

double q_align(const MeshNeighborhood& nb, EdgeKey edge) {
  const Vec3 d = nb.mesh->vertices[edge.second] - nb.mesh->vertices[edge.first];
  if (d.norm() == 0.0) throw DegenerateError("zero-length edge");
  return q_align(d.normalized(), principal_direction(nb, edge).dir);
}

std::vector<MergeCandidate> score_and_prefilter(const PolyMesh& mesh,
                                                std::span<const MergeCandidate> candidates,
                                                const OperatorConfig& cfg) {
  const MeshNeighborhood nb(mesh);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(candidates.size());
  std::vector<std::optional<MergeCandidate>> scored(candidates.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) scored[i] = score_one(nb, candidates[i], cfg);
  std::vector<MergeCandidate> out;
  for (auto& s : scored) {
    if (s) out.push_back(*s);
  }
  return out;
}

std::vector<MergeCandidate> score_and_prefilter_serial(const PolyMesh& mesh,
                                                       std::span<const MergeCandidate> candidates,
                                                       const OperatorConfig& cfg) {
  const MeshNeighborhood nb(mesh);
  std::vector<MergeCandidate> out;
  for (const MergeCandidate& c : candidates) {
    if (auto s = score_one(nb, c, cfg)) out.push_back(*s);
  }
  return out;
}

MergeResult merge(const PolyMesh& mesh, const OperatorConfig& cfg) {
  cfg.validate();
  mesh.validate();
  MergeResult r;
  r.scored = score_and_prefilter(mesh, enumerate_candidates(mesh), cfg);
  r.graph.node_count = mesh.faces.size();
  r.graph.edges.reserve(r.scored.size());
  for (const MergeCandidate& c : r.scored) r.graph.edges.push_back({c.face_a, c.face_b, c.weight});
  r.matching = cfg.mode == MergeMode::kGlobal ? max_weight_matching(r.graph)
                                              : greedy_matching(r.graph);

  r.mesh.vertices = mesh.vertices;
  std::vector<bool> used(mesh.faces.size(), false);
  for (std::size_t e : r.matching.selected) {
    const MergeCandidate& c = r.scored[e];
    r.mesh.faces.push_back(Face(c.quad.begin(), c.quad.end()));
    r.origin.push_back({c.face_a, c.face_b});
    used[c.face_a] = used[c.face_b] = true;
  }
  r.merged = r.matching.selected.size();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (used[f]) continue;
    r.mesh.faces.push_back(mesh.faces[f]);
    r.origin.push_back({static_cast<Index>(f)});
    if (mesh.faces[f].size() == 3) ++r.triangles_left;
  }
  r.flipped = enforce_normal_consistency(mesh, r.mesh, r.origin);
  return r;
}

std::size_t enforce_normal_consistency(const PolyMesh& source, PolyMesh& merged,
                                       std::span<const std::vector<Index>> origin) {
  if (origin.size() != merged.faces.size()) {
    throw StructureError("origin list does not match face count");
  }
  std::size_t flipped = 0;
  for (std::size_t f = 0; f < merged.faces.size(); ++f) {
    if (origin[f].size() != 2) continue;
    const Vec3 ref = newell_vector(source.face_points(origin[f][0])).normalized() +
                     newell_vector(source.face_points(origin[f][1])).normalized();
    if (newell_vector(merged.face_points(f)).dot(ref) < 0.0) {
      std::reverse(merged.faces[f].begin(), merged.faces[f].end());
      ++flipped;
    }
  }
  return flipped;
}

}  // namespace qdm
