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

#include "qdm/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "qdm/error.hpp"
#include "qdm/kdtree.hpp"
#include "qdm/verify.hpp"

namespace qdm {

namespace {

using Tri = std::array<Vec3, 3>;

std::vector<Tri> fan_triangles(const PolyMesh& m, std::vector<Index>* source = nullptr) {
  std::vector<Tri> out;
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const Face& face = m.faces[f];
    for (std::size_t i = 1; i + 1 < face.size(); ++i) {
      out.push_back({m.vertices[face[0]], m.vertices[face[i]], m.vertices[face[i + 1]]});
      if (source) source->push_back(static_cast<Index>(f));
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

void require_points(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw StructureError("distance between empty point sets");
}

}  // namespace

SampledSurface sample_surface(const PolyMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw RangeError("sample count must be >= 1");
  if (mesh.faces.empty()) throw StructureError("cannot sample a mesh without faces");
  mesh.validate();
  std::vector<Index> source;
  const std::vector<Tri> tris = fan_triangles(mesh, &source);
  std::vector<double> cum(tris.size());
  double total = 0.0;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    total += 0.5 * (tris[i][1] - tris[i][0]).cross(tris[i][2] - tris[i][0]).norm();
    cum[i] = total;
  }
  if (!(total > 0.0)) throw DegenerateError("mesh has zero area");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SampledSurface s;
  s.points.reserve(n);
  s.faces.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = u01(rng) * total;
    std::size_t t = std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin();
    t = std::min(t, tris.size() - 1);
    const double r1 = std::sqrt(u01(rng)), r2 = u01(rng);
    const Tri& tri = tris[t];
    s.points.push_back((1.0 - r1) * tri[0] + r1 * (1.0 - r2) * tri[1] + r1 * r2 * tri[2]);
    s.faces.push_back(source[t]);
  }
  return s;
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_points(a, b);
  return 0.5 * (mean(nn_distances(a, b)) + mean(nn_distances(b, a)));
}

double chamfer_serial(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_points(a, b);
  return 0.5 * (mean(nn_distances_serial(a, b)) + mean(nn_distances_serial(b, a)));
}

double hausdorff(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_points(a, b);
  return std::max(max_of(nn_distances(a, b)), max_of(nn_distances(b, a)));
}

double hausdorff_serial(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_points(a, b);
  return std::max(max_of(nn_distances_serial(a, b)), max_of(nn_distances_serial(b, a)));
}

// --- voxels -----------------------------------------------------------------

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(occ.begin(), occ.end(), std::uint8_t{1}));
}

namespace {

constexpr double kJitterB = kVoxelRayJitter[0], kJitterC = kVoxelRayJitter[1];

struct ProjectedTri {
  double b0, c0, b1, c1, b2, c2;  // projected corners
  double lo_b, hi_b, lo_c, hi_c;
  double det;
  Vec3 p0, e1, e2;
};

template <bool kParallel>
VoxelGrid voxelize_impl(const PolyMesh& mesh, const Aabb& box, int res) {
  if (res < 1) throw RangeError("voxel resolution must be >= 1");
  VoxelGrid g;
  g.res = res;
  g.origin = box.lo;
  g.step = (box.hi - box.lo) / res;
  if (!(g.step.minCoeff() > 0.0)) throw DegenerateError("voxel box has zero extent");
  const std::size_t n = static_cast<std::size_t>(res);
  std::vector<std::uint8_t> votes(n * n * n, 0);
  const std::vector<Tri> tris = fan_triangles(mesh);
  auto vid = [n](std::size_t x, std::size_t y, std::size_t z) { return (z * n + y) * n + x; };
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    std::vector<ProjectedTri> proj;
    proj.reserve(tris.size());
    for (const Tri& t : tris) {
      ProjectedTri p{t[0][b], t[0][c], t[1][b], t[1][c], t[2][b], t[2][c], 0, 0, 0, 0, 0, t[0],
                     t[1] - t[0], t[2] - t[0]};
      p.lo_b = std::min({p.b0, p.b1, p.b2});
      p.hi_b = std::max({p.b0, p.b1, p.b2});
      p.lo_c = std::min({p.c0, p.c1, p.c2});
      p.hi_c = std::max({p.c0, p.c1, p.c2});
      p.det = (p.b1 - p.b0) * (p.c2 - p.c0) - (p.b2 - p.b0) * (p.c1 - p.c0);
      if (p.det != 0.0) proj.push_back(p);
    }
    const std::ptrdiff_t columns = static_cast<std::ptrdiff_t>(n * n);
#pragma omp parallel for schedule(dynamic, 16) if (kParallel)
    for (std::ptrdiff_t col = 0; col < columns; ++col) {
      const std::size_t jb = static_cast<std::size_t>(col) % n, jc = static_cast<std::size_t>(col) / n;
      const double yb = g.origin[b] + (jb + 0.5 + kJitterB) * g.step[b];
      const double yc = g.origin[c] + (jc + 0.5 + kJitterC) * g.step[c];
      std::vector<double> hits;
      for (const ProjectedTri& p : proj) {
        if (yb < p.lo_b || yb > p.hi_b || yc < p.lo_c || yc > p.hi_c) continue;
        const double u = ((yb - p.b0) * (p.c2 - p.c0) - (p.b2 - p.b0) * (yc - p.c0)) / p.det;
        const double v = ((p.b1 - p.b0) * (yc - p.c0) - (yb - p.b0) * (p.c1 - p.c0)) / p.det;
        if (u < 0.0 || v < 0.0 || u + v > 1.0) continue;
        hits.push_back(p.p0[a] + u * p.e1[a] + v * p.e2[a]);
      }
      std::sort(hits.begin(), hits.end());
      std::size_t h = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = g.origin[a] + (i + 0.5) * g.step[a];
        while (h < hits.size() && hits[h] < x) ++h;
        if (h % 2 == 1) {
          std::array<std::size_t, 3> idx{};
          idx[a] = i;
          idx[b] = jb;
          idx[c] = jc;
          ++votes[vid(idx[0], idx[1], idx[2])];
        }
      }
    }
  }
  g.occ.resize(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) g.occ[i] = votes[i] >= 2;
  return g;
}

Aabb joint_box(const PolyMesh& a, const PolyMesh& b, int res) {
  Aabb box;
  for (const PolyMesh* m : {&a, &b}) {
    for (const Vec3& v : m->vertices) {
      box.lo = box.lo.cwiseMin(v);
      box.hi = box.hi.cwiseMax(v);
    }
  }
  Vec3 ext = box.hi - box.lo;
  const double longest = ext.maxCoeff();
  if (!(longest > 0.0)) throw DegenerateError("meshes have zero extent");
  for (int i = 0; i < 3; ++i) ext[i] = std::max(ext[i], longest / res);
  const Vec3 mid = 0.5 * (box.lo + box.hi);
  const Vec3 half = 0.5 * ext * (1.0 + 1.0 / res);
  return {mid - half, mid + half};
}

}  // namespace

VoxelGrid voxelize(const PolyMesh& mesh, const Aabb& box, int res) {
  return voxelize_impl<true>(mesh, box, res);
}

VoxelGrid voxelize_serial(const PolyMesh& mesh, const Aabb& box, int res) {
  return voxelize_impl<false>(mesh, box, res);
}

IouResult voxel_iou(const PolyMesh& a, const PolyMesh& b, int res) {
  if (a.vertices.empty() && b.vertices.empty()) return {1.0, true};
  const Aabb box = joint_box(a, b, res);
  const VoxelGrid ga = voxelize(a, box, res), gb = voxelize(b, box, res);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < ga.occ.size(); ++i) {
    inter += ga.occ[i] & gb.occ[i];
    uni += ga.occ[i] | gb.occ[i];
  }
  if (uni == 0) return {1.0, true};
  return {static_cast<double>(inter) / static_cast<double>(uni), false};
}

// --- topology -----------------------------------------------------------------

FaceCensus face_census(const PolyMesh& mesh) {
  FaceCensus c;
  for (const Face& f : mesh.faces) {
    if (f.size() == 3) ++c.tris;
    else if (f.size() == 4) ++c.quads;
    else ++c.others;
  }
  return c;
}

double quad_ratio(const PolyMesh& mesh) {
  const FaceCensus c = face_census(mesh);
  if (c.total() == 0) throw UndefinedMetricError("quad ratio of a mesh without faces");
  return static_cast<double>(c.quads) / static_cast<double>(c.total());
}

namespace {

// |cos| between two directions; nullopt when either has zero length.
std::optional<double> abs_cos(const Vec3& u, const Vec3& v) {
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return std::nullopt;
  return std::min(1.0, std::abs(u.dot(v)) / (nu * nv));
}

}  // namespace

double oep(const PolyMesh& mesh) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Face& f : mesh.faces) {
    if (f.size() != 4) continue;
    std::array<Vec3, 4> e;
    for (int i = 0; i < 4; ++i) e[i] = mesh.vertices[f[(i + 1) % 4]] - mesh.vertices[f[i]];
    const auto c02 = abs_cos(e[0], e[2]), c13 = abs_cos(e[1], e[3]);
    if (!c02 || !c13) continue;
    sum += 0.5 * (*c02 + *c13);
    ++count;
  }
  if (count == 0) throw UndefinedMetricError("OEP needs at least one quad");
  return sum / static_cast<double>(count);
}

double efc(const PolyMesh& mesh) {
  mesh.validate();
  const EdgeFaceMap map(mesh);
  // Neighbour of `v` in quad `f` other than `w`.
  auto other = [&](Index f, Index v, Index w) {
    const Face& q = mesh.faces[f];
    const std::size_t i = std::find(q.begin(), q.end(), v) - q.begin();
    const Index next = q[(i + 1) % 4], prev = q[(i + 3) % 4];
    return next == w ? prev : next;
  };
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [edge, faces] : map.edges()) {
    if (faces.size() != 2 || mesh.faces[faces[0]].size() != 4 || mesh.faces[faces[1]].size() != 4) continue;
    for (const auto& [v, w] : {std::pair{edge.first, edge.second}, std::pair{edge.second, edge.first}}) {
      const Vec3& p = mesh.vertices[v];
      const auto c = abs_cos(mesh.vertices[other(faces[0], v, w)] - p, mesh.vertices[other(faces[1], v, w)] - p);
      if (!c) continue;
      sum += *c;
      ++count;
    }
  }
  if (count == 0) throw UndefinedMetricError("EFC needs two edge-adjacent quads");
  return sum / static_cast<double>(count);
}

// --- edge flow ratio ----------------------------------------------------------

void EfrConfig::validate() const {
  const bool ok = delta_long > 0 && delta_loop > 0 && ang_long > 0 && ang_loop > 0 &&
                  resample_m >= 2 && resample_ns >= 2 && tau > 0 && sharp_dihedral_deg > 0;
  if (!ok) throw RangeError("EFR parameters must be positive (sample counts >= 2)");
}

std::string EfrConfig::to_text() const {
  KvConfig kv;
  kv.set("delta_long", delta_long);
  kv.set("delta_loop", delta_loop);
  kv.set("ang_long", ang_long);
  kv.set("ang_loop", ang_loop);
  kv.set("resample_m", static_cast<long long>(resample_m));
  kv.set("resample_ns", static_cast<long long>(resample_ns));
  kv.set("tau", tau);
  kv.set("sharp_dihedral_deg", sharp_dihedral_deg);
  return kv.to_text();
}

bool EfrConfig::apply(const KvConfig& kv, const std::string& key) {
  if (key == "delta_long") delta_long = kv.get_double(key);
  else if (key == "delta_loop") delta_loop = kv.get_double(key);
  else if (key == "ang_long") ang_long = kv.get_double(key);
  else if (key == "ang_loop") ang_loop = kv.get_double(key);
  else if (key == "resample_m") resample_m = static_cast<int>(kv.get_int(key));
  else if (key == "resample_ns") resample_ns = static_cast<int>(kv.get_int(key));
  else if (key == "tau") tau = kv.get_double(key);
  else if (key == "sharp_dihedral_deg") sharp_dihedral_deg = kv.get_double(key);
  else return false;
  return true;
}

EfrConfig EfrConfig::from_text(std::string_view text) {
  const KvConfig kv = KvConfig::parse(text);
  EfrConfig cfg;
  for (const auto& key : kv.keys()) {
    if (!cfg.apply(kv, key)) throw ParseError("unknown EFR key '" + key + "'", 0);
  }
  cfg.validate();
  return cfg;
}

std::vector<FeatureLine> extract_feature_lines(const PolyMesh& gt, const EfrConfig& cfg) {
  cfg.validate();
  gt.validate();
  const EdgeFaceMap map(gt);
  std::vector<Vec3> normals(gt.faces.size());
  for (std::size_t f = 0; f < gt.faces.size(); ++f) {
    std::vector<Vec3> cyc;
    for (Index v : gt.faces[f]) cyc.push_back(gt.vertices[v]);
    normals[f] = newell_vector(cyc);
  }
  std::vector<std::vector<Index>> hard(gt.vertices.size());
  std::set<EdgeKey> unvisited;
  for (const auto& [e, faces] : map.edges()) {
    bool is_hard = faces.size() != 2;
    if (!is_hard) {
      const Vec3& n0 = normals[faces[0]];
      const Vec3& n1 = normals[faces[1]];
      is_hard = n0.norm() > 0 && n1.norm() > 0 && fold_angle_deg(n0, n1) > cfg.sharp_dihedral_deg;
    }
    if (!is_hard) continue;
    hard[e.first].push_back(e.second);
    hard[e.second].push_back(e.first);
    unvisited.insert(e);
  }
  for (auto& h : hard) std::sort(h.begin(), h.end());

  std::vector<FeatureLine> out;
  auto emit = [&](std::vector<Index> chain, bool loop) {
    if (loop) chain.pop_back();
    if (chain.size() < 2) return;
    FeatureLine fl;
    fl.kind = loop ? FeatureLine::Kind::kLoop : FeatureLine::Kind::kLong;
    for (Index v : chain) fl.points.push_back(gt.vertices[v]);
    fl.vertices = std::move(chain);
    out.push_back(std::move(fl));
  };
  // Follows unvisited hard edges from `start` through `first` while the
  // current vertex has hard degree 2.
  auto walk = [&](Index start, Index first) {
    std::vector<Index> chain = {start, first};
    unvisited.erase(EdgeKey(start, first));
    Index cur = first;
    while (hard[cur].size() == 2 && cur != start) {
      Index next = hard[cur][0];
      if (!unvisited.count(EdgeKey(cur, next))) next = hard[cur][1];
      if (!unvisited.count(EdgeKey(cur, next))) break;
      unvisited.erase(EdgeKey(cur, next));
      chain.push_back(next);
      cur = next;
    }
    return chain;
  };
  for (Index v = 0; v < hard.size(); ++v) {
    if (hard[v].empty() || hard[v].size() == 2) continue;
    for (Index w : hard[v]) {
      if (!unvisited.count(EdgeKey(v, w))) continue;
      std::vector<Index> chain = walk(v, w);
      const bool loop = chain.back() == v;
      emit(std::move(chain), loop);
    }
  }
  // What remains are cycles through degree-2 vertices only.
  for (Index v = 0; v < hard.size(); ++v) {
    if (hard[v].size() != 2 || !unvisited.count(EdgeKey(v, hard[v][0]))) continue;
    std::vector<Index> chain = walk(v, hard[v][0]);
    const bool loop = chain.back() == v;
    emit(std::move(chain), loop);
  }
  return out;
}

std::vector<Vec3> resample_polyline(std::span<const Vec3> points, bool closed, std::size_t n) {
  if (points.size() < 2) throw StructureError("polyline needs at least 2 points");
  if (n < 1) throw RangeError("resample count must be >= 1");
  std::vector<Vec3> pts(points.begin(), points.end());
  if (closed) pts.push_back(points.front());
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = cum.back();
  if (!(total > 0.0)) throw DegenerateError("polyline has zero length");
  std::vector<Vec3> out;
  out.reserve(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!closed && i + 1 == n && n > 1) {
      out.push_back(pts.back());
      break;
    }
    const double denom = closed ? static_cast<double>(n) : static_cast<double>(std::max<std::size_t>(n - 1, 1));
    const double s = total * static_cast<double>(i) / denom;
    while (seg + 2 < pts.size() && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
  }
  return out;
}

namespace {

// `q` rotated to start at its point nearest `p0`, inserting that point when
// it falls inside a segment.
std::vector<Vec3> restart_loop(std::span<const Vec3> q, const Vec3& p0) {
  const std::size_t n = q.size();
  std::size_t best_seg = 0;
  double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = q[i];
    const Vec3 ab = q[(i + 1) % n] - a;
    const double l2 = ab.squaredNorm();
    const double t = l2 > 0 ? std::clamp((p0 - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
    const double d = (a + t * ab - p0).squaredNorm();
    if (d < best_d) best_d = d, best_seg = i, best_t = t;
  }
  std::vector<Vec3> out;
  out.reserve(n + 1);
  if (best_t == 0.0 || best_t == 1.0) {
    const std::size_t start = (best_seg + (best_t == 1.0 ? 1 : 0)) % n;
    for (std::size_t k = 0; k < n; ++k) out.push_back(q[(start + k) % n]);
  } else {
    const Vec3 a = q[best_seg];
    out.push_back(a + best_t * (q[(best_seg + 1) % n] - a));
    for (std::size_t k = 1; k <= n; ++k) out.push_back(q[(best_seg + k) % n]);
  }
  return out;
}

}  // namespace

double curve_distance(std::span<const Vec3> p, std::span<const Vec3> q, int ns, bool closed) {
  if (ns < 2) throw RangeError("resample count must be >= 2");
  if (p.size() < 2 || q.size() < 2) throw StructureError("curves need at least 2 points");
  const std::size_t n = static_cast<std::size_t>(ns);
  const std::vector<Vec3> P = resample_polyline(p, closed, n);
  const std::vector<Vec3> Q = closed ? resample_polyline(restart_loop(q, p[0]), true, n)
                                     : resample_polyline(q, false, n);
  double fwd = 0.0, rev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fwd += (P[i] - Q[i]).norm();
    rev += (P[i] - Q[closed ? (n - i) % n : n - 1 - i]).norm();
  }
  return std::min(fwd, rev) / static_cast<double>(n);
}

namespace {

// Unit tangent of the sample chord that arrives at each sample when walking
// the curve forward (`arriving`) or backward. At a corner the nearest sample
// then leans toward the side the walk comes from.
std::vector<Vec3> chord_tangents(const std::vector<Vec3>& pts, bool closed, bool arriving) {
  const std::size_t n = pts.size();
  std::vector<Vec3> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = i, b = i;
    if (arriving) {
      a = i == 0 ? (closed ? n - 1 : 0) : i - 1;
      b = i == 0 && !closed ? 1 : i;
    } else {
      b = i + 1 == n ? (closed ? 0 : n - 1) : i + 1;
      a = i + 1 == n && !closed ? n - 2 : i;
    }
    const Vec3 d = pts[b] - pts[a];
    t[i] = d.norm() > 0 ? Vec3(d.normalized()) : Vec3::Zero();
  }
  return t;
}

// Samples every segment at spacing at most `step`, keeping the polyline's own
// vertices so that a vertex on a corner maps to the corner sample exactly.
std::vector<Vec3> densify_polyline(const std::vector<Vec3>& pts, bool closed, double step) {
  std::vector<Vec3> outp;
  const std::size_t nseg = closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec3& a = pts[i];
    const Vec3& b = pts[(i + 1) % pts.size()];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
    for (std::size_t j = 0; j < k; ++j) outp.push_back(a + (b - a) * (static_cast<double>(j) / k));
  }
  if (!closed) outp.push_back(pts.back());
  return outp;
}

}  // namespace

std::optional<TracedChain> trace_chain(const FeatureLine& feature, const PolyMesh& out,
                                       const std::vector<std::vector<Index>>& neighbors,
                                       const EfrConfig& cfg) {
  cfg.validate();
  if (feature.points.size() < 2 || out.vertices.empty()) return std::nullopt;
  const bool closed = feature.closed();
  const double delta = closed ? cfg.delta_loop : cfg.delta_long;
  const double max_angle = closed ? cfg.ang_loop : cfg.ang_long;
  // resample_m is a floor: samples are kept at most delta/2 apart so that
  // every vertex lying on the feature line is within delta of one.
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < feature.points.size(); ++i) length += (feature.points[i + 1] - feature.points[i]).norm();
  if (closed) length += (feature.points.front() - feature.points.back()).norm();
  const std::size_t m = std::max<std::size_t>(cfg.resample_m, static_cast<std::size_t>(std::ceil(2.0 * length / delta)) + 1);
  if (!(length > 0.0)) return std::nullopt;
  const std::vector<Vec3> samples = densify_polyline(feature.points, closed, length / static_cast<double>(m - 1));
  const std::vector<Vec3> tan_fwd = chord_tangents(samples, closed, true);
  const std::vector<Vec3> tan_bwd = chord_tangents(samples, closed, false);

  Aabb box = bounding_box(samples);
  box.lo.array() -= delta;
  box.hi.array() += delta;
  std::vector<int> phi(out.vertices.size(), -1);
  std::vector<Index> near;
  for (Index v = 0; v < out.vertices.size(); ++v) {
    const Vec3& p = out.vertices[v];
    if ((p.array() < box.lo.array()).any() || (p.array() > box.hi.array()).any()) continue;
    int best = -1;
    double bd = delta * delta;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double d = (samples[i] - p).squaredNorm();
      if (d < bd) bd = d, best = static_cast<int>(i);
    }
    if (best >= 0) {
      phi[v] = best;
      near.push_back(v);
    }
  }

  std::optional<TracedChain> best;
  std::vector<std::size_t> stamp(out.vertices.size(), 0);
  std::size_t gen = 0;
  for (Index start : near) {
    for (double s : {1.0, -1.0}) {
      const std::vector<Vec3>& tan = s > 0 ? tan_fwd : tan_bwd;
      ++gen;
      std::vector<Index> chain = {start};
      stamp[start] = gen;
      while (true) {
        const Index cur = chain.back();
        Index pick = 0;
        double pick_angle = std::numeric_limits<double>::infinity();
        for (Index u : neighbors[cur]) {
          if (phi[u] < 0 || stamp[u] == gen) continue;
          const Vec3 d = out.vertices[u] - out.vertices[cur];
          if (d.norm() == 0.0) continue;
          const double c = std::clamp(d.normalized().dot(s * tan[phi[u]]), -1.0, 1.0);
          const double angle = std::acos(c);
          if (angle < pick_angle) pick_angle = angle, pick = u;
        }
        if (!(pick_angle <= max_angle)) break;
        chain.push_back(pick);
        stamp[pick] = gen;
      }
      if (chain.size() < 2) continue;
      std::vector<Vec3> pts;
      for (Index v : chain) pts.push_back(out.vertices[v]);
      double d = 0.0;
      try {
        d = curve_distance(feature.points, pts, cfg.resample_ns, closed);
      } catch (const DegenerateError&) {
        continue;
      }
      if (!best || d < best->distance) best = TracedChain{std::move(chain), d};
    }
  }
  return best;
}

std::optional<TracedChain> trace_chain(const FeatureLine& feature, const PolyMesh& out,
                                       const EfrConfig& cfg) {
  return trace_chain(feature, out, vertex_neighbors(out), cfg);
}

EfrResult efr(const PolyMesh& gt, const PolyMesh& out, const EfrConfig& cfg) {
  const std::vector<FeatureLine> features = extract_feature_lines(gt, cfg);
  if (features.empty()) throw UndefinedMetricError("reference mesh has no feature lines");
  EfrResult r;
  const std::vector<std::vector<Index>> nbr =
      out.vertices.empty() ? std::vector<std::vector<Index>>{} : vertex_neighbors(out);
  const Aabb out_box = bounding_box(out.vertices);
  double sum = 0.0;
  for (const FeatureLine& f : features) {
    (f.closed() ? r.loops : r.lines) += 1;
    double score = 0.0;
    const double delta = f.closed() ? cfg.delta_loop : cfg.delta_long;
    const Aabb fb = bounding_box(f.points);
    const bool overlaps = !out.vertices.empty() &&
                          ((fb.lo.array() - delta) <= out_box.hi.array()).all() &&
                          ((fb.hi.array() + delta) >= out_box.lo.array()).all();
    if (overlaps) {
      if (auto chain = trace_chain(f, out, nbr, cfg)) {
        score = std::exp(-chain->distance / cfg.tau);
        ++r.matched;
      }
    }
    r.scores.push_back(score);
    sum += score;
  }
  r.value = sum / static_cast<double>(features.size());
  return r;
}

}  // namespace qdm
