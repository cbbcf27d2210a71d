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

#include "qdm/goldberg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "qdm/error.hpp"

namespace qdm {

void GoldbergParams::validate() const {
  if (n < 0 || m < n || (m == 0 && n == 0)) {
    throw RangeError("Goldberg parameters need m >= n >= 0 and (m, n) != (0, 0)");
  }
  // Keeps every lattice expression comfortably inside int.
  if (m > 10000) throw RangeError("Goldberg parameter m too large");
}

std::vector<std::pair<int, int>> lattice_points(const GoldbergParams& p) {
  p.validate();
  const long long m = p.m, n = p.n, t = p.t();
  // The triangle spans a in [-n, m] and b in [0, m + n].
  std::vector<std::pair<int, int>> out;
  for (long long a = -n; a <= m; ++a) {
    for (long long b = 0; b <= m + n; ++b) {
      if ((m + n) * a + n * b >= 0 && m * b - n * a >= 0 && t - m * a - (m + n) * b >= 0) {
        out.emplace_back(static_cast<int>(a), static_cast<int>(b));
      }
    }
  }
  return out;
}

PolyMesh icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  PolyMesh m;
  for (double s : {-1.0, 1.0}) {
    for (double t : {-1.0, 1.0}) {
      m.vertices.emplace_back(0, s, t * phi);
      m.vertices.emplace_back(s, t * phi, 0);
      m.vertices.emplace_back(t * phi, 0, s);
    }
  }
  for (Vec3& v : m.vertices) v.normalize();
  // Faces are the vertex triples at mutual edge distance.
  double shortest = 1e9;
  for (std::size_t i = 1; i < m.vertices.size(); ++i) {
    shortest = std::min(shortest, (m.vertices[i] - m.vertices[0]).squaredNorm());
  }
  auto adjacent = [&](Index i, Index j) {
    return std::abs((m.vertices[i] - m.vertices[j]).squaredNorm() - shortest) < 1e-9;
  };
  for (Index i = 0; i < 12; ++i) {
    for (Index j = i + 1; j < 12; ++j) {
      if (!adjacent(i, j)) continue;
      for (Index k = j + 1; k < 12; ++k) {
        if (!adjacent(i, k) || !adjacent(j, k)) continue;
        const Vec3 nrm = (m.vertices[j] - m.vertices[i]).cross(m.vertices[k] - m.vertices[i]);
        if (nrm.dot(m.vertices[i]) > 0) m.faces.push_back({i, j, k});
        else m.faces.push_back({i, k, j});
      }
    }
  }
  return m;
}

namespace {

// Merges points closer than `tol` through a hash grid, keeping the first.
std::vector<Vec3> dedup(const std::vector<Vec3>& pts, double tol) {
  const double cell = 1e-6;
  auto key = [](long long x, long long y, long long z) {
    return (x * 73856093LL) ^ (y * 19349663LL) ^ (z * 83492791LL);
  };
  std::unordered_multimap<long long, std::size_t> grid;
  std::vector<Vec3> out;
  for (const Vec3& p : pts) {
    const long long cx = static_cast<long long>(std::floor(p.x() / cell));
    const long long cy = static_cast<long long>(std::floor(p.y() / cell));
    const long long cz = static_cast<long long>(std::floor(p.z() / cell));
    bool dup = false;
    for (long long dx = -1; dx <= 1 && !dup; ++dx)
      for (long long dy = -1; dy <= 1 && !dup; ++dy)
        for (long long dz = -1; dz <= 1 && !dup; ++dz) {
          auto [lo, hi] = grid.equal_range(key(cx + dx, cy + dy, cz + dz));
          for (auto it = lo; it != hi; ++it) {
            if ((out[it->second] - p).norm() < tol) {
              dup = true;
              break;
            }
          }
        }
    if (dup) continue;
    grid.emplace(key(cx, cy, cz), out.size());
    out.push_back(p);
  }
  return out;
}

template <bool kParallel>
std::vector<Vec3> project_impl(const std::vector<std::pair<int, int>>& lattice, const GoldbergParams& p) {
  p.validate();
  if (lattice.empty()) throw StructureError("empty lattice");
  const PolyMesh ico = icosahedron();
  const double m = p.m, n = p.n, t = static_cast<double>(p.t());
  const std::ptrdiff_t nf = static_cast<std::ptrdiff_t>(ico.faces.size());
  std::vector<std::vector<Vec3>> per_face(ico.faces.size());
#pragma omp parallel for schedule(static) if (kParallel)
  for (std::ptrdiff_t f = 0; f < nf; ++f) {
    const Vec3& v0 = ico.vertices[ico.faces[f][0]];
    const Vec3& v1 = ico.vertices[ico.faces[f][1]];
    const Vec3& v2 = ico.vertices[ico.faces[f][2]];
    auto& out = per_face[f];
    out.reserve(lattice.size());
    for (const auto& [a, b] : lattice) {
      const double w1 = ((m + n) * a + n * b) / t;
      const double w2 = (m * b - n * a) / t;
      const double w0 = (t - m * a - (m + n) * b) / t;
      out.push_back((w0 * v0 + w1 * v1 + w2 * v2).normalized());
    }
  }
  std::vector<Vec3> all;
  all.reserve(lattice.size() * ico.faces.size());
  for (const auto& f : per_face) all.insert(all.end(), f.begin(), f.end());
  return dedup(all, 1e-9);
}

}  // namespace

std::vector<Vec3> project_to_icosahedron(const std::vector<std::pair<int, int>>& lattice,
                                         const GoldbergParams& p) {
  return project_impl<true>(lattice, p);
}

std::vector<Vec3> project_to_icosahedron_serial(const std::vector<std::pair<int, int>>& lattice,
                                                const GoldbergParams& p) {
  return project_impl<false>(lattice, p);
}

// --- hull -----------------------------------------------------------------------

PolyMesh HullMesh::to_mesh() const {
  PolyMesh m;
  m.vertices = vertices;
  for (const auto& f : faces) m.faces.push_back({f[0], f[1], f[2]});
  return m;
}

namespace {

constexpr double kPlaneTol = 1e-12;

struct HullBuilder {
  const std::vector<Vec3>& pts;
  std::vector<std::array<Index, 3>> faces;  // input point ids
  std::vector<Vec3> normal;                 // unit
  std::vector<char> alive;
  std::unordered_map<std::uint64_t, Index> edge_face;  // directed edge -> face

  static std::uint64_t key(Index a, Index b) { return (std::uint64_t{a} << 32) | b; }

  double dist(Index f, const Vec3& p) const { return normal[f].dot(p - pts[faces[f][0]]); }

  void add_face(Index a, Index b, Index c) {
    const Index id = static_cast<Index>(faces.size());
    faces.push_back({a, b, c});
    normal.push_back((pts[b] - pts[a]).cross(pts[c] - pts[a]).normalized());
    alive.push_back(1);
    edge_face[key(a, b)] = id;
    edge_face[key(b, c)] = id;
    edge_face[key(c, a)] = id;
  }

  void kill_face(Index f) {
    alive[f] = 0;
    const auto& t = faces[f];
    for (int i = 0; i < 3; ++i) {
      auto it = edge_face.find(key(t[i], t[(i + 1) % 3]));
      if (it != edge_face.end() && it->second == f) edge_face.erase(it);
    }
  }

  void insert(Index p) {
    const Vec3& x = pts[p];
    Index start = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Index f = 0; f < faces.size(); ++f) {
      if (!alive[f]) continue;
      const double d = dist(f, x);
      if (d > best) best = d, start = f;
    }
    if (best < -kPlaneTol) return;  // strictly inside
    // Visible region grown from the face that sees p best.
    std::vector<Index> visible = {start};
    std::vector<char> seen(faces.size(), 0);
    seen[start] = 1;
    for (std::size_t i = 0; i < visible.size(); ++i) {
      const auto& t = faces[visible[i]];
      for (int e = 0; e < 3; ++e) {
        auto it = edge_face.find(key(t[(e + 1) % 3], t[e]));
        if (it == edge_face.end()) continue;
        const Index g = it->second;
        if (seen[g] || dist(g, x) < -kPlaneTol) continue;
        seen[g] = 1;
        visible.push_back(g);
      }
    }
    std::vector<std::pair<Index, Index>> horizon;
    for (Index f : visible) {
      const auto& t = faces[f];
      for (int e = 0; e < 3; ++e) {
        const Index a = t[e], b = t[(e + 1) % 3];
        auto it = edge_face.find(key(b, a));
        if (it == edge_face.end() || !seen[it->second]) horizon.emplace_back(a, b);
      }
    }
    for (Index f : visible) kill_face(f);
    for (const auto& [a, b] : horizon) add_face(a, b, p);
  }
};

}  // namespace

HullMesh convex_hull(const std::vector<Vec3>& points) {
  const std::size_t n = points.size();
  if (n < 4) throw DegenerateError("convex hull needs at least 4 points");
  // Initial simplex from extreme points.
  Index i0 = 0;
  for (Index i = 1; i < n; ++i) {
    if (points[i].x() < points[i0].x()) i0 = i;
  }
  auto farthest = [&](auto&& score) {
    Index best = 0;
    double bs = -1.0;
    for (Index i = 0; i < n; ++i) {
      const double s = score(points[i]);
      if (s > bs) bs = s, best = i;
    }
    return std::pair{best, bs};
  };
  const auto [i1, d1] = farthest([&](const Vec3& p) { return (p - points[i0]).norm(); });
  if (!(d1 > 0)) throw DegenerateError("all hull points coincide");
  const Vec3 axis = (points[i1] - points[i0]).normalized();
  const auto [i2, d2] = farthest([&](const Vec3& p) { return (p - points[i0]).cross(axis).norm(); });
  if (d2 <= 1e-9 * d1) throw DegenerateError("hull points are collinear");
  const Vec3 nrm = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  const auto [i3, d3] = farthest([&](const Vec3& p) { return std::abs(nrm.dot(p - points[i0])); });
  if (d3 <= 1e-9 * d1) throw DegenerateError("hull points are coplanar");

  HullBuilder hb{points, {}, {}, {}, {}};
  if (nrm.dot(points[i3] - points[i0]) > 0) {
    hb.add_face(i0, i2, i1);
    hb.add_face(i0, i1, i3);
    hb.add_face(i1, i2, i3);
    hb.add_face(i2, i0, i3);
  } else {
    hb.add_face(i0, i1, i2);
    hb.add_face(i0, i3, i1);
    hb.add_face(i1, i3, i2);
    hb.add_face(i2, i3, i0);
  }
  for (Index i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    hb.insert(i);
  }

  // Compact to the points that ended up on the hull, in input order.
  std::vector<Index> remap(n, static_cast<Index>(-1));
  HullMesh h;
  for (Index f = 0; f < hb.faces.size(); ++f) {
    if (!hb.alive[f]) continue;
    for (Index v : hb.faces[f]) remap[v] = 0;
  }
  for (Index i = 0; i < n; ++i) {
    if (remap[i] == 0) {
      remap[i] = static_cast<Index>(h.vertices.size());
      h.vertices.push_back(points[i]);
    }
  }
  for (Index f = 0; f < hb.faces.size(); ++f) {
    if (!hb.alive[f]) continue;
    const auto& t = hb.faces[f];
    h.faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  }
  h.vertex_faces.assign(h.vertices.size(), {});
  for (Index f = 0; f < h.faces.size(); ++f) {
    for (Index v : h.faces[f]) h.vertex_faces[v].push_back(f);
  }
  return h;
}

PolyMesh dual_mesh(const HullMesh& hull, DualPlacement placement) {
  PolyMesh d;
  d.vertices.reserve(hull.faces.size());
  for (const auto& f : hull.faces) {
    const Vec3& a = hull.vertices[f[0]];
    const Vec3& b = hull.vertices[f[1]];
    const Vec3& c = hull.vertices[f[2]];
    if (placement == DualPlacement::kCentroid) {
      const Vec3 g = (a + b + c) / 3.0;
      if (g.norm() == 0.0) throw DegenerateError("hull face centroid at the origin");
      d.vertices.push_back(g.normalized());
    } else {
      const Vec3 n = (b - a).cross(c - a).normalized();
      const double dist = n.dot(a);
      if (!(dist > 1e-12)) throw DegenerateError("origin is not inside the hull");
      d.vertices.push_back(n / dist);
    }
  }
  std::unordered_map<std::uint64_t, Index> edge_face;
  auto key = [](Index a, Index b) { return (std::uint64_t{a} << 32) | b; };
  for (Index f = 0; f < hull.faces.size(); ++f) {
    const auto& t = hull.faces[f];
    for (int e = 0; e < 3; ++e) {
      if (!edge_face.emplace(key(t[e], t[(e + 1) % 3]), f).second) {
        throw StructureError("hull has a repeated directed edge");
      }
    }
  }
  for (Index v = 0; v < hull.vertices.size(); ++v) {
    const auto& around = hull.vertex_faces[v];
    if (around.size() < 3) throw StructureError("hull vertex with fewer than 3 faces");
    // From face (v, a, b) step to the face holding directed edge (v, b).
    Face cycle;
    Index f = around.front();
    do {
      cycle.push_back(f);
      const auto& t = hull.faces[f];
      const int i = static_cast<int>(std::find(t.begin(), t.end(), v) - t.begin());
      const Index b = t[(i + 2) % 3];
      auto it = edge_face.find(key(v, b));
      if (it == edge_face.end()) throw StructureError("hull vertex is on an open boundary");
      f = it->second;
      if (cycle.size() > around.size()) throw StructureError("hull vertex is not a simple fan");
    } while (f != around.front());
    if (cycle.size() != around.size()) throw StructureError("hull vertex is not a simple fan");
    d.faces.push_back(std::move(cycle));
  }
  return d;
}

PolyMesh goldberg(const GoldbergParams& p, DualPlacement placement) {
  const std::vector<Vec3> pts = project_to_icosahedron(lattice_points(p), p);
  return normalize_unit_cube(dual_mesh(convex_hull(pts), placement));
}

bool CountReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

std::string CountReport::summary() const {
  std::ostringstream out;
  auto actual = [&](const std::string& name) {
    for (const Check& c : checks) {
      if (c.name == name) return c.actual;
    }
    return 0LL;
  };
  out << "counts: V=" << actual("V") << " E=" << actual("E") << " F=" << actual("F") << ' '
      << (passed() ? "OK" : "FAIL");
  for (const Check& c : checks) {
    if (!c.passed()) out << "\n  " << c.name << ": expected " << c.expected << ", got " << c.actual;
  }
  return out.str();
}

CountReport validate_counts(const PolyMesh& mesh, const GoldbergParams& p) {
  p.validate();
  const long long t = p.t();
  const long long v = static_cast<long long>(mesh.vertices.size());
  const long long f = static_cast<long long>(mesh.faces.size());
  long long e = 0, pent = 0, hex = 0;
  if (!mesh.faces.empty()) e = static_cast<long long>(EdgeFaceMap(mesh).size());
  for (const Face& face : mesh.faces) {
    pent += face.size() == 5;
    hex += face.size() == 6;
  }
  CountReport r;
  r.checks = {{"V", 20 * t, v},
              {"E", 30 * t, e},
              {"F", 10 * t + 2, f},
              {"pentagons", 12, pent},
              {"hexagons", 10 * t - 10, hex},
              {"euler", 2, v - e + f}};
  return r;
}

}  // namespace qdm
