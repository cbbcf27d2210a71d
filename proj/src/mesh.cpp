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

#include "qdm/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "qdm/error.hpp"

namespace qdm {

void PolyMesh::validate() const {
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    if (face.size() < 3) {
      throw StructureError("face " + std::to_string(f) + " has fewer than 3 vertices");
    }
    for (std::size_t i = 0; i < face.size(); ++i) {
      if (face[i] >= vertices.size()) {
        throw StructureError("face " + std::to_string(f) + " references vertex " +
                             std::to_string(face[i]) + " of " +
                             std::to_string(vertices.size()));
      }
      for (std::size_t j = i + 1; j < face.size(); ++j) {
        if (face[i] == face[j]) {
          throw StructureError("face " + std::to_string(f) + " repeats vertex " +
                               std::to_string(face[i]));
        }
      }
    }
  }
}

std::vector<Vec3> PolyMesh::face_points(std::size_t f) const {
  std::vector<Vec3> pts;
  pts.reserve(faces[f].size());
  for (Index v : faces[f]) pts.push_back(vertices[v]);
  return pts;
}

EdgeFaceMap::EdgeFaceMap(const PolyMesh& mesh) {
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    for (std::size_t i = 0; i < face.size(); ++i) {
      edges_[EdgeKey(face[i], face[(i + 1) % face.size()])].push_back(
          static_cast<Index>(f));
    }
  }
  // Faces are visited in ascending order, so every list is already sorted.
}

std::span<const Index> EdgeFaceMap::faces_of(EdgeKey e) const {
  auto it = edges_.find(e);
  if (it == edges_.end()) return {};
  return it->second;
}

std::size_t EdgeFaceMap::count_internal() const {
  return std::count_if(edges_.begin(), edges_.end(),
                       [](const auto& kv) { return kv.second.size() == 2; });
}

std::size_t EdgeFaceMap::count_boundary() const {
  return std::count_if(edges_.begin(), edges_.end(),
                       [](const auto& kv) { return kv.second.size() == 1; });
}

namespace {

double parse_double(std::string_view tok, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("bad number '" + std::string(tok) + "'", line);
  }
  return value;
}

// Face tokens look like `7`, `7/2`, `7//3` or `7/2/3`; only the position
// index matters. Negative (relative) indices are resolved against the
// vertices read so far.
Index parse_face_index(std::string_view tok, std::size_t num_vertices,
                       std::size_t line) {
  tok = tok.substr(0, tok.find('/'));
  long long idx = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || idx == 0) {
    throw ParseError("bad face index '" + std::string(tok) + "'", line);
  }
  if (idx < 0) idx += static_cast<long long>(num_vertices) + 1;
  if (idx <= 0) throw StructureError("line " + std::to_string(line) +
                                     ": relative face index out of range");
  return static_cast<Index>(idx - 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

PolyMesh read_obj(std::istream& in) {
  PolyMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> face_lines;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) throw ParseError("vertex needs 3 coordinates", line_no);
      mesh.vertices.emplace_back(parse_double(toks[1], line_no),
                                 parse_double(toks[2], line_no),
                                 parse_double(toks[3], line_no));
    } else if (toks[0] == "f") {
      if (toks.size() < 4) throw ParseError("face needs at least 3 indices", line_no);
      Face face;
      face.reserve(toks.size() - 1);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        face.push_back(parse_face_index(toks[i], mesh.vertices.size(), line_no));
      }
      mesh.faces.push_back(std::move(face));
      face_lines.push_back(line_no);
    }
    // vt, vn, g, o, s, usemtl, mtllib, l, ... are ignored.
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (Index v : mesh.faces[f]) {
      if (v >= mesh.vertices.size()) {
        throw StructureError("line " + std::to_string(face_lines[f]) +
                             ": face index " + std::to_string(v + 1) +
                             " exceeds vertex count " +
                             std::to_string(mesh.vertices.size()));
      }
    }
  }
  mesh.validate();
  return mesh;
}

PolyMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_obj(in);
}

void write_obj(const PolyMesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const Face& f : mesh.faces) {
    out << 'f';
    for (Index v : f) out << ' ' << v + 1;
    out << '\n';
  }
}

void save_obj(const PolyMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_obj(mesh, out);
  if (!out) throw IoError("write failed for " + path.string());
}

Aabb bounding_box(std::span<const Vec3> points) {
  Aabb box;
  for (const Vec3& p : points) box.extend(p);
  return box;
}

PolyMesh normalize_unit_cube(const PolyMesh& mesh) {
  if (mesh.vertices.empty()) throw DegenerateError("cannot normalize an empty mesh");
  const Aabb box = bounding_box(mesh.vertices);
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0.0)) throw DegenerateError("mesh has zero extent");
  const Vec3 center = 0.5 * (box.lo + box.hi);
  const double scale = 2.0 / extent;
  PolyMesh out = mesh;
  for (Vec3& v : out.vertices) v = (v - center) * scale;
  return out;
}

Vec3 face_centroid(const PolyMesh& mesh, std::size_t face) {
  Vec3 c = Vec3::Zero();
  for (Index v : mesh.faces[face]) c += mesh.vertices[v];
  return c / static_cast<double>(mesh.faces[face].size());
}

Vec3 newell_vector(std::span<const Vec3> cycle) {
  Vec3 n = Vec3::Zero();
  const std::size_t k = cycle.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3& a = cycle[i];
    const Vec3& b = cycle[(i + 1) % k];
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  return n;
}

Vec3 newell_normal(std::span<const Vec3> cycle) {
  if (cycle.size() < 3) throw DegenerateError("cycle shorter than 3");
  const Vec3 n = newell_vector(cycle);
  const double len = n.norm();
  if (!(len > 0.0)) throw DegenerateError("zero Newell vector");
  return n / len;
}

FaceGeometry face_geometry(const PolyMesh& mesh, std::size_t face) {
  const auto pts = mesh.face_points(face);
  FaceGeometry g;
  g.centroid = face_centroid(mesh, face);
  const Vec3 n = newell_vector(pts);
  g.area = 0.5 * n.norm();
  if (!(g.area > 0.0)) throw DegenerateError("face " + std::to_string(face) + " is degenerate");
  g.newell_normal = n.normalized();
  return g;
}

std::vector<std::vector<Index>> vertex_neighbors(const PolyMesh& mesh) {
  std::vector<std::vector<Index>> nbrs(mesh.vertices.size());
  for (const Face& f : mesh.faces) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      Index a = f[i], b = f[(i + 1) % f.size()];
      nbrs[a].push_back(b);
      nbrs[b].push_back(a);
    }
  }
  for (auto& n : nbrs) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return nbrs;
}

std::vector<std::vector<Index>> vertex_faces(const PolyMesh& mesh) {
  std::vector<std::vector<Index>> vf(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (Index v : mesh.faces[f]) vf[v].push_back(static_cast<Index>(f));
  }
  return vf;
}

}  // namespace qdm
