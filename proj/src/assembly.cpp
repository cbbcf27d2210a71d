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

#include "qdm/assembly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "qdm/error.hpp"

namespace qdm {

double EuclideanFeatures::distance(std::size_t c, std::size_t v) const {
  return (a_->centroids[c] - a_->vertices[v]).squaredNorm();
}

TableFeatures::TableFeatures(FeatureTable table, std::size_t num_vertices, std::size_t num_centroids)
    : t_(std::move(table)), nv_(num_vertices), nc_(num_centroids) {
  if (t_.rows.size() != nv_ + nc_) {
    throw StructureError("feature table has " + std::to_string(t_.rows.size()) +
                         " rows, anchors need " + std::to_string(nv_ + nc_));
  }
  for (const auto& r : t_.rows) {
    if (static_cast<std::size_t>(r.size()) != t_.dim) throw StructureError("feature row dimension mismatch");
  }
}

double TableFeatures::distance(std::size_t c, std::size_t v) const {
  return (t_.rows[nv_ + c] - t_.rows[v]).squaredNorm();
}

OracleFeatures::OracleFeatures(const AnchorSet& anchors, const PolyMesh& gt) : a_(&anchors) {
  gt.validate();
  if (gt.vertices.empty() || gt.faces.empty()) throw StructureError("oracle mesh is empty");
  auto nearest = [](const Vec3& p, std::size_t n, auto&& pos) {
    std::size_t best = 0;
    double bd = (pos(0) - p).squaredNorm();
    for (std::size_t i = 1; i < n; ++i) {
      const double d = (pos(i) - p).squaredNorm();
      if (d < bd) bd = d, best = i;
    }
    return best;
  };
  vertex_to_gt_.reserve(anchors.vertices.size());
  for (const Vec3& v : anchors.vertices) {
    vertex_to_gt_.push_back(static_cast<Index>(
        nearest(v, gt.vertices.size(), [&](std::size_t i) -> const Vec3& { return gt.vertices[i]; })));
  }
  std::vector<Vec3> fc(gt.faces.size());
  for (std::size_t f = 0; f < gt.faces.size(); ++f) fc[f] = face_centroid(gt, f);
  centroid_face_.reserve(anchors.centroids.size());
  for (const Vec3& c : anchors.centroids) {
    const std::size_t f = nearest(c, fc.size(), [&](std::size_t i) -> const Vec3& { return fc[i]; });
    std::vector<Index> ids(gt.faces[f].begin(), gt.faces[f].end());
    std::sort(ids.begin(), ids.end());
    centroid_face_.push_back(std::move(ids));
  }
}

double OracleFeatures::distance(std::size_t c, std::size_t v) const {
  const auto& face = centroid_face_[c];
  const bool incident = std::binary_search(face.begin(), face.end(), vertex_to_gt_[v]);
  const double e = (a_->centroids[c] - a_->vertices[v]).squaredNorm();
  return incident ? e : kNonIncident + e;
}

void AssemblyConfig::validate() const {
  if (top_k < 4) throw RangeError("top_k must be >= 4");
  // Subsets are cached as bitmasks over shortlist ranks.
  if (pool_max < 3 || pool_max > 64) throw RangeError("pool_max must lie in [3, 64]");
  verify.validate();
}

std::vector<Index> retrieve_topk(const FeatureSpace& fs, std::size_t c, int k) {
  if (k < 1) throw RangeError("K must be >= 1");
  const std::size_t nv = fs.num_vertices();
  if (nv < 3) throw StructureError("fewer than 3 vertices: centroid cannot be resolved");
  if (c >= fs.num_centroids()) throw RangeError("centroid index out of range");
  std::vector<double> d(nv);
  for (std::size_t v = 0; v < nv; ++v) d[v] = fs.distance(c, v);
  std::vector<Index> idx(nv);
  std::iota(idx.begin(), idx.end(), Index{0});
  const std::size_t keep = std::min<std::size_t>(nv, static_cast<std::size_t>(k));
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                    [&](Index a, Index b) { return d[a] != d[b] ? d[a] < d[b] : a < b; });
  idx.resize(keep);
  return idx;
}

PcfsEnumerator::PcfsEnumerator(std::vector<Index> shortlist, std::vector<double> dist, int k,
                               int pool_max)
    : ids_(std::move(shortlist)), dist_(std::move(dist)), k_(k) {
  if (ids_.size() != dist_.size()) throw StructureError("shortlist and distances differ in length");
  if (k_ < 1 || k_ > 64) throw RangeError("k must lie in [1, 64]");
  pool_limit_ = std::min<int>({pool_max, static_cast<int>(ids_.size()), 64});
  pool_ = k_ - 1;  // first fill() grows to k
}

void PcfsEnumerator::fill() {
  while (pending_.empty() && pool_ < pool_limit_) {
    ++pool_;
    std::vector<std::pair<double, std::vector<int>>> fresh;
    std::vector<int> pick(k_);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      std::uint64_t key = 0;
      for (int p : pick) key |= std::uint64_t{1} << p;
      if (!tested_.count(key)) {
        tested_.insert(key);
        double sum = 0.0;
        for (int p : pick) sum += dist_[p];
        fresh.emplace_back(sum / k_, pick);
      }
      // Next combination of k out of pool_ in lexicographic order.
      int i = k_ - 1;
      while (i >= 0 && pick[i] == pool_ - k_ + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k_; ++j) pick[j] = pick[j - 1] + 1;
    }
    auto tuple_less = [&](const std::vector<int>& a, const std::vector<int>& b) {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                          [&](int x, int y) { return ids_[x] < ids_[y]; });
    };
    for (auto& f : fresh) {
      std::sort(f.second.begin(), f.second.end(), [&](int x, int y) { return ids_[x] < ids_[y]; });
    }
    std::stable_sort(fresh.begin(), fresh.end(), [&](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : tuple_less(a.second, b.second);
    });
    // Restore rank order inside each subset and stack best-last.
    for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) {
      std::sort(it->second.begin(), it->second.end());
      pending_.push_back(std::move(it->second));
    }
  }
}

std::optional<std::vector<Index>> PcfsEnumerator::next() {
  fill();
  if (pending_.empty()) return std::nullopt;
  std::vector<Index> out;
  out.reserve(k_);
  for (int p : pending_.back()) out.push_back(ids_[p]);
  pending_.pop_back();
  return out;
}

std::vector<Index> order_cycle(std::span<const Index> ids, std::span<const Vec3> positions) {
  const std::size_t n = ids.size();
  if (n < 3) throw StructureError("a cycle needs at least 3 vertices");
  if (positions.size() != n) throw StructureError("ids and positions differ in length");
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : positions) mean += p;
  mean /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : positions) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d ev = es.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] <= 1e-10 * ev[2]) throw DegenerateError("collinear vertex subset");
  Vec3 normal = es.eigenvectors().col(0);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(normal[i]) > 1e-12) {
      if (normal[i] < 0) normal = -normal;
      break;
    }
  }
  const Vec3 u = es.eigenvectors().col(2).normalized();
  const Vec3 w = normal.cross(u);  // (u, w, normal) is right-handed
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> ang(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = positions[i] - mean;
    ang[i] = std::atan2(d.dot(w), d.dot(u));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ang[a] != ang[b] ? ang[a] < ang[b] : ids[a] < ids[b];
  });
  const auto lowest = std::min_element(order.begin(), order.end(),
                                       [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  std::rotate(order.begin(), lowest, order.end());
  std::vector<Index> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(ids[i]);
  return out;
}

namespace {

std::optional<AssembledFace> try_size(std::size_t c, int k, const std::vector<Index>& shortlist,
                                      const std::vector<double>& dist, const AnchorSet& anchors,
                                      const AssemblyConfig& cfg, AssemblyTrace* trace) {
  if (static_cast<int>(shortlist.size()) < k) return std::nullopt;
  PcfsEnumerator pcfs(shortlist, dist, k, cfg.pool_max);
  std::vector<Vec3> pts(k);
  while (auto subset = pcfs.next()) {
    if (trace) trace->tested.push_back(*subset);
    for (int i = 0; i < k; ++i) pts[i] = anchors.vertices[(*subset)[i]];
    std::vector<Index> cycle;
    try {
      cycle = order_cycle(*subset, pts);
    } catch (const DegenerateError&) {
      continue;
    }
    for (int i = 0; i < k; ++i) pts[i] = anchors.vertices[cycle[i]];
    const VerifyReport r = k == 4 ? verify_quad(pts, anchors.centroids[c], cfg.verify)
                                  : verify_tri(pts, anchors.centroids[c], cfg.verify);
    if (r.passed) return AssembledFace{c, std::move(cycle), k == 4 ? FaceKind::kQuad : FaceKind::kTri};
  }
  return std::nullopt;
}

template <bool kParallel>
AssembledMesh assemble_impl(const AnchorSet& anchors, const FeatureSpace& fs,
                            const AssemblyConfig& cfg) {
  cfg.validate();
  if (anchors.vertices.size() < 3) throw StructureError("need at least 3 vertices");
  if (anchors.centroids.empty()) throw StructureError("need at least 1 centroid");
  if (fs.num_vertices() != anchors.vertices.size() || fs.num_centroids() != anchors.centroids.size()) {
    throw StructureError("feature space does not match the anchor set");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::ptrdiff_t nc = static_cast<std::ptrdiff_t>(anchors.centroids.size());
  std::vector<std::optional<AssembledFace>> out(anchors.centroids.size());
#pragma omp parallel for schedule(dynamic, 8) if (kParallel)
  for (std::ptrdiff_t c = 0; c < nc; ++c) out[c] = assemble_face(c, anchors, fs, cfg);
  AssembledMesh m;
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (out[c]) {
      m.faces.push_back(std::move(*out[c]));
    } else {
      m.unresolved.push_back(c);
    }
  }
  m.recon_rate = static_cast<double>(m.faces.size()) / static_cast<double>(out.size());
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace

std::optional<AssembledFace> assemble_face(std::size_t c, const AnchorSet& anchors,
                                           const FeatureSpace& fs, const AssemblyConfig& cfg,
                                           AssemblyTrace* trace) {
  const std::vector<Index> shortlist = retrieve_topk(fs, c, cfg.top_k);
  std::vector<double> dist(shortlist.size());
  for (std::size_t i = 0; i < shortlist.size(); ++i) dist[i] = fs.distance(c, shortlist[i]);
  if (auto q = try_size(c, 4, shortlist, dist, anchors, cfg, trace)) return q;
  return try_size(c, 3, shortlist, dist, anchors, cfg, trace);
}

PolyMesh AssembledMesh::to_mesh(const AnchorSet& anchors) const {
  PolyMesh m;
  m.vertices = anchors.vertices;
  for (const AssembledFace& f : faces) m.faces.emplace_back(f.cycle.begin(), f.cycle.end());
  return m;
}

AssembledMesh assemble_mesh(const AnchorSet& anchors, const FeatureSpace& fs,
                            const AssemblyConfig& cfg) {
  return assemble_impl<true>(anchors, fs, cfg);
}

AssembledMesh assemble_mesh_serial(const AnchorSet& anchors, const FeatureSpace& fs,
                                   const AssemblyConfig& cfg) {
  return assemble_impl<false>(anchors, fs, cfg);
}

}  // namespace qdm
