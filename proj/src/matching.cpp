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

#include "qdm/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <utility>

#include "qdm/error.hpp"
#include "qdm/kv_config.hpp"

namespace qdm {

void WeightedGraph::validate() const {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const GraphEdge& e = edges[k];
    if (e.u >= node_count || e.v >= node_count) {
      throw StructureError("edge " + std::to_string(k) + " references a missing node");
    }
    if (e.u == e.v) throw StructureError("edge " + std::to_string(k) + " is a self loop");
    if (!std::isfinite(e.w) || e.w < 0.0) {
      throw RangeError("edge " + std::to_string(k) + " has invalid weight");
    }
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      throw StructureError("duplicate edge " + std::to_string(k));
    }
  }
}

double matching_weight(const WeightedGraph& g, const std::vector<std::size_t>& selected) {
  double total = 0.0;
  for (std::size_t k : selected) total += g.edges[k].w;
  return total;
}

bool is_valid_matching(const WeightedGraph& g, const Matching& m) {
  std::vector<char> used(g.node_count, 0);
  for (std::size_t k : m.selected) {
    if (k >= g.edges.size()) return false;
    const GraphEdge& e = g.edges[k];
    if (used[e.u] || used[e.v]) return false;
    used[e.u] = used[e.v] = 1;
  }
  return true;
}

namespace {

Matching finish(const WeightedGraph& g, std::vector<std::size_t> selected) {
  std::sort(selected.begin(), selected.end());
  Matching m;
  m.total_weight = matching_weight(g, selected);
  m.selected = std::move(selected);
  return m;
}

// Primal-dual weighted matching on general graphs with blossom shrinking
// (Edmonds; the bookkeeping follows Galil's O(n^3) formulation). Vertex
// duals, edge slacks and deltas are all kept at twice their nominal value so
// integral and dyadic weights stay exact.
//
// Edge endpoints are numbered 2k (= edges[k].u) and 2k+1 (= edges[k].v); `p ^ 1`
// is the opposite endpoint. Blossom ids live in [n, 2n).
class BlossomSolver {
 public:
  explicit BlossomSolver(const WeightedGraph& g)
      : g_(g),
        n_(static_cast<int>(g.node_count)),
        m_(static_cast<int>(g.edges.size())),
        endpoint_(2 * m_),
        neighbend_(n_),
        mate_(n_, -1),
        label_(2 * n_, 0),
        labelend_(2 * n_, -1),
        inblossom_(n_),
        blossomparent_(2 * n_, -1),
        blossomchilds_(2 * n_),
        blossombase_(2 * n_, -1),
        blossomendps_(2 * n_),
        bestedge_(2 * n_, -1),
        blossombestedges_(2 * n_),
        has_bestedges_(2 * n_, 0),
        dualvar_(2 * n_, 0.0),
        allowedge_(m_, 0) {
    double maxweight = 0.0;
    for (int k = 0; k < m_; ++k) {
      const GraphEdge& e = g.edges[k];
      endpoint_[2 * k] = static_cast<int>(e.u);
      endpoint_[2 * k + 1] = static_cast<int>(e.v);
      neighbend_[e.u].push_back(2 * k + 1);
      neighbend_[e.v].push_back(2 * k);
      maxweight = std::max(maxweight, e.w);
    }
    std::iota(inblossom_.begin(), inblossom_.end(), 0);
    for (int v = 0; v < n_; ++v) {
      blossombase_[v] = v;
      dualvar_[v] = maxweight;
    }
    for (int b = 2 * n_ - 1; b >= n_; --b) unusedblossoms_.push_back(b);
  }

  std::vector<std::size_t> solve() {
    for (int stage = 0; stage < n_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = n_; b < 2 * n_; ++b) {
        blossombestedges_[b].clear();
        has_bestedges_[b] = 0;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), 0);
      queue_.clear();
      for (int v = 0; v < n_; ++v) {
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
      }

      bool augmented = false;
      for (;;) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          for (int p : neighbend_[v]) {
            const int k = p / 2;
            const int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            double kslack = 0.0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0.0) allowedge_[k] = 1;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              const int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
            }
          }
        }
        if (augmented) break;

        // No augmenting path on tight edges: pick the smallest dual change.
        int deltatype = 1;
        double delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n_);
        int deltaedge = -1;
        int deltablossom = -1;
        for (int v = 0; v < n_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            const double d = slack(bestedge_[v]);
            if (d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < 2 * n_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
            const double d = slack(bestedge_[b]) / 2.0;
            if (d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b = n_; b < 2 * n_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
              dualvar_[b] < delta) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }

        for (int v = 0; v < n_; ++v) {
          const int l = label_[inblossom_[v]];
          if (l == 1) dualvar_[v] -= delta;
          else if (l == 2) dualvar_[v] += delta;
        }
        for (int b = n_; b < 2 * n_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1) dualvar_[b] += delta;
            else if (label_[b] == 2) dualvar_[b] -= delta;
          }
        }

        if (deltatype == 1) {
          break;  // a vertex dual hit zero: optimum reached
        } else if (deltatype == 2) {
          allowedge_[deltaedge] = 1;
          int i = endpoint_[2 * deltaedge], j = endpoint_[2 * deltaedge + 1];
          if (label_[inblossom_[i]] == 0) std::swap(i, j);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = 1;
          queue_.push_back(endpoint_[2 * deltaedge]);
        } else {
          expand_blossom(deltablossom, false);
        }
      }
      if (!augmented) break;

      for (int b = n_; b < 2 * n_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 &&
            dualvar_[b] == 0.0) {
          expand_blossom(b, true);
        }
      }
    }

    std::vector<std::size_t> selected;
    for (int v = 0; v < n_; ++v) {
      if (mate_[v] >= 0 && v < endpoint_[mate_[v]]) {
        selected.push_back(static_cast<std::size_t>(mate_[v] / 2));
      }
    }
    return selected;
  }

 private:
  double slack(int k) const {
    const GraphEdge& e = g_.edges[k];
    return dualvar_[e.u] + dualvar_[e.v] - 2.0 * e.w;
  }

  void leaves(int b, std::vector<int>& out) const {
    if (b < n_) {
      out.push_back(b);
      return;
    }
    for (int c : blossomchilds_[b]) leaves(c, out);
  }

  std::vector<int> leaves(int b) const {
    std::vector<int> out;
    leaves(b, out);
    return out;
  }

  static int wrap(int j, std::size_t len) {
    const int n = static_cast<int>(len);
    return ((j % n) + n) % n;
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      leaves(b, queue_);
    } else if (t == 2) {
      const int base = blossombase_[b];
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  // Walks back from v and w alternately; returns the base of the new blossom
  // or -1 when the two trees differ (augmenting path).
  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = endpoint_[2 * k], w = endpoint_[2 * k + 1];
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    std::vector<int>& path = blossomchilds_[b];
    std::vector<int>& endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0.0;
    for (int leaf : leaves(b)) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }

    std::vector<int> bestedgeto(2 * n_, -1);
    for (int sub : path) {
      std::vector<int> candidates;
      if (!has_bestedges_[sub]) {
        for (int leaf : leaves(sub)) {
          for (int p : neighbend_[leaf]) candidates.push_back(p / 2);
        }
      } else {
        candidates = blossombestedges_[sub];
      }
      for (int kk : candidates) {
        int i = endpoint_[2 * kk], j = endpoint_[2 * kk + 1];
        if (inblossom_[j] == b) std::swap(i, j);
        const int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
          bestedgeto[bj] = kk;
        }
      }
      blossombestedges_[sub].clear();
      has_bestedges_[sub] = 0;
      bestedge_[sub] = -1;
    }
    auto& list = blossombestedges_[b];
    list.clear();
    for (int kk : bestedgeto) {
      if (kk != -1) list.push_back(kk);
    }
    has_bestedges_[b] = 1;
    bestedge_[b] = -1;
    for (int kk : list) {
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
    }
  }

  void expand_blossom(int b, bool endstage) {
    const std::vector<int> childs = blossomchilds_[b];
    for (int s : childs) {
      blossomparent_[s] = -1;
      if (s < n_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0.0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves(s)) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const std::vector<int>& ch = blossomchilds_[b];
      const std::vector<int>& ep = blossomendps_[b];
      const std::size_t len = ch.size();
      const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
      int jstep, endptrick;
      if (j & 1) {
        j -= static_cast<int>(len);
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[ep[wrap(j - endptrick, len)] ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[ep[wrap(j - endptrick, len)] / 2] = 1;
        j += jstep;
        p = ep[wrap(j - endptrick, len)] ^ endptrick;
        allowedge_[p / 2] = 1;
        j += jstep;
      }
      int bv = ch[wrap(j, len)];
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (ch[wrap(j, len)] != entrychild) {
        bv = ch[wrap(j, len)];
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        int reached = -1;
        for (int leaf : leaves(bv)) {
          if (label_[leaf] != 0) {
            reached = leaf;
            break;
          }
        }
        if (reached != -1) {
          label_[reached] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(reached, 2, labelend_[reached]);
        }
        j += jstep;
      }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = 0;
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
  }

  // Swaps matched/unmatched edges on the alternating path from v to the
  // blossom base and rotates the child list so v becomes the base.
  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= n_) augment_blossom(t, v);
    std::vector<int>& ch = blossomchilds_[b];
    std::vector<int>& ep = blossomendps_[b];
    const std::size_t len = ch.size();
    const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int j = i;
    int jstep, endptrick;
    if (i & 1) {
      j -= static_cast<int>(len);
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = ch[wrap(j, len)];
      const int p = ep[wrap(j - endptrick, len)] ^ endptrick;
      if (t >= n_) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = ch[wrap(j, len)];
      if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    blossombase_[b] = blossombase_[ch[0]];
  }

  void augment_matching(int k) {
    const int ends[2][2] = {{endpoint_[2 * k], 2 * k + 1}, {endpoint_[2 * k + 1], 2 * k}};
    for (const auto& sp : ends) {
      int s = sp[0];
      int p = sp[1];
      for (;;) {
        const int bs = inblossom_[s];
        if (bs >= n_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        const int t = endpoint_[labelend_[bs]];
        const int bt = inblossom_[t];
        s = endpoint_[labelend_[bt]];
        const int j = endpoint_[labelend_[bt] ^ 1];
        if (bt >= n_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  const WeightedGraph& g_;
  int n_;
  int m_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<char> has_bestedges_;
  std::vector<int> unusedblossoms_;
  std::vector<double> dualvar_;
  std::vector<char> allowedge_;
  std::vector<int> queue_;
};

}  // namespace

Matching blossom_matching(const WeightedGraph& g) {
  g.validate();
  if (g.edges.empty()) return {};
  BlossomSolver solver(g);
  return finish(g, solver.solve());
}

Matching max_weight_matching(const WeightedGraph& g) {
  Matching m = blossom_matching(g);
  if (g.edges.size() > kBruteForceMaxEdges) return m;
  // Small enough to canonicalize: smallest index set among the optima.
  Matching canon = brute_force_matching(g);
  return canon.total_weight >= m.total_weight ? canon : m;
}

Matching greedy_matching(const WeightedGraph& g) {
  g.validate();
  std::vector<std::size_t> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.edges[a].w > g.edges[b].w;
  });
  std::vector<char> used(g.node_count, 0);
  std::vector<std::size_t> selected;
  for (std::size_t k : order) {
    const GraphEdge& e = g.edges[k];
    if (used[e.u] || used[e.v]) continue;
    used[e.u] = used[e.v] = 1;
    selected.push_back(k);
  }
  return finish(g, std::move(selected));
}

namespace {

struct BruteForceSearch {
  const WeightedGraph& g;
  std::vector<char> used;
  std::vector<std::size_t> current;
  std::vector<std::size_t> best;
  double best_weight = -1.0;

  void visit(std::size_t k) {
    if (k == g.edges.size()) {
      const double w = matching_weight(g, current);
      if (w > best_weight || (w == best_weight && current < best)) {
        best_weight = w;
        best = current;
      }
      return;
    }
    const GraphEdge& e = g.edges[k];
    if (!used[e.u] && !used[e.v]) {
      used[e.u] = used[e.v] = 1;
      current.push_back(k);
      visit(k + 1);
      current.pop_back();
      used[e.u] = used[e.v] = 0;
    }
    visit(k + 1);
  }
};

}  // namespace

Matching brute_force_matching(const WeightedGraph& g) {
  g.validate();
  if (g.edges.size() > kBruteForceMaxEdges) {
    throw RangeError("brute force matching limited to " +
                     std::to_string(kBruteForceMaxEdges) + " edges");
  }
  BruteForceSearch search{g, std::vector<char>(g.node_count, 0), {}, {}, -1.0};
  search.visit(0);
  return finish(g, std::move(search.best));
}

void write_graph_dump(const WeightedGraph& g, const Matching& m, std::ostream& out) {
  std::vector<char> sel(g.edges.size(), 0);
  for (std::size_t k : m.selected) sel[k] = 1;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const GraphEdge& e = g.edges[k];
    out << e.u << ' ' << e.v << ' ' << format_double(e.w) << ' ' << int(sel[k]) << '\n';
  }
}

}  // namespace qdm
