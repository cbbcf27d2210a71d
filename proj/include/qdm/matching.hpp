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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace qdm {

struct GraphEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double w = 0.0;
};

/// Undirected weighted graph on nodes [0, node_count). No self loops, no
/// duplicate unordered pairs, finite non-negative weights.
struct WeightedGraph {
  std::size_t node_count = 0;
  std::vector<GraphEdge> edges;

  /// Throws StructureError / RangeError on invariant violations.
  void validate() const;
};

struct Matching {
  std::vector<std::size_t> selected;  // ascending edge indices
  double total_weight = 0.0;          // summed in ascending index order
};

inline constexpr std::size_t kBruteForceMaxEdges = 24;

/// Exact maximum-weight matching (not necessarily maximum cardinality),
/// primal-dual blossom method, O(n^3). Deterministic for a fixed edge order
/// but not canonical among tied optima.
Matching blossom_matching(const WeightedGraph& g);

/// blossom_matching, except that graphs with at most kBruteForceMaxEdges
/// edges return the lexicographically smallest optimal index set.
Matching max_weight_matching(const WeightedGraph& g);

/// Repeatedly takes the heaviest edge with both endpoints free. Ties go to
/// the lower edge index.
Matching greedy_matching(const WeightedGraph& g);

/// Exhaustive optimum over all matchings; among optima returns the
/// lexicographically smallest index set. Refuses graphs with more than
/// kBruteForceMaxEdges edges (RangeError).
Matching brute_force_matching(const WeightedGraph& g);

/// True when no node is covered twice and indices are valid.
bool is_valid_matching(const WeightedGraph& g, const Matching& m);

/// Sum of selected weights in ascending index order.
double matching_weight(const WeightedGraph& g, const std::vector<std::size_t>& selected);

/// Text edge list, one `u v w selected` line per edge (selected is 0/1).
void write_graph_dump(const WeightedGraph& g, const Matching& m, std::ostream& out);

}  // namespace qdm
