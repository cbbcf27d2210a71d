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

// Anchor sets (mesh vertices plus face centroids) and their discrete token
// sequences.
//
// Each point becomes three tokens in z, y, x order. With per-axis
// vocabularies z tokens live in [2r, 3r), y in [r, 2r) and x in [0, r) for
// resolution r; with a flat vocabulary all three share [0, r). Dual modes
// give centroids a second codebook placed after the vertex codebook. The
// single-separate mode uses one codebook and a separator as the last token
// id.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "qdm/mesh.hpp"

namespace qdm {

using Token = std::uint32_t;

struct AnchorSet {
  std::vector<Vec3> vertices;
  std::vector<Vec3> centroids;

  /// Throws RangeError if any coordinate is outside [-1, 1] or not finite.
  void validate() const;

  bool operator==(const AnchorSet&) const = default;
};

/// Vertices and face centroids of `mesh`, in index order.
AnchorSet extract_anchors(const PolyMesh& mesh);

/// `anchors <nv> <nc>`, then `v x y z` and `c x y z` lines, 17 significant
/// digits.
void write_anchors(const AnchorSet& a, std::ostream& out);
AnchorSet read_anchors(std::istream& in);
void save_anchors(const AnchorSet& a, const std::filesystem::path& path);
AnchorSet load_anchors(const std::filesystem::path& path);

enum class TokenMode { kSingle, kDual, kDualSeparate, kSingleSeparate };

const char* to_string(TokenMode m);
TokenMode parse_token_mode(std::string_view s);

struct TokenizerConfig {
  TokenMode mode = TokenMode::kSingleSeparate;
  bool per_axis_vocab = true;
  int resolution = 1024;

  void validate() const;
};

struct TokenSequence {
  std::vector<Token> tokens;
  TokenizerConfig config;
};

/// Round half up of (c + 1) / 2 * (r - 1). RangeError outside [-1, 1].
int quantize(double coord, int resolution);

/// 2 q / (r - 1) - 1. RangeError outside [0, r).
double dequantize(int level, int resolution);

std::size_t vocab_size(const TokenizerConfig& cfg);

/// Index of the separator token; only meaningful for kSingleSeparate.
Token separator_token(const TokenizerConfig& cfg);

/// The anchor set a lossless encoder would reproduce: coordinates snapped to
/// level centres, duplicates removed, each block sorted by (z, y, x) level.
/// Single mode drops centroids.
AnchorSet canonical_anchors(const AnchorSet& a, const TokenizerConfig& cfg);

/// StructureError when `a` has no vertices.
TokenSequence encode(const AnchorSet& a, const TokenizerConfig& cfg);

/// AxisAmbiguityError when a per-axis token sits in the wrong axis slot;
/// StructureError for a misplaced, missing or repeated separator or a
/// ragged triple; RangeError for tokens outside the vocabulary.
AnchorSet decode(const std::vector<Token>& tokens, const TokenizerConfig& cfg);
inline AnchorSet decode(const TokenSequence& seq) { return decode(seq.tokens, seq.config); }

/// One sequence per line, whitespace-separated integers.
void write_token_lines(const std::vector<std::vector<Token>>& seqs, std::ostream& out);
std::vector<std::vector<Token>> read_token_lines(std::istream& in);

}  // namespace qdm
