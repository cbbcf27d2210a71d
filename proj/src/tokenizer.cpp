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

#include "qdm/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "qdm/error.hpp"

namespace qdm {

namespace {

using Level = std::array<int, 3>;  // z, y, x

struct Point {
  Level key;
  bool centroid;

  auto operator<=>(const Point&) const = default;
};

Level levels(const Vec3& p, int res) {
  return {quantize(p.z(), res), quantize(p.y(), res), quantize(p.x(), res)};
}

Vec3 position(const Level& l, int res) {
  return {dequantize(l[2], res), dequantize(l[1], res), dequantize(l[0], res)};
}

std::vector<Level> sorted_levels(const std::vector<Vec3>& pts, int res) {
  std::vector<Level> out;
  out.reserve(pts.size());
  for (const Vec3& p : pts) out.push_back(levels(p, res));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Vocabulary span of one codebook.
Token codebook_span(const TokenizerConfig& cfg) {
  return static_cast<Token>(cfg.per_axis_vocab ? 3 * cfg.resolution : cfg.resolution);
}

void emit(std::vector<Token>& out, const Level& l, Token base, const TokenizerConfig& cfg) {
  const Token r = static_cast<Token>(cfg.resolution);
  for (int axis = 0; axis < 3; ++axis) {
    // axis 0 = z, 1 = y, 2 = x
    const Token offset = cfg.per_axis_vocab ? static_cast<Token>(2 - axis) * r : 0;
    out.push_back(base + offset + static_cast<Token>(l[axis]));
  }
}

struct DecodedPoint {
  Level key;
  bool centroid;
};

// Decodes three tokens starting at `i`. Dual modes infer the point type from
// the codebook; other modes use `centroid`.
DecodedPoint decode_triple(const std::vector<Token>& t, std::size_t i, bool centroid,
                           const TokenizerConfig& cfg) {
  const Token r = static_cast<Token>(cfg.resolution);
  const Token span = codebook_span(cfg);
  const bool dual = cfg.mode == TokenMode::kDual || cfg.mode == TokenMode::kDualSeparate;
  DecodedPoint p{{}, centroid};
  for (int axis = 0; axis < 3; ++axis) {
    Token tok = t[i + axis];
    if (dual) {
      const bool c = tok >= span;
      if (axis == 0) p.centroid = c;
      else if (c != p.centroid) {
        throw StructureError("token " + std::to_string(i + axis) + " switches codebook inside a point");
      }
      if (c) tok -= span;
    }
    if (cfg.per_axis_vocab) {
      const Token slot = tok / r;
      const Token want = static_cast<Token>(2 - axis);
      if (slot != want) {
        static const char* kAxis[] = {"x", "y", "z"};
        throw AxisAmbiguityError("token " + std::to_string(t[i + axis]) + " at position " +
                                 std::to_string(i + axis) + " is a " + kAxis[slot] +
                                 " token in a " + kAxis[want] + " slot");
      }
      tok -= slot * r;
    }
    p.key[axis] = static_cast<int>(tok);
  }
  return p;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("bad number '" + std::string(tok) + "'", line);
  }
  return v;
}

}  // namespace

void AnchorSet::validate() const {
  for (const auto* list : {&vertices, &centroids}) {
    for (const Vec3& p : *list) {
      if (!p.allFinite() || p.cwiseAbs().maxCoeff() > 1.0) {
        throw RangeError("anchor coordinate outside [-1, 1]");
      }
    }
  }
}

AnchorSet extract_anchors(const PolyMesh& mesh) {
  AnchorSet a;
  a.vertices = mesh.vertices;
  a.centroids.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) a.centroids.push_back(face_centroid(mesh, f));
  return a;
}

void write_anchors(const AnchorSet& a, std::ostream& out) {
  out << "anchors " << a.vertices.size() << ' ' << a.centroids.size() << '\n';
  out << std::setprecision(17);
  for (const Vec3& p : a.vertices) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const Vec3& p : a.centroids) out << "c " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

AnchorSet read_anchors(std::istream& in) {
  AnchorSet a;
  std::string line;
  std::size_t line_no = 0;
  long long nv = -1, nc = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "anchors") {
      if (nv >= 0) throw ParseError("repeated header", line_no);
      if (!(ls >> nv >> nc) || nv < 0 || nc < 0) throw ParseError("bad header", line_no);
      continue;
    }
    if (nv < 0) throw ParseError("missing 'anchors <nv> <nc>' header", line_no);
    if (tag != "v" && tag != "c") throw ParseError("unknown record '" + tag + "'", line_no);
    std::array<std::string, 3> toks;
    std::string extra;
    if (!(ls >> toks[0] >> toks[1] >> toks[2]) || (ls >> extra)) {
      throw ParseError("anchor needs 3 coordinates", line_no);
    }
    const Vec3 p(parse_double(toks[0], line_no), parse_double(toks[1], line_no),
                 parse_double(toks[2], line_no));
    if (tag == "v") {
      if (!a.centroids.empty()) throw ParseError("vertex after centroid block", line_no);
      a.vertices.push_back(p);
    } else {
      a.centroids.push_back(p);
    }
  }
  if (nv < 0) throw ParseError("missing 'anchors <nv> <nc>' header", 0);
  if (static_cast<long long>(a.vertices.size()) != nv ||
      static_cast<long long>(a.centroids.size()) != nc) {
    throw StructureError("anchor counts do not match header");
  }
  return a;
}

void save_anchors(const AnchorSet& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_anchors(a, out);
  if (!out) throw IoError("write failed: " + path.string());
}

AnchorSet load_anchors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_anchors(in);
}

const char* to_string(TokenMode m) {
  switch (m) {
    case TokenMode::kSingle: return "single";
    case TokenMode::kDual: return "dual";
    case TokenMode::kDualSeparate: return "dual_separate";
    case TokenMode::kSingleSeparate: return "single_separate";
  }
  return "?";
}

TokenMode parse_token_mode(std::string_view s) {
  for (TokenMode m : {TokenMode::kSingle, TokenMode::kDual, TokenMode::kDualSeparate,
                      TokenMode::kSingleSeparate}) {
    if (s == to_string(m)) return m;
  }
  throw ParseError("unknown token mode '" + std::string(s) + "'", 0);
}

void TokenizerConfig::validate() const {
  if (resolution < 2) throw RangeError("resolution must be >= 2");
}

int quantize(double coord, int resolution) {
  if (!(coord >= -1.0 && coord <= 1.0)) {
    throw RangeError("coordinate " + std::to_string(coord) + " outside [-1, 1]");
  }
  if (resolution < 2) throw RangeError("resolution must be >= 2");
  const double x = (coord + 1.0) / 2.0 * (resolution - 1);
  return std::min(resolution - 1, static_cast<int>(std::floor(x + 0.5)));
}

double dequantize(int level, int resolution) {
  if (resolution < 2) throw RangeError("resolution must be >= 2");
  if (level < 0 || level >= resolution) throw RangeError("level outside [0, resolution)");
  return 2.0 * level / (resolution - 1) - 1.0;
}

std::size_t vocab_size(const TokenizerConfig& cfg) {
  cfg.validate();
  const std::size_t span = codebook_span(cfg);
  switch (cfg.mode) {
    case TokenMode::kSingle: return span;
    case TokenMode::kDual:
    case TokenMode::kDualSeparate: return 2 * span;
    case TokenMode::kSingleSeparate: return span + 1;
  }
  return span;
}

Token separator_token(const TokenizerConfig& cfg) {
  return static_cast<Token>(vocab_size(cfg) - 1);
}

AnchorSet canonical_anchors(const AnchorSet& a, const TokenizerConfig& cfg) {
  cfg.validate();
  AnchorSet out;
  for (const Level& l : sorted_levels(a.vertices, cfg.resolution)) {
    out.vertices.push_back(position(l, cfg.resolution));
  }
  if (cfg.mode != TokenMode::kSingle) {
    for (const Level& l : sorted_levels(a.centroids, cfg.resolution)) {
      out.centroids.push_back(position(l, cfg.resolution));
    }
  }
  return out;
}

TokenSequence encode(const AnchorSet& a, const TokenizerConfig& cfg) {
  cfg.validate();
  a.validate();
  if (a.vertices.empty()) throw StructureError("cannot encode an anchor set without vertices");
  const int r = cfg.resolution;
  const Token span = codebook_span(cfg);
  const std::vector<Level> v = sorted_levels(a.vertices, r);
  const std::vector<Level> c =
      cfg.mode == TokenMode::kSingle ? std::vector<Level>{} : sorted_levels(a.centroids, r);

  TokenSequence seq;
  seq.config = cfg;
  seq.tokens.reserve(3 * (v.size() + c.size()) + 1);
  switch (cfg.mode) {
    case TokenMode::kSingle:
      for (const Level& l : v) emit(seq.tokens, l, 0, cfg);
      break;
    case TokenMode::kDual: {
      std::vector<Point> all;
      for (const Level& l : v) all.push_back({l, false});
      for (const Level& l : c) all.push_back({l, true});
      std::sort(all.begin(), all.end());  // vertices first on equal keys
      for (const Point& p : all) emit(seq.tokens, p.key, p.centroid ? span : 0, cfg);
      break;
    }
    case TokenMode::kDualSeparate:
      for (const Level& l : v) emit(seq.tokens, l, 0, cfg);
      for (const Level& l : c) emit(seq.tokens, l, span, cfg);
      break;
    case TokenMode::kSingleSeparate:
      for (const Level& l : v) emit(seq.tokens, l, 0, cfg);
      seq.tokens.push_back(separator_token(cfg));
      for (const Level& l : c) emit(seq.tokens, l, 0, cfg);
      break;
  }
  return seq;
}

AnchorSet decode(const std::vector<Token>& t, const TokenizerConfig& cfg) {
  cfg.validate();
  const std::size_t vocab = vocab_size(cfg);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= vocab) {
      throw RangeError("token " + std::to_string(t[i]) + " at position " + std::to_string(i) +
                       " outside vocabulary of " + std::to_string(vocab));
    }
  }
  const int r = cfg.resolution;
  AnchorSet out;
  auto decode_block = [&](std::size_t begin, std::size_t end, bool centroid) {
    if ((end - begin) % 3 != 0) throw StructureError("token block length is not a multiple of 3");
    for (std::size_t i = begin; i < end; i += 3) {
      const DecodedPoint p = decode_triple(t, i, centroid, cfg);
      (p.centroid ? out.centroids : out.vertices).push_back(position(p.key, r));
    }
  };

  if (cfg.mode == TokenMode::kSingleSeparate) {
    const Token sep = separator_token(cfg);
    const auto first = std::find(t.begin(), t.end(), sep);
    if (first == t.end()) throw StructureError("missing separator token");
    if (std::find(first + 1, t.end(), sep) != t.end()) throw StructureError("repeated separator token");
    const std::size_t s = static_cast<std::size_t>(first - t.begin());
    decode_block(0, s, false);
    decode_block(s + 1, t.size(), true);
    return out;
  }
  decode_block(0, t.size(), false);
  if (cfg.mode == TokenMode::kDualSeparate) {
    // Vertex block must precede the centroid block.
    const Token span = codebook_span(cfg);
    bool seen_centroid = false;
    for (std::size_t i = 0; i < t.size(); i += 3) {
      const bool c = t[i] >= span;
      if (seen_centroid && !c) throw StructureError("vertex token after centroid block");
      seen_centroid = seen_centroid || c;
    }
  }
  return out;
}

void write_token_lines(const std::vector<std::vector<Token>>& seqs, std::ostream& out) {
  for (const auto& s : seqs) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

std::vector<std::vector<Token>> read_token_lines(std::istream& in) {
  std::vector<std::vector<Token>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<Token> seq;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      Token v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("bad token '" + tok + "'", line_no);
      }
      seq.push_back(v);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace qdm
