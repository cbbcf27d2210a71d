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

#include "qdm/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "qdm/error.hpp"

namespace qdm {

void write_features(const FeatureTable& t, std::ostream& out) {
  out << "features " << t.rows.size() << ' ' << t.dim << '\n' << std::setprecision(17);
  for (const Eigen::VectorXd& r : t.rows) {
    for (Eigen::Index i = 0; i < r.size(); ++i) out << (i ? " " : "") << r[i];
    out << '\n';
  }
}

FeatureTable read_features(std::istream& in) {
  FeatureTable t;
  std::string line;
  std::size_t line_no = 0;
  long long count = -1, dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (count < 0) {
      if (tok != "features" || !(ls >> count >> dim) || count < 0 || dim <= 0) {
        throw ParseError("expected 'features <count> <dim>' header", line_no);
      }
      t.dim = static_cast<std::size_t>(dim);
      t.rows.reserve(static_cast<std::size_t>(count));
      continue;
    }
    Eigen::VectorXd row(dim);
    Eigen::Index i = 0;
    do {
      if (i >= dim) throw ParseError("row has more than " + std::to_string(dim) + " values", line_no);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError("bad number '" + tok + "'", line_no);
      }
      row[i++] = v;
    } while (ls >> tok);
    if (i != dim) throw ParseError("row has " + std::to_string(i) + " values, expected " +
                                       std::to_string(dim), line_no);
    t.rows.push_back(std::move(row));
  }
  if (count < 0) throw ParseError("missing 'features <count> <dim>' header", 0);
  if (static_cast<long long>(t.rows.size()) != count) {
    throw StructureError("feature row count does not match header");
  }
  return t;
}

void save_features(const FeatureTable& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_features(t, out);
}

FeatureTable load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_features(in);
}

}  // namespace qdm
