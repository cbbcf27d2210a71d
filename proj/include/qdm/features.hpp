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

// Per-anchor embedding table. Text form: `features <count> <dim>` followed by
// one row of `dim` numbers per anchor, vertices first, then centroids, in
// anchor-file order.

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace qdm {

struct FeatureTable {
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> rows;

  std::size_t size() const { return rows.size(); }
};

void write_features(const FeatureTable& t, std::ostream& out);
FeatureTable read_features(std::istream& in);
void save_features(const FeatureTable& t, const std::filesystem::path& path);
FeatureTable load_features(const std::filesystem::path& path);

}  // namespace qdm
