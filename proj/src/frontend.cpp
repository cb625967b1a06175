// Copyright 2026 The consmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "consmatch/frontend.hpp"

#include <string>
#include <utility>
#include <vector>

#include "consmatch/assignment.hpp"
#include "consmatch/error.hpp"
#include "parallel.hpp"

namespace consmatch {

Eigen::MatrixXd similarity(const Eigen::MatrixXd& desc_i,
                           const Eigen::MatrixXd& desc_j) {
  if (desc_i.rows() != desc_j.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "descriptor dimensions differ: " +
                    std::to_string(desc_i.rows()) + " vs " +
                    std::to_string(desc_j.rows()));
  }
  return (desc_i.transpose() * desc_j).cwiseMax(0.0).cwiseMin(1.0);
}

Eigen::MatrixXd pairwise_match(const Eigen::MatrixXd& desc_i,
                               const Eigen::MatrixXd& desc_j) {
  const Eigen::MatrixXd s = similarity(desc_i, desc_j);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(s.rows(), s.cols());
  if (s.rows() >= s.cols()) {
    const auto r = solve_lap(-s);
    for (Eigen::Index b = 0; b < s.cols(); ++b) w(r.column_to_row[b], b) = 1.0;
  } else {
    const Eigen::MatrixXd flipped = -s.transpose();
    const auto r = solve_lap(flipped);
    for (Eigen::Index a = 0; a < s.rows(); ++a) w(a, r.column_to_row[a]) = 1.0;
  }
  return w;
}

PairwiseScores match_all_pairs(std::span<const FeatureSet> features,
                               int threads) {
  const int n = static_cast<int>(features.size());
  for (int i = 0; i < n; ++i) {
    if (!features[i].descriptors) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image " + std::to_string(i) + " has no descriptors");
    }
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<Eigen::MatrixXd> blocks(pairs.size());
  internal::ParallelFor(static_cast<int>(pairs.size()), threads, [&](int t) {
    const auto [i, j] = pairs[t];
    blocks[t] = pairwise_match(*features[i].descriptors, *features[j].descriptors);
  });
  PairwiseScores scores;
  for (size_t t = 0; t < pairs.size(); ++t) {
    scores.blocks[pairs[t]] = std::move(blocks[t]);
  }
  return scores;
}

}  // namespace consmatch
