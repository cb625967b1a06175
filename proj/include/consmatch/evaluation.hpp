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

#ifndef CONSMATCH_EVALUATION_HPP_
#define CONSMATCH_EVALUATION_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "consmatch/problem.hpp"
#include "consmatch/synthetic.hpp"

namespace consmatch {

// Pairwise correspondence counts over all image pairs i < j. A predicted
// pair is correct when both candidates carry the same universe label.
struct CorrespondenceCounts {
  std::int64_t predicted = 0;
  std::int64_t truth = 0;
  std::int64_t correct = 0;
};

// Pairs induced by X_i X_j^T. Throws kIndexMismatch when the labeling and
// the ground truth disagree on image count or candidate ranges.
CorrespondenceCounts count_correspondences(const SelectionLabeling& predicted,
                                           const GroundTruth& truth);
// Nonzero entries of the input blocks W_ij, i < j, taken as predictions.
CorrespondenceCounts count_correspondences(const PairwiseScores& scores,
                                           const GroundTruth& truth);

struct Metric {
  double value = 0.0;
  bool vacuous = false;  // zero denominator; value set by convention
};

Metric recall(const CorrespondenceCounts& counts);
Metric precision(const CorrespondenceCounts& counts);
double recall(const SelectionLabeling& predicted, const GroundTruth& truth);
Metric precision(const SelectionLabeling& predicted, const GroundTruth& truth);

// Fraction of points within alpha * max(h, w) of the truth (inclusive).
double pck(const Eigen::Matrix2Xd& predicted, const Eigen::Matrix2Xd& truth,
           double h, double w, double alpha);

using Triplet = std::array<int, 3>;  // (i, z, j)

std::vector<Triplet> all_triplets(int num_images);
std::vector<Triplet> sample_triplets(int num_images, int count,
                                     std::uint64_t seed);

// max over triplets of ||P_ij - P_iz P_zj||_inf (largest absolute entry).
double cycle_check(const SparseMatrix& p, const BlockLayout& layout,
                   const std::vector<Triplet>& triplets);

struct RankDiagnostic {
  Eigen::VectorXd singular_values;
  double tail_ratio = 0.0;  // sum_{i>r} s_i^2 / sum s_i^2, 0 for a zero matrix
};

RankDiagnostic rank_diagnostic(const Eigen::MatrixXd& m, int rank);

// Fraction of selected candidates whose universe label is not -1.
double inlier_fraction(const SelectionLabeling& predicted,
                       const GroundTruth& truth);

}  // namespace consmatch

#endif  // CONSMATCH_EVALUATION_HPP_
