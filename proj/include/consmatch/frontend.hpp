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

#ifndef CONSMATCH_FRONTEND_HPP_
#define CONSMATCH_FRONTEND_HPP_

#include <span>

#include <Eigen/Dense>

#include "consmatch/problem.hpp"

namespace consmatch {

// Inner products of unit descriptors, clamped to [0, 1]. Throws
// kDimensionMismatch when the descriptor dimensions differ.
Eigen::MatrixXd similarity(const Eigen::MatrixXd& desc_i,
                           const Eigen::MatrixXd& desc_j);

// Binary partial permutation maximizing total similarity, with
// min(p_i, p_j) matches.
Eigen::MatrixXd pairwise_match(const Eigen::MatrixXd& desc_i,
                               const Eigen::MatrixXd& desc_j);

// Linear matching for every pair i < j. Every feature set must carry
// descriptors.
PairwiseScores match_all_pairs(std::span<const FeatureSet> features,
                               int threads = 1);

}  // namespace consmatch

#endif  // CONSMATCH_FRONTEND_HPP_
