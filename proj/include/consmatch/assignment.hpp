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

#ifndef CONSMATCH_ASSIGNMENT_HPP_
#define CONSMATCH_ASSIGNMENT_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace consmatch {

struct AssignmentResult {
  std::vector<int> column_to_row;
  double total_cost = 0.0;  // summed in column order
};

// Minimum-cost choice of k distinct rows of a p x k cost matrix, one per
// column. Among equal-cost optima the lexicographically smallest
// column_to_row is returned. Throws kInfeasible when p < k and kNonFinite on
// NaN or infinite entries.
AssignmentResult solve_lap(const Eigen::MatrixXd& cost);

// Binary p x k matrix with a one at (column_to_row[c], c).
Eigen::MatrixXd to_partial_permutation(std::span<const int> column_to_row,
                                       int rows);

// Nearest partial permutation to a relaxed labeling block: maximizes
// <X, Y> over matrices satisfying the labeling constraints.
Eigen::MatrixXd discretize(const Eigen::MatrixXd& y);

}  // namespace consmatch

#endif  // CONSMATCH_ASSIGNMENT_HPP_
