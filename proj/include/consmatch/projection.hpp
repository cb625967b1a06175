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

#ifndef CONSMATCH_PROJECTION_HPP_
#define CONSMATCH_PROJECTION_HPP_

#include <Eigen/Dense>

#include "consmatch/problem.hpp"

namespace consmatch {

// Euclidean projection onto {y >= 0, sum(y) <= 1}.
Eigen::VectorXd project_row_capped(const Eigen::VectorXd& v);

// Euclidean projection onto the probability simplex {y >= 0, sum(y) = 1}.
Eigen::VectorXd project_col_simplex(const Eigen::VectorXd& v);

struct ProjectionOptions {
  double tolerance = 1e-6;  // relative Frobenius change between cycles
  int max_cycles = 2000;
};

struct ProjectionResult {
  Eigen::MatrixXd y;
  int cycles = 0;
  bool converged = false;
  // Largest violation of the row-sum and nonnegativity constraints left by
  // the final column step.
  double residual = 0.0;
};

// Projection of an m x k matrix onto the relaxed labeling set
//   0 <= Y <= 1,  Y_i 1 <= 1,  Y_i^T 1 = 1  for every image block i
// by Dykstra alternation between the row set and the per-block column
// simplices. The result always satisfies the column constraints exactly;
// row sums are met to the reported residual. Non-convergence is reported in
// the result, not thrown.
ProjectionResult project_onto_C(const Eigen::MatrixXd& y,
                                const BlockLayout& layout,
                                const ProjectionOptions& options = {});

// Maximum violation of the relaxed labeling constraints.
double constraint_violation(const Eigen::MatrixXd& y, const BlockLayout& layout);

}  // namespace consmatch

#endif  // CONSMATCH_PROJECTION_HPP_
