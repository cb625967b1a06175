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

#ifndef CONSMATCH_RECONSTRUCTION_HPP_
#define CONSMATCH_RECONSTRUCTION_HPP_

#include <Eigen/Dense>

namespace consmatch {

struct AffineReconstruction {
  Eigen::MatrixXd motion;         // 2n x 3
  Eigen::Matrix3Xd shape;         // 3 x k
  Eigen::VectorXd translations;   // 2n, per-row means
  Eigen::Vector3d singular_values = Eigen::Vector3d::Zero();
  double reprojection_rms = 0.0;  // ||centered - motion * shape||_F / sqrt(2nk)
  bool degenerate = false;        // centered matrix has rank < 3
};

// Affine factorization of a 2n x k measurement matrix: remove row means,
// keep the best rank-3 factorization and split the singular values evenly
// between motion and shape. Throws kKTooSmall when k < 4 and
// kInvalidArgument when fewer than two views are given.
AffineReconstruction affine_factorize(const Eigen::MatrixXd& measurement);

}  // namespace consmatch

#endif  // CONSMATCH_RECONSTRUCTION_HPP_
