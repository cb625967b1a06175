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

#include "consmatch/reconstruction.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "consmatch/error.hpp"

namespace consmatch {

AffineReconstruction affine_factorize(const Eigen::MatrixXd& measurement) {
  if (measurement.cols() < 4) {
    throw Error(ErrorCode::kKTooSmall,
                "affine factorization needs at least 4 points, got " +
                    std::to_string(measurement.cols()));
  }
  if (measurement.rows() < 4 || measurement.rows() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "affine factorization needs two rows per view and n >= 2");
  }
  if (!measurement.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "measurement matrix is not finite");
  }

  AffineReconstruction out;
  out.translations = measurement.rowwise().mean();
  const Eigen::MatrixXd centered =
      measurement.colwise() - out.translations;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  out.singular_values = s.head<3>();
  const Eigen::Vector3d root = out.singular_values.cwiseSqrt();
  out.motion = svd.matrixU().leftCols<3>() * root.asDiagonal();
  out.shape = root.asDiagonal() * svd.matrixV().leftCols<3>().transpose();

  const double top = s[0];
  out.degenerate = top == 0.0 || s[2] <= 1e-12 * top;
  out.reprojection_rms =
      (centered - out.motion * out.shape).norm() /
      std::sqrt(static_cast<double>(centered.rows() * centered.cols()));
  return out;
}

}  // namespace consmatch
