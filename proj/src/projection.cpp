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

#include "consmatch/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace consmatch {
namespace {

// Sort-and-threshold simplex projection of a strided vector in place.
// `scratch` must hold at least `size` doubles.
template <typename Vec>
void SimplexInPlace(Vec&& v, std::vector<double>& scratch) {
  const Eigen::Index size = v.size();
  double sum = 0.0;
  bool nonnegative = true;
  for (Eigen::Index i = 0; i < size; ++i) {
    sum += v[i];
    nonnegative = nonnegative && v[i] >= 0.0;
  }
  if (nonnegative && std::abs(sum - 1.0) <= 1e-14) return;

  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Eigen::Index j = 0; j < size; ++j) {
    cumulative += scratch[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (scratch[j] - candidate > 0.0) threshold = candidate;
  }
  for (Eigen::Index i = 0; i < size; ++i) {
    v[i] = std::max(v[i] - threshold, 0.0);
  }
}

template <typename Vec>
void CappedInPlace(Vec&& v, std::vector<double>& scratch) {
  double clipped_sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    clipped_sum += std::max(v[i], 0.0);
  }
  if (clipped_sum <= 1.0) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::max(v[i], 0.0);
    return;
  }
  SimplexInPlace(v, scratch);
}

void ProjectRows(Eigen::MatrixXd& y, std::vector<double>& scratch) {
  for (Eigen::Index r = 0; r < y.rows(); ++r) CappedInPlace(y.row(r), scratch);
}

void ProjectColumns(Eigen::MatrixXd& y, const BlockLayout& layout,
                    std::vector<double>& scratch) {
  for (int i = 0; i < layout.num_blocks(); ++i) {
    auto block = y.middleRows(layout.offset(i), layout.size(i));
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      SimplexInPlace(block.col(c), scratch);
    }
  }
}

double RowResidual(const Eigen::MatrixXd& y) {
  double worst = std::max(0.0, -y.minCoeff());
  if (y.cols() > 0) {
    worst = std::max(worst, y.rowwise().sum().maxCoeff() - 1.0);
  }
  return worst;
}

}  // namespace

Eigen::VectorXd project_row_capped(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v;
  std::vector<double> scratch;
  CappedInPlace(out, scratch);
  return out;
}

Eigen::VectorXd project_col_simplex(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v;
  std::vector<double> scratch;
  SimplexInPlace(out, scratch);
  return out;
}

ProjectionResult project_onto_C(const Eigen::MatrixXd& y,
                                const BlockLayout& layout,
                                const ProjectionOptions& options) {
  ProjectionResult result;
  std::vector<double> scratch;
  Eigen::MatrixXd x = y;
  Eigen::MatrixXd row_correction = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  Eigen::MatrixXd col_correction = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  Eigen::MatrixXd a(y.rows(), y.cols());
  Eigen::MatrixXd previous(y.rows(), y.cols());
  Eigen::MatrixXd correction_change(y.rows(), y.cols());

  for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
    previous = x;
    a = x + row_correction;
    correction_change = row_correction;
    row_correction = a;
    ProjectRows(a, scratch);
    row_correction -= a;
    double drift = (row_correction - correction_change).squaredNorm();

    x = a + col_correction;
    correction_change = col_correction;
    col_correction = x;
    ProjectColumns(x, layout, scratch);
    col_correction -= x;
    drift += (col_correction - correction_change).squaredNorm();

    result.cycles = cycle;
    // The iterate can repeat exactly while the corrections still move, so
    // both must settle.
    const double scale = options.tolerance * std::max(1.0, previous.norm());
    if ((x - previous).norm() <= scale && std::sqrt(drift) <= scale &&
        RowResidual(x) <= options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.residual = RowResidual(x);
  result.y = std::move(x);
  return result;
}

double constraint_violation(const Eigen::MatrixXd& y,
                            const BlockLayout& layout) {
  double worst = RowResidual(y);
  worst = std::max(worst, y.maxCoeff() - 1.0);
  for (int i = 0; i < layout.num_blocks(); ++i) {
    const Eigen::VectorXd sums =
        y.middleRows(layout.offset(i), layout.size(i)).colwise().sum();
    worst = std::max(worst, (sums.array() - 1.0).abs().maxCoeff());
  }
  return worst;
}

}  // namespace consmatch
