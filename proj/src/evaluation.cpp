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

#include "consmatch/evaluation.hpp"

#include <algorithm>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "consmatch/error.hpp"

namespace consmatch {
namespace {

void CheckIndexSpace(const SelectionLabeling& predicted,
                     const GroundTruth& truth) {
  if (predicted.num_images() != truth.num_images()) {
    throw Error(ErrorCode::kIndexMismatch,
                "labeling has " + std::to_string(predicted.num_images()) +
                    " images, ground truth has " +
                    std::to_string(truth.num_images()));
  }
  for (int i = 0; i < predicted.num_images(); ++i) {
    if (static_cast<int>(predicted.selected[i].size()) != predicted.k) {
      throw Error(ErrorCode::kIndexMismatch,
                  "image " + std::to_string(i) + " has the wrong label count");
    }
    const int p = static_cast<int>(truth.labels[i].size());
    for (int row : predicted.selected[i]) {
      if (row < 0 || row >= p) {
        throw Error(ErrorCode::kIndexMismatch,
                    "image " + std::to_string(i) + " candidate " +
                        std::to_string(row) + " outside the ground truth");
      }
    }
  }
}

std::int64_t TruthPairs(const GroundTruth& truth) {
  std::int64_t total = 0;
  const int n = truth.num_images();
  int max_label = -1;
  for (const auto& labels : truth.labels) {
    for (int l : labels) max_label = std::max(max_label, l);
  }
  std::vector<std::vector<char>> present(n, std::vector<char>(max_label + 1, 0));
  for (int i = 0; i < n; ++i) {
    for (int l : truth.labels[i]) {
      if (l >= 0) present[i][l] = 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int l = 0; l <= max_label; ++l) total += present[i][l] && present[j][l];
    }
  }
  return total;
}

}  // namespace

CorrespondenceCounts count_correspondences(const SelectionLabeling& predicted,
                                           const GroundTruth& truth) {
  CheckIndexSpace(predicted, truth);
  CorrespondenceCounts counts;
  counts.truth = TruthPairs(truth);
  const int n = predicted.num_images();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int label = 0; label < predicted.k; ++label) {
        const int a = truth.labels[i][predicted.selected[i][label]];
        const int b = truth.labels[j][predicted.selected[j][label]];
        ++counts.predicted;
        if (a >= 0 && a == b) ++counts.correct;
      }
    }
  }
  return counts;
}

CorrespondenceCounts count_correspondences(const PairwiseScores& scores,
                                           const GroundTruth& truth) {
  CorrespondenceCounts counts;
  counts.truth = TruthPairs(truth);
  for (const auto& [key, block] : scores.blocks) {
    const auto [i, j] = key;
    if (i >= j) continue;
    if (i < 0 || j >= truth.num_images() ||
        block.rows() != static_cast<Eigen::Index>(truth.labels[i].size()) ||
        block.cols() != static_cast<Eigen::Index>(truth.labels[j].size())) {
      throw Error(ErrorCode::kIndexMismatch,
                  "score block does not match the ground truth");
    }
    for (Eigen::Index b = 0; b < block.cols(); ++b) {
      for (Eigen::Index a = 0; a < block.rows(); ++a) {
        if (block(a, b) == 0.0) continue;
        ++counts.predicted;
        const int la = truth.labels[i][a];
        if (la >= 0 && la == truth.labels[j][b]) ++counts.correct;
      }
    }
  }
  return counts;
}

Metric recall(const CorrespondenceCounts& counts) {
  if (counts.truth == 0) return {1.0, true};
  return {static_cast<double>(counts.correct) / counts.truth, false};
}

Metric precision(const CorrespondenceCounts& counts) {
  if (counts.predicted == 0) return {1.0, true};
  return {static_cast<double>(counts.correct) / counts.predicted, false};
}

double recall(const SelectionLabeling& predicted, const GroundTruth& truth) {
  return recall(count_correspondences(predicted, truth)).value;
}

Metric precision(const SelectionLabeling& predicted, const GroundTruth& truth) {
  return precision(count_correspondences(predicted, truth));
}

double pck(const Eigen::Matrix2Xd& predicted, const Eigen::Matrix2Xd& truth,
           double h, double w, double alpha) {
  if (predicted.cols() != truth.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "point counts differ");
  }
  if (!(h > 0.0 && w > 0.0) || !(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "pck needs a positive box and alpha in [0, 1]");
  }
  if (truth.cols() == 0) return 1.0;
  const double radius = alpha * std::max(h, w);
  const Eigen::Index hits =
      ((predicted - truth).colwise().norm().array() <= radius).count();
  return static_cast<double>(hits) / static_cast<double>(truth.cols());
}

std::vector<Triplet> all_triplets(int num_images) {
  std::vector<Triplet> out;
  for (int i = 0; i < num_images; ++i) {
    for (int z = 0; z < num_images; ++z) {
      for (int j = 0; j < num_images; ++j) {
        if (i != z && z != j && i != j) out.push_back({i, z, j});
      }
    }
  }
  return out;
}

std::vector<Triplet> sample_triplets(int num_images, int count,
                                     std::uint64_t seed) {
  std::vector<Triplet> out;
  if (num_images < 3) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, num_images - 1);
  while (static_cast<int>(out.size()) < count) {
    const Triplet t{pick(rng), pick(rng), pick(rng)};
    if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]) out.push_back(t);
  }
  return out;
}

double cycle_check(const SparseMatrix& p, const BlockLayout& layout,
                   const std::vector<Triplet>& triplets) {
  if (p.rows() != layout.total() || p.cols() != layout.total()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "block matrix does not match the layout");
  }
  const Eigen::MatrixXd dense = Eigen::MatrixXd(p);
  auto block = [&](int a, int b) {
    return dense.block(layout.offset(a), layout.offset(b), layout.size(a),
                       layout.size(b));
  };
  double worst = 0.0;
  for (const auto& [i, z, j] : triplets) {
    const Eigen::MatrixXd composed = block(i, z) * block(z, j);
    worst = std::max(worst, (block(i, j) - composed).cwiseAbs().maxCoeff());
  }
  return worst;
}

RankDiagnostic rank_diagnostic(const Eigen::MatrixXd& m, int rank) {
  RankDiagnostic d;
  if (m.size() == 0) {
    d.singular_values.resize(0);
    return d;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  d.singular_values = svd.singularValues();
  const double total = d.singular_values.squaredNorm();
  if (total == 0.0) return d;
  const Eigen::Index kept =
      std::min<Eigen::Index>(std::max(rank, 0), d.singular_values.size());
  d.tail_ratio =
      d.singular_values.tail(d.singular_values.size() - kept).squaredNorm() /
      total;
  return d;
}

double inlier_fraction(const SelectionLabeling& predicted,
                       const GroundTruth& truth) {
  CheckIndexSpace(predicted, truth);
  std::int64_t selected = 0, inliers = 0;
  for (int i = 0; i < predicted.num_images(); ++i) {
    for (int row : predicted.selected[i]) {
      ++selected;
      inliers += truth.labels[i][row] >= 0;
    }
  }
  return selected == 0 ? 1.0 : static_cast<double>(inliers) / selected;
}

}  // namespace consmatch
