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

#ifndef CONSMATCH_PROBLEM_HPP_
#define CONSMATCH_PROBLEM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace consmatch {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Candidate features detected in one image.
struct FeatureSet {
  std::string image_id;
  Eigen::Matrix2Xd coordinates;                 // 2 x p, pixel positions
  std::optional<Eigen::MatrixXd> descriptors;   // d x p, unit columns

  int size() const { return static_cast<int>(coordinates.cols()); }
};

// Pairwise correspondence scores W_ij keyed by ordered image pair. A block
// supplied only as (i, j) is mirrored to (j, i) during validation.
struct PairwiseScores {
  std::map<std::pair<int, int>, Eigen::MatrixXd> blocks;
};

// Row offsets of the per-image blocks inside the stacked m-row matrices.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::span<const int> sizes);

  int num_blocks() const { return static_cast<int>(sizes_.size()); }
  int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int size(int i) const { return sizes_[i]; }
  int offset(int i) const { return offsets_[i]; }
  int min_size() const;
  const std::vector<int>& sizes() const { return sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // num_blocks + 1 entries
};

// One partial permutation X_i per image, stored as label -> candidate index.
// X_i has a single one in every column, at row selected[i][label].
struct SelectionLabeling {
  int k = 0;
  std::vector<std::vector<int>> selected;

  int num_images() const { return static_cast<int>(selected.size()); }

  // Binary p_i x k matrix of image i.
  Eigen::MatrixXd block(int image, int rows) const;
  // Stacked m x k binary matrix.
  Eigen::MatrixXd dense(const BlockLayout& layout) const;
  // Sparse m x m product X X^T.
  SparseMatrix correspondence_matrix(const BlockLayout& layout) const;

  // Throws kInvalidValue if any X_i violates the partial-permutation
  // constraints for the given layout.
  void check(const BlockLayout& layout) const;
};

struct SolverConfig {
  int k = 0;
  int rank = 4;
  double lambda = 1.0;
  std::vector<double> rho_schedule{1.0, 10.0, 100.0};

  // Projected gradient step control. initial_step <= 0 selects the
  // curvature estimate 1 / (||Y||_2^2 + ||W||_inf + rho).
  double initial_step = 0.0;
  double backtrack_factor = 0.5;
  double armijo_constant = 1e-4;
  double min_step = 1e-12;

  double inner_tolerance = 1e-6;
  int max_inner_iterations = 500;
  double outer_tolerance = 1e-7;
  int max_outer_sweeps = 100;

  double projection_tolerance = 1e-6;
  int max_projection_cycles = 2000;

  double init_perturbation = 1.0;  // relative spread of the random start
  bool normalize_coordinates = true;
  std::uint64_t seed = 0;
  int threads = 1;

  // Throws kInvalidArgument on a malformed configuration.
  void validate() const;
};

// A validated problem: immutable after construction.
class ProblemInstance {
 public:
  const std::vector<FeatureSet>& features() const { return features_; }
  const BlockLayout& layout() const { return layout_; }
  // Symmetric m x m score matrix with identity diagonal blocks.
  const SparseMatrix& scores() const { return scores_; }
  // Symmetrized blocks W_ij for i != j, both orientations present.
  const PairwiseScores& blocks() const { return blocks_; }

  int num_images() const { return layout_.num_blocks(); }
  int total_features() const { return layout_.total(); }
  Eigen::MatrixXd block(int i, int j) const;

 private:
  friend ProblemInstance validate_instance(std::vector<FeatureSet>,
                                           PairwiseScores,
                                           const SolverConfig&);
  std::vector<FeatureSet> features_;
  BlockLayout layout_;
  PairwiseScores blocks_;
  SparseMatrix scores_;
};

// Checks shapes and values, symmetrizes W and forces identity diagonal
// blocks. Also requires config.k <= min_i p_i.
ProblemInstance validate_instance(std::vector<FeatureSet> features,
                                  PairwiseScores scores,
                                  const SolverConfig& config);

// Places every W_ij at (offset_i, offset_j) of an m x m matrix. Blocks given
// in one orientation are mirrored; diagonal blocks are always the identity.
SparseMatrix assemble_block(const PairwiseScores& scores,
                            const BlockLayout& layout);

// The rows of image i inside an m x k matrix.
inline auto image_rows(Eigen::MatrixXd& m, const BlockLayout& layout, int i) {
  return m.middleRows(layout.offset(i), layout.size(i));
}
inline auto image_rows(const Eigen::MatrixXd& m, const BlockLayout& layout,
                       int i) {
  return m.middleRows(layout.offset(i), layout.size(i));
}

}  // namespace consmatch

#endif  // CONSMATCH_PROBLEM_HPP_
