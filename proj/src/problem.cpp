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

#include "consmatch/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "consmatch/error.hpp"

namespace consmatch {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kInfeasibleK: return "infeasible-k";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kInvalidValue: return "invalid-value";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kInstanceTooLarge: return "instance-too-large";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kKTooSmall: return "k-too-small";
    case ErrorCode::kIndexMismatch: return "index-mismatch";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

BlockLayout::BlockLayout(std::span<const int> sizes)
    : sizes_(sizes.begin(), sizes.end()), offsets_(sizes.size() + 1, 0) {
  for (size_t i = 0; i < sizes_.size(); ++i) {
    offsets_[i + 1] = offsets_[i] + sizes_[i];
  }
}

int BlockLayout::min_size() const {
  if (sizes_.empty()) return 0;
  return *std::min_element(sizes_.begin(), sizes_.end());
}

Eigen::MatrixXd SelectionLabeling::block(int image, int rows) const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, k);
  for (int label = 0; label < k; ++label) {
    x(selected[image][label], label) = 1.0;
  }
  return x;
}

Eigen::MatrixXd SelectionLabeling::dense(const BlockLayout& layout) const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(layout.total(), k);
  for (int i = 0; i < num_images(); ++i) {
    for (int label = 0; label < k; ++label) {
      x(layout.offset(i) + selected[i][label], label) = 1.0;
    }
  }
  return x;
}

SparseMatrix SelectionLabeling::correspondence_matrix(
    const BlockLayout& layout) const {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(num_images()) * num_images() * k);
  for (int label = 0; label < k; ++label) {
    for (int i = 0; i < num_images(); ++i) {
      for (int j = 0; j < num_images(); ++j) {
        entries.emplace_back(layout.offset(i) + selected[i][label],
                             layout.offset(j) + selected[j][label], 1.0);
      }
    }
  }
  SparseMatrix p(layout.total(), layout.total());
  p.setFromTriplets(entries.begin(), entries.end());
  return p;
}

void SelectionLabeling::check(const BlockLayout& layout) const {
  if (num_images() != layout.num_blocks()) {
    throw Error(ErrorCode::kIndexMismatch,
                "labeling covers " + std::to_string(num_images()) +
                    " images, problem has " +
                    std::to_string(layout.num_blocks()));
  }
  for (int i = 0; i < num_images(); ++i) {
    const auto& rows = selected[i];
    if (static_cast<int>(rows.size()) != k) {
      throw Error(ErrorCode::kInvalidValue,
                  "image " + std::to_string(i) + " has " +
                      std::to_string(rows.size()) + " labels, expected " +
                      std::to_string(k));
    }
    std::vector<char> used(layout.size(i), 0);
    for (int row : rows) {
      if (row < 0 || row >= layout.size(i)) {
        throw Error(ErrorCode::kIndexMismatch,
                    "image " + std::to_string(i) + " selects candidate " +
                        std::to_string(row) + " out of " +
                        std::to_string(layout.size(i)));
      }
      if (used[row]) {
        throw Error(ErrorCode::kInvalidValue,
                    "image " + std::to_string(i) + " selects candidate " +
                        std::to_string(row) + " twice");
      }
      used[row] = 1;
    }
  }
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (k <= 0) fail("k must be positive");
  if (rank <= 0) fail("rank bound must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (rho_schedule.empty()) fail("rho schedule is empty");
  for (size_t s = 0; s < rho_schedule.size(); ++s) {
    if (!(rho_schedule[s] > 0.0) || !std::isfinite(rho_schedule[s])) {
      fail("rho values must be positive and finite");
    }
    if (s > 0 && !(rho_schedule[s] > rho_schedule[s - 1])) {
      fail("rho schedule must be strictly increasing");
    }
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    fail("backtracking factor must lie in (0, 1)");
  }
  if (!(armijo_constant > 0.0 && armijo_constant < 1.0)) {
    fail("Armijo constant must lie in (0, 1)");
  }
  if (!(inner_tolerance > 0.0) || !(outer_tolerance > 0.0) ||
      !(projection_tolerance > 0.0) || !(min_step > 0.0)) {
    fail("tolerances must be positive");
  }
  if (max_inner_iterations <= 0 || max_outer_sweeps <= 0 ||
      max_projection_cycles <= 0) {
    fail("iteration limits must be positive");
  }
  if (!(init_perturbation >= 0.0)) fail("perturbation must be >= 0");
  if (threads <= 0) fail("thread count must be positive");
}

Eigen::MatrixXd ProblemInstance::block(int i, int j) const {
  if (i == j) return Eigen::MatrixXd::Identity(layout_.size(i), layout_.size(i));
  auto it = blocks_.blocks.find({i, j});
  if (it == blocks_.blocks.end()) {
    return Eigen::MatrixXd::Zero(layout_.size(i), layout_.size(j));
  }
  return it->second;
}

namespace {

std::string ShapeString(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

void CheckFeatureSet(const FeatureSet& f, int index) {
  const std::string where = "image " + std::to_string(index);
  if (f.size() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, where + " has no candidates");
  }
  if (!f.coordinates.allFinite()) {
    throw Error(ErrorCode::kNonFinite, where + " has non-finite coordinates");
  }
  if (f.descriptors) {
    const Eigen::MatrixXd& d = *f.descriptors;
    if (d.cols() != f.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  where + " descriptors are " + ShapeString(d.rows(), d.cols()) +
                      " for " + std::to_string(f.size()) + " candidates");
    }
    if (!d.allFinite()) {
      throw Error(ErrorCode::kNonFinite, where + " has non-finite descriptors");
    }
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      if (std::abs(d.col(c).norm() - 1.0) > 1e-6) {
        throw Error(ErrorCode::kInvalidValue,
                    where + " descriptor " + std::to_string(c) +
                        " is not unit-normalized");
      }
    }
  }
}

}  // namespace

ProblemInstance validate_instance(std::vector<FeatureSet> features,
                                  PairwiseScores scores,
                                  const SolverConfig& config) {
  config.validate();
  const int n = static_cast<int>(features.size());
  if (n < 1) throw Error(ErrorCode::kDimensionMismatch, "no images");
  std::vector<int> sizes(n);
  for (int i = 0; i < n; ++i) {
    CheckFeatureSet(features[i], i);
    sizes[i] = features[i].size();
  }
  BlockLayout layout(sizes);
  if (config.k > layout.min_size()) {
    throw Error(ErrorCode::kInfeasibleK,
                "k = " + std::to_string(config.k) +
                    " exceeds the smallest candidate count " +
                    std::to_string(layout.min_size()));
  }

  for (const auto& [key, block] : scores.blocks) {
    const auto [i, j] = key;
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "block (" + std::to_string(i) + "," + std::to_string(j) +
                      ") references a missing image");
    }
    if (block.rows() != sizes[i] || block.cols() != sizes[j]) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "block (" + std::to_string(i) + "," + std::to_string(j) +
                      ") is " + ShapeString(block.rows(), block.cols()) +
                      ", expected " + ShapeString(sizes[i], sizes[j]));
    }
    if (!block.allFinite()) {
      throw Error(ErrorCode::kNonFinite,
                  "block (" + std::to_string(i) + "," + std::to_string(j) +
                      ") has non-finite entries");
    }
    if (i != j && (block.minCoeff() < 0.0 || block.maxCoeff() > 1.0)) {
      throw Error(ErrorCode::kInvalidValue,
                  "block (" + std::to_string(i) + "," + std::to_string(j) +
                      ") has entries outside [0, 1]");
    }
  }

  PairwiseScores symmetric;
  for (const auto& [key, block] : scores.blocks) {
    const auto [i, j] = key;
    if (i == j) continue;
    auto mirror = scores.blocks.find({j, i});
    Eigen::MatrixXd value = block;
    if (mirror != scores.blocks.end()) {
      value = 0.5 * (block + mirror->second.transpose());
    }
    symmetric.blocks[{i, j}] = value;
    symmetric.blocks[{j, i}] = value.transpose();
  }

  ProblemInstance instance;
  instance.features_ = std::move(features);
  instance.layout_ = std::move(layout);
  instance.scores_ = assemble_block(symmetric, instance.layout_);
  instance.blocks_ = std::move(symmetric);
  return instance;
}

SparseMatrix assemble_block(const PairwiseScores& scores,
                            const BlockLayout& layout) {
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < layout.num_blocks(); ++i) {
    for (int a = 0; a < layout.size(i); ++a) {
      entries.emplace_back(layout.offset(i) + a, layout.offset(i) + a, 1.0);
    }
  }
  for (const auto& [key, block] : scores.blocks) {
    const auto [i, j] = key;
    if (i == j) continue;
    const bool mirrored = !scores.blocks.contains({j, i});
    for (Eigen::Index b = 0; b < block.cols(); ++b) {
      for (Eigen::Index a = 0; a < block.rows(); ++a) {
        if (block(a, b) == 0.0) continue;
        entries.emplace_back(layout.offset(i) + a, layout.offset(j) + b,
                             block(a, b));
        if (mirrored) {
          entries.emplace_back(layout.offset(j) + b, layout.offset(i) + a,
                               block(a, b));
        }
      }
    }
  }
  SparseMatrix w(layout.total(), layout.total());
  w.setFromTriplets(entries.begin(), entries.end());
  return w;
}

}  // namespace consmatch
