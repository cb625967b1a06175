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

#ifndef CONSMATCH_SYNTHETIC_HPP_
#define CONSMATCH_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "consmatch/problem.hpp"

namespace consmatch {

// Universe label of every candidate, -1 for outliers.
struct GroundTruth {
  std::vector<std::vector<int>> labels;

  int num_images() const { return static_cast<int>(labels.size()); }
};

// Orthographic camera: image point = rotation * X + translation.
struct Camera {
  Eigen::Matrix<double, 2, 3> rotation;
  Eigen::Vector2d translation;
};

enum class ScoreSource {
  kPlanted,             // ground-truth matches with a fraction reassigned
  kDescriptorMatching,  // linear matching of synthetic descriptors
};

struct SyntheticOptions {
  int num_images = 10;
  int universe = 10;
  int outliers_per_image = 0;
  double coord_noise_sigma = 0.0;
  double match_corruption_rate = 0.0;
  std::uint64_t seed = 0;

  // Descriptors are generated when descriptor_dim > 0: one random unit
  // vector per universe point, perturbed per observation and renormalized.
  int descriptor_dim = 0;
  double descriptor_noise = 0.0;
  ScoreSource source = ScoreSource::kPlanted;
};

struct PlantedInstance {
  std::vector<FeatureSet> features;
  PairwiseScores scores;  // blocks for i < j
  GroundTruth truth;
  Eigen::Matrix3Xd scene;  // 3 x universe
  std::vector<Camera> cameras;
};

// Rigid scene in the unit cube seen by random orthographic cameras, with
// outliers drawn uniformly in each image's inlier bounding box and candidate
// order shuffled. Throws kInvalidArgument on bad parameters.
PlantedInstance generate(const SyntheticOptions& options);

// X* with k = universe: label l of image i is the candidate carrying
// universe label l. Throws kInvalidValue if some image misses a label.
SelectionLabeling ground_truth_labeling(const GroundTruth& truth, int universe);

// Noiseless 2n x universe measurement matrix of the planted scene.
Eigen::MatrixXd true_measurement_matrix(const PlantedInstance& planted);

struct BruteForceResult {
  SelectionLabeling labeling;
  double objective = 0.0;
  long long evaluated = 0;
};

// Exhaustive minimizer of the discrete objective, with Z set to the rank-r
// truncation of the measurement matrix for each labeling. Throws
// kInstanceTooLarge when the labeling count exceeds 10^6.
BruteForceResult brute_force_solve(const ProblemInstance& instance,
                                   const SolverConfig& config);

}  // namespace consmatch

#endif  // CONSMATCH_SYNTHETIC_HPP_
