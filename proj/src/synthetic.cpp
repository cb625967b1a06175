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

#include "consmatch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/QR>

#include "consmatch/error.hpp"
#include "consmatch/frontend.hpp"
#include "consmatch/solver.hpp"

namespace consmatch {
namespace {

Eigen::VectorXd RandomUnit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int d = 0; d < dim; ++d) v[d] = gauss(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

Camera RandomCamera(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  Eigen::Matrix3d g;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) g(r, c) = gauss(rng);
  }
  const Eigen::Matrix3d q = Eigen::HouseholderQR<Eigen::Matrix3d>(g).householderQ();
  Camera cam;
  cam.rotation = q.topRows<2>();
  cam.translation = Eigen::Vector2d(shift(rng), shift(rng));
  return cam;
}

// Ground-truth block between images i and j with `corrupt` matches moved to
// a random free column of image j.
Eigen::MatrixXd PlantedBlock(const std::vector<int>& position_i,
                             const std::vector<int>& position_j, int p_i,
                             int p_j, int corrupt, std::mt19937_64& rng) {
  const int universe = static_cast<int>(position_i.size());
  std::vector<int> row_match(p_i, -1);
  std::vector<char> column_taken(p_j, 0);
  for (int l = 0; l < universe; ++l) {
    row_match[position_i[l]] = position_j[l];
    column_taken[position_j[l]] = 1;
  }
  std::vector<int> order(universe);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(corrupt);
  for (int l : order) column_taken[position_j[l]] = 0;
  for (int l : order) {
    const int row = position_i[l];
    std::vector<int> free;
    for (int c = 0; c < p_j; ++c) {
      if (!column_taken[c] && c != position_j[l]) free.push_back(c);
    }
    if (free.empty()) {
      row_match[row] = -1;
      continue;
    }
    std::uniform_int_distribution<size_t> pick(0, free.size() - 1);
    const int column = free[pick(rng)];
    row_match[row] = column;
    column_taken[column] = 1;
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p_i, p_j);
  for (int a = 0; a < p_i; ++a) {
    if (row_match[a] >= 0) w(a, row_match[a]) = 1.0;
  }
  return w;
}

}  // namespace

PlantedInstance generate(const SyntheticOptions& options) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (options.num_images < 2) fail("need at least two images");
  if (options.universe < 1) fail("universe must be nonempty");
  if (options.outliers_per_image < 0) fail("outlier count must be >= 0");
  if (!(options.coord_noise_sigma >= 0.0)) fail("noise sigma must be >= 0");
  if (!(options.match_corruption_rate >= 0.0 &&
        options.match_corruption_rate <= 1.0)) {
    fail("corruption rate must lie in [0, 1]");
  }
  if (options.descriptor_dim < 0 || !(options.descriptor_noise >= 0.0)) {
    fail("descriptor parameters must be >= 0");
  }
  if (options.source == ScoreSource::kDescriptorMatching &&
      options.descriptor_dim == 0) {
    fail("descriptor matching needs descriptor_dim > 0");
  }

  const int n = options.num_images;
  const int u = options.universe;
  const int p = u + options.outliers_per_image;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PlantedInstance planted;
  planted.scene.resize(3, u);
  for (int l = 0; l < u; ++l) {
    for (int d = 0; d < 3; ++d) planted.scene(d, l) = unit(rng);
  }
  std::vector<Eigen::VectorXd> base_descriptors;
  for (int l = 0; l < u && options.descriptor_dim > 0; ++l) {
    base_descriptors.push_back(RandomUnit(options.descriptor_dim, rng));
  }

  // position[i][l]: candidate index of universe point l in image i.
  std::vector<std::vector<int>> position(n, std::vector<int>(u));
  planted.truth.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const Camera cam = RandomCamera(rng);
    planted.cameras.push_back(cam);
    Eigen::Matrix2Xd inliers =
        (cam.rotation * planted.scene).colwise() + cam.translation;
    const Eigen::Vector2d lo = inliers.rowwise().minCoeff();
    const Eigen::Vector2d hi = inliers.rowwise().maxCoeff();
    for (int l = 0; l < u; ++l) {
      for (int d = 0; d < 2; ++d) {
        inliers(d, l) += options.coord_noise_sigma * gauss(rng);
      }
    }

    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    FeatureSet f;
    f.image_id = "image_" + std::to_string(i);
    f.coordinates.resize(2, p);
    std::vector<int>& labels = planted.truth.labels[i];
    labels.assign(p, -1);
    for (int l = 0; l < u; ++l) {
      f.coordinates.col(order[l]) = inliers.col(l);
      labels[order[l]] = l;
      position[i][l] = order[l];
    }
    for (int o = u; o < p; ++o) {
      for (int d = 0; d < 2; ++d) {
        f.coordinates(d, order[o]) = lo[d] + (hi[d] - lo[d]) * unit(rng);
      }
    }
    if (options.descriptor_dim > 0) {
      Eigen::MatrixXd desc(options.descriptor_dim, p);
      for (int c = 0; c < p; ++c) {
        if (labels[c] < 0) {
          desc.col(c) = RandomUnit(options.descriptor_dim, rng);
          continue;
        }
        Eigen::VectorXd v = base_descriptors[labels[c]];
        for (int d = 0; d < options.descriptor_dim; ++d) {
          v[d] += options.descriptor_noise * gauss(rng);
        }
        if (v.norm() == 0.0) v = base_descriptors[labels[c]];
        desc.col(c) = v.normalized();
      }
      f.descriptors = std::move(desc);
    }
    planted.features.push_back(std::move(f));
  }

  if (options.source == ScoreSource::kDescriptorMatching) {
    planted.scores = match_all_pairs(planted.features);
  } else {
    const int corrupt = static_cast<int>(
        std::lround(options.match_corruption_rate * static_cast<double>(u)));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        planted.scores.blocks[{i, j}] =
            PlantedBlock(position[i], position[j], p, p, corrupt, rng);
      }
    }
  }
  return planted;
}

SelectionLabeling ground_truth_labeling(const GroundTruth& truth, int universe) {
  SelectionLabeling x;
  x.k = universe;
  x.selected.assign(truth.num_images(), std::vector<int>(universe, -1));
  for (int i = 0; i < truth.num_images(); ++i) {
    for (size_t c = 0; c < truth.labels[i].size(); ++c) {
      const int label = truth.labels[i][c];
      if (label >= 0 && label < universe) {
        x.selected[i][label] = static_cast<int>(c);
      }
    }
    for (int label = 0; label < universe; ++label) {
      if (x.selected[i][label] < 0) {
        throw Error(ErrorCode::kInvalidValue,
                    "image " + std::to_string(i) + " does not observe label " +
                        std::to_string(label));
      }
    }
  }
  return x;
}

Eigen::MatrixXd true_measurement_matrix(const PlantedInstance& planted) {
  const int n = static_cast<int>(planted.cameras.size());
  Eigen::MatrixXd m(2 * n, planted.scene.cols());
  for (int i = 0; i < n; ++i) {
    const Camera& cam = planted.cameras[i];
    m.middleRows(2 * i, 2) =
        (cam.rotation * planted.scene).colwise() + cam.translation;
  }
  return m;
}

BruteForceResult brute_force_solve(const ProblemInstance& instance,
                                   const SolverConfig& config) {
  config.validate();
  const BlockLayout& layout = instance.layout();
  const int n = layout.num_blocks();
  const int k = config.k;
  if (k > layout.min_size()) {
    throw Error(ErrorCode::kInfeasibleK, "k exceeds the smallest image");
  }

  // All injective label -> candidate maps per image, lexicographic.
  std::vector<std::vector<std::vector<int>>> choices(n);
  double total = 1.0;
  for (int i = 0; i < n; ++i) {
    double count = 1.0;
    for (int t = 0; t < k; ++t) count *= layout.size(i) - t;
    total *= count;
    if (total > 1e6) {
      throw Error(ErrorCode::kInstanceTooLarge,
                  "more than 10^6 labelings to enumerate");
    }
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> current;
    std::vector<char> used(layout.size(i), 0);
    auto recurse = [&](auto&& self) -> void {
      if (static_cast<int>(current.size()) == k) {
        choices[i].push_back(current);
        return;
      }
      for (int c = 0; c < layout.size(i); ++c) {
        if (used[c]) continue;
        used[c] = 1;
        current.push_back(c);
        self(self);
        current.pop_back();
        used[c] = 0;
      }
    };
    recurse(recurse);
  }

  const auto coords = solver_coordinates(instance, config);
  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  SelectionLabeling x;
  x.k = k;
  x.selected.resize(n);
  std::vector<size_t> odometer(n, 0);
  while (true) {
    for (int i = 0; i < n; ++i) x.selected[i] = choices[i][odometer[i]];
    double value = objective_cycle(instance.scores(), x.dense(layout));
    if (config.lambda != 0.0) {
      const Eigen::MatrixXd m = measurement_matrix(x, coords);
      value += config.lambda * objective_geo(x, update_Z(m, config.rank), coords);
    }
    ++best.evaluated;
    if (value < best.objective) {
      best.objective = value;
      best.labeling = x;
    }
    int i = n - 1;
    while (i >= 0 && ++odometer[i] == choices[i].size()) {
      odometer[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return best;
}

}  // namespace consmatch
