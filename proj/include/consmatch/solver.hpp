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

#ifndef CONSMATCH_SOLVER_HPP_
#define CONSMATCH_SOLVER_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "consmatch/problem.hpp"
#include "consmatch/projection.hpp"

namespace consmatch {

// Affine map taking pixel coordinates of one image into the solver frame:
// normalized = scale * (pixel - centroid).
struct CoordinateFrame {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  double scale = 1.0;
};

// Centers each image's candidates and scales them to mean norm sqrt(2).
std::vector<CoordinateFrame> normalizing_frames(
    std::span<const FeatureSet> features);
std::vector<Eigen::Matrix2Xd> apply_frames(
    std::span<const FeatureSet> features,
    std::span<const CoordinateFrame> frames);
// Pixel coordinates of every feature, unchanged.
std::vector<Eigen::Matrix2Xd> raw_coordinates(
    std::span<const FeatureSet> features);

// 1/4 ||W - Y Y^T||_F^2, evaluated without forming the m x m product.
double objective_cycle(const SparseMatrix& w, const Eigen::MatrixXd& y);
double objective_cycle(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y);

// 1/2 sum_i ||C_i X_i - Z_i||_F^2.
double objective_geo(const SelectionLabeling& x, const Eigen::MatrixXd& z,
                     std::span<const Eigen::Matrix2Xd> coords);

struct ObjectiveTerms {
  double cycle = 0.0;
  double geo = 0.0;       // lambda-weighted geometric term
  double coupling = 0.0;  // rho/2 ||X - Y||_F^2
  double total = 0.0;     // cycle + geo + coupling
};

// Decoupled objective with both relaxed (Y) and discrete (X) labelings.
ObjectiveTerms objective_total(const SparseMatrix& w, const Eigen::MatrixXd& y,
                               const SelectionLabeling& x,
                               const Eigen::MatrixXd& z,
                               std::span<const Eigen::Matrix2Xd> coords,
                               const BlockLayout& layout, double lambda,
                               double rho);

// Stacked C_i X_i, 2n x k.
Eigen::MatrixXd measurement_matrix(const SelectionLabeling& x,
                                   std::span<const Eigen::Matrix2Xd> coords);

// Gradient of the smooth part in Y: Y Y^T Y - W Y + rho (Y - X).
Eigen::MatrixXd gradient_Y(const SparseMatrix& w, const Eigen::MatrixXd& y,
                           const Eigen::MatrixXd& x, double rho);

struct StepControl {
  double initial_step = 0.0;  // <= 0: curvature estimate per iteration
  double backtrack_factor = 0.5;
  double armijo_constant = 1e-4;
  double min_step = 1e-12;
  double tolerance = 1e-6;  // relative decrease of the Y sub-objective
  int max_iterations = 500;

  static StepControl FromConfig(const SolverConfig& config);
};

struct YUpdateResult {
  Eigen::MatrixXd y;
  double objective = 0.0;  // cycle + rho/2 ||Y - X||^2 at the returned Y
  int iterations = 0;
  bool stalled = false;  // step shrank below min_step
  std::vector<double> history;  // sub-objective at the start and per step
};

// Projected gradient descent on 1/4 ||W - YY^T||^2 + rho/2 ||Y - X||^2 over
// the relaxed labeling set, with Armijo backtracking. `x` is the dense
// stacked target (ignored when rho is zero).
YUpdateResult update_Y(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                       const SparseMatrix& w, const BlockLayout& layout,
                       double rho, const StepControl& step,
                       const ProjectionOptions& projection);

// Per-image assignment on H_i = lambda D(C_i, Z_i) - 2 rho Y_i.
SelectionLabeling update_X(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                           std::span<const Eigen::Matrix2Xd> coords,
                           const BlockLayout& layout, int k, double lambda,
                           double rho, int threads = 1);

// Best rank-r approximation (Eckart-Young) of the measurement matrix.
Eigen::MatrixXd update_Z(const Eigen::MatrixXd& measurement, int rank);

struct Initialization {
  Eigen::MatrixXd y;
  SelectionLabeling x;
  std::vector<double> objective_trace;  // cycle term per accepted step
};

// Solves the cycle-only relaxation from a seeded near-uniform feasible start
// and discretizes each block.
Initialization initialize(const ProblemInstance& instance,
                          const SolverConfig& config);

struct TraceRecord {
  int stage = 0;      // index into the rho schedule; -1 for initialization
  int iteration = 0;  // sweep number, 0 = state entering the stage
  double rho = 0.0;
  ObjectiveTerms terms;
};

struct SolverState {
  Eigen::MatrixXd y;
  SelectionLabeling x;
  Eigen::MatrixXd z;         // solver frame
  Eigen::MatrixXd z_pixels;  // Z mapped back to pixel coordinates
  double rho = 0.0;
  std::vector<CoordinateFrame> frames;
  std::vector<TraceRecord> trace;
  double objective = 0.0;  // discrete objective of the final (X, Z)
  bool max_sweeps_exceeded = false;
  int y_stalls = 0;
};

// Coordinates as the solver sees them (normalized unless disabled).
std::vector<Eigen::Matrix2Xd> solver_coordinates(const ProblemInstance& instance,
                                                 const SolverConfig& config);

// 1/4 ||W - XX^T||^2 + lambda/2 ||M - Z||^2 with Z the rank-r truncation of
// M = measurement_matrix(x), in the solver coordinate frame.
double objective_labeling(const ProblemInstance& instance,
                          const SelectionLabeling& x,
                          const SolverConfig& config);

// Block coordinate descent over (Y, X, Z) with rho continuation.
SolverState solve(const ProblemInstance& instance, const SolverConfig& config);

}  // namespace consmatch

#endif  // CONSMATCH_SOLVER_HPP_
