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

#include "consmatch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "consmatch/assignment.hpp"
#include "consmatch/error.hpp"
#include "parallel.hpp"

namespace consmatch {
namespace {

// Cycle term plus the products needed to form the gradient at the same Y.
struct CycleEvaluation {
  double value = 0.0;
  Eigen::MatrixXd wy;    // W Y
  Eigen::MatrixXd gram;  // Y^T Y
};

CycleEvaluation EvaluateCycle(const SparseMatrix& w, double w_squared_norm,
                              const Eigen::MatrixXd& y) {
  CycleEvaluation e;
  e.wy = w * y;
  e.gram = y.transpose() * y;
  // ||W - YY^T||^2 = ||W||^2 - 2 <WY, Y> + ||Y^T Y||^2 for symmetric W.
  const double cross = (e.wy.array() * y.array()).sum();
  e.value = 0.25 * (w_squared_norm - 2.0 * cross + e.gram.squaredNorm());
  e.value = std::max(e.value, 0.0);
  return e;
}

double MaxAbsRowSum(const SparseMatrix& w) {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(w.rows());
  for (int outer = 0; outer < w.outerSize(); ++outer) {
    for (SparseMatrix::InnerIterator it(w, outer); it; ++it) {
      sums[it.row()] += std::abs(it.value());
    }
  }
  return sums.size() > 0 ? sums.maxCoeff() : 0.0;
}

double CurvatureStep(const Eigen::MatrixXd& gram, double w_inf, double rho) {
  double spectral = 0.0;
  if (gram.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                       Eigen::EigenvaluesOnly);
    spectral = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  }
  return 1.0 / (spectral + w_inf + rho);
}

Eigen::MatrixXd PixelZ(const Eigen::MatrixXd& z,
                       std::span<const CoordinateFrame> frames) {
  Eigen::MatrixXd out = z;
  for (size_t i = 0; i < frames.size(); ++i) {
    const Eigen::Index row = 2 * static_cast<Eigen::Index>(i);
    for (int d = 0; d < 2; ++d) {
      out.row(row + d) =
          (z.row(row + d).array() / frames[i].scale + frames[i].centroid[d])
              .matrix();
    }
  }
  return out;
}

}  // namespace

std::vector<CoordinateFrame> normalizing_frames(
    std::span<const FeatureSet> features) {
  std::vector<CoordinateFrame> frames(features.size());
  for (size_t i = 0; i < features.size(); ++i) {
    const Eigen::Matrix2Xd& c = features[i].coordinates;
    frames[i].centroid = c.rowwise().mean();
    const double mean_norm =
        (c.colwise() - frames[i].centroid).colwise().norm().mean();
    frames[i].scale = mean_norm > 0.0 ? std::sqrt(2.0) / mean_norm : 1.0;
  }
  return frames;
}

std::vector<Eigen::Matrix2Xd> apply_frames(
    std::span<const FeatureSet> features,
    std::span<const CoordinateFrame> frames) {
  std::vector<Eigen::Matrix2Xd> out(features.size());
  for (size_t i = 0; i < features.size(); ++i) {
    out[i] = frames[i].scale *
             (features[i].coordinates.colwise() - frames[i].centroid);
  }
  return out;
}

std::vector<Eigen::Matrix2Xd> raw_coordinates(
    std::span<const FeatureSet> features) {
  std::vector<Eigen::Matrix2Xd> out(features.size());
  for (size_t i = 0; i < features.size(); ++i) out[i] = features[i].coordinates;
  return out;
}

double objective_cycle(const SparseMatrix& w, const Eigen::MatrixXd& y) {
  return EvaluateCycle(w, w.squaredNorm(), y).value;
}

double objective_cycle(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y) {
  return 0.25 * (w - y * y.transpose()).squaredNorm();
}

double objective_geo(const SelectionLabeling& x, const Eigen::MatrixXd& z,
                     std::span<const Eigen::Matrix2Xd> coords) {
  double total = 0.0;
  for (int i = 0; i < x.num_images(); ++i) {
    for (int label = 0; label < x.k; ++label) {
      total += (coords[i].col(x.selected[i][label]) -
                z.block(2 * i, label, 2, 1))
                   .squaredNorm();
    }
  }
  return 0.5 * total;
}

ObjectiveTerms objective_total(const SparseMatrix& w, const Eigen::MatrixXd& y,
                               const SelectionLabeling& x,
                               const Eigen::MatrixXd& z,
                               std::span<const Eigen::Matrix2Xd> coords,
                               const BlockLayout& layout, double lambda,
                               double rho) {
  ObjectiveTerms t;
  t.cycle = objective_cycle(w, y);
  t.geo = lambda == 0.0 ? 0.0 : lambda * objective_geo(x, z, coords);
  t.coupling = rho == 0.0 ? 0.0 : 0.5 * rho * (x.dense(layout) - y).squaredNorm();
  t.total = t.cycle + t.geo + t.coupling;
  return t;
}

Eigen::MatrixXd measurement_matrix(const SelectionLabeling& x,
                                   std::span<const Eigen::Matrix2Xd> coords) {
  Eigen::MatrixXd m(2 * x.num_images(), x.k);
  for (int i = 0; i < x.num_images(); ++i) {
    for (int label = 0; label < x.k; ++label) {
      m.block(2 * i, label, 2, 1) = coords[i].col(x.selected[i][label]);
    }
  }
  return m;
}

Eigen::MatrixXd gradient_Y(const SparseMatrix& w, const Eigen::MatrixXd& y,
                           const Eigen::MatrixXd& x, double rho) {
  Eigen::MatrixXd g = y * (y.transpose() * y) - w * y;
  if (rho != 0.0) g += rho * (y - x);
  return g;
}

StepControl StepControl::FromConfig(const SolverConfig& config) {
  StepControl s;
  s.initial_step = config.initial_step;
  s.backtrack_factor = config.backtrack_factor;
  s.armijo_constant = config.armijo_constant;
  s.min_step = config.min_step;
  s.tolerance = config.inner_tolerance;
  s.max_iterations = config.max_inner_iterations;
  return s;
}

YUpdateResult update_Y(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                       const SparseMatrix& w, const BlockLayout& layout,
                       double rho, const StepControl& step,
                       const ProjectionOptions& projection) {
  const double w_squared_norm = w.squaredNorm();
  const double w_inf = MaxAbsRowSum(w);
  auto coupling = [&](const Eigen::MatrixXd& v) {
    return rho == 0.0 ? 0.0 : 0.5 * rho * (v - x).squaredNorm();
  };

  YUpdateResult result;
  result.y = y;
  CycleEvaluation current = EvaluateCycle(w, w_squared_norm, result.y);
  result.objective = current.value + coupling(result.y);
  result.history.push_back(result.objective);

  Eigen::MatrixXd gradient, candidate;
  for (int it = 0; it < step.max_iterations; ++it) {
    gradient = result.y * current.gram - current.wy;
    if (rho != 0.0) gradient += rho * (result.y - x);

    double eta = step.initial_step > 0.0
                     ? step.initial_step
                     : CurvatureStep(current.gram, w_inf, rho);
    CycleEvaluation trial;
    double trial_objective = 0.0;
    bool accepted = false;
    while (eta >= step.min_step) {
      candidate =
          project_onto_C(result.y - eta * gradient, layout,
                         {projection.tolerance, projection.max_cycles})
              .y;
      trial = EvaluateCycle(w, w_squared_norm, candidate);
      trial_objective = trial.value + coupling(candidate);
      const double directional =
          (gradient.array() * (candidate - result.y).array()).sum();
      if (trial_objective <= result.objective &&
          trial_objective <=
              result.objective + step.armijo_constant * directional) {
        accepted = true;
        break;
      }
      eta *= step.backtrack_factor;
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }

    const double decrease = result.objective - trial_objective;
    result.y.swap(candidate);
    current = std::move(trial);
    const double previous = result.objective;
    result.objective = trial_objective;
    result.history.push_back(result.objective);
    result.iterations = it + 1;
    if (decrease <= step.tolerance * std::abs(previous)) break;
  }
  return result;
}

SelectionLabeling update_X(const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                           std::span<const Eigen::Matrix2Xd> coords,
                           const BlockLayout& layout, int k, double lambda,
                           double rho, int threads) {
  SelectionLabeling x;
  x.k = k;
  x.selected.resize(layout.num_blocks());
  internal::ParallelFor(layout.num_blocks(), threads, [&](int i) {
    const int p = layout.size(i);
    Eigen::MatrixXd cost = -2.0 * rho * image_rows(y, layout, i);
    if (lambda != 0.0) {
      for (int label = 0; label < k; ++label) {
        const Eigen::Vector2d target = z.block(2 * i, label, 2, 1);
        for (int a = 0; a < p; ++a) {
          cost(a, label) += lambda * (coords[i].col(a) - target).squaredNorm();
        }
      }
    }
    x.selected[i] = solve_lap(cost).column_to_row;
  });
  return x;
}

Eigen::MatrixXd update_Z(const Eigen::MatrixXd& measurement, int rank) {
  if (rank >= std::min(measurement.rows(), measurement.cols())) {
    return measurement;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(measurement,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = rank;
  return svd.matrixU().leftCols(r) *
         svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

Initialization initialize(const ProblemInstance& instance,
                          const SolverConfig& config) {
  const BlockLayout& layout = instance.layout();
  const int k = config.k;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // The exactly uniform point is a symmetric stationary point: every column
  // stays identical under projected gradient steps. A small perturbation
  // escapes it too slowly for the relative-decrease stop, so the spread
  // must be of the order of the entries themselves.
  Eigen::MatrixXd y0(layout.total(), k);
  for (int i = 0; i < layout.num_blocks(); ++i) {
    const double base = 1.0 / layout.size(i);
    for (int a = 0; a < layout.size(i); ++a) {
      for (int label = 0; label < k; ++label) {
        y0(layout.offset(i) + a, label) =
            base * (1.0 + config.init_perturbation * unit(rng));
      }
    }
  }
  const ProjectionOptions projection{config.projection_tolerance,
                                     config.max_projection_cycles};
  y0 = project_onto_C(y0, layout, projection).y;

  const Eigen::MatrixXd no_target;
  YUpdateResult relaxed =
      update_Y(y0, no_target, instance.scores(), layout, 0.0,
               StepControl::FromConfig(config), projection);

  Initialization init;
  init.y = std::move(relaxed.y);
  init.objective_trace = std::move(relaxed.history);
  init.x.k = k;
  init.x.selected.resize(layout.num_blocks());
  internal::ParallelFor(layout.num_blocks(), config.threads, [&](int i) {
    init.x.selected[i] =
        solve_lap(-Eigen::MatrixXd(image_rows(init.y, layout, i)))
            .column_to_row;
  });
  return init;
}

std::vector<Eigen::Matrix2Xd> solver_coordinates(const ProblemInstance& instance,
                                                 const SolverConfig& config) {
  if (!config.normalize_coordinates) return raw_coordinates(instance.features());
  const auto frames = normalizing_frames(instance.features());
  return apply_frames(instance.features(), frames);
}

double objective_labeling(const ProblemInstance& instance,
                          const SelectionLabeling& x,
                          const SolverConfig& config) {
  const auto coords = solver_coordinates(instance, config);
  const Eigen::MatrixXd m = measurement_matrix(x, coords);
  const Eigen::MatrixXd z = update_Z(m, config.rank);
  return objective_cycle(instance.scores(), x.dense(instance.layout())) +
         config.lambda * objective_geo(x, z, coords);
}

SolverState solve(const ProblemInstance& instance, const SolverConfig& config) {
  config.validate();
  if (config.k > instance.layout().min_size()) {
    throw Error(ErrorCode::kInfeasibleK,
                "k = " + std::to_string(config.k) +
                    " exceeds the smallest candidate count " +
                    std::to_string(instance.layout().min_size()));
  }
  const BlockLayout& layout = instance.layout();
  const SparseMatrix& w = instance.scores();

  SolverState state;
  if (config.normalize_coordinates) {
    state.frames = normalizing_frames(instance.features());
  } else {
    state.frames.assign(instance.num_images(), CoordinateFrame{});
  }
  const auto coords = apply_frames(instance.features(), state.frames);
  const StepControl step = StepControl::FromConfig(config);
  const ProjectionOptions projection{config.projection_tolerance,
                                     config.max_projection_cycles};

  Initialization init = initialize(instance, config);
  state.y = std::move(init.y);
  state.x = std::move(init.x);
  state.z = update_Z(measurement_matrix(state.x, coords), config.rank);
  for (size_t t = 0; t < init.objective_trace.size(); ++t) {
    TraceRecord record;
    record.stage = -1;
    record.iteration = static_cast<int>(t);
    record.terms.cycle = init.objective_trace[t];
    record.terms.total = init.objective_trace[t];
    state.trace.push_back(record);
  }

  for (size_t s = 0; s < config.rho_schedule.size(); ++s) {
    const double rho = config.rho_schedule[s];
    state.rho = rho;
    auto record = [&](int iteration) {
      TraceRecord r;
      r.stage = static_cast<int>(s);
      r.iteration = iteration;
      r.rho = rho;
      r.terms = objective_total(w, state.y, state.x, state.z, coords, layout,
                                config.lambda, rho);
      state.trace.push_back(r);
      return r.terms.total;
    };

    double previous = record(0);
    bool converged = false;
    for (int sweep = 1; sweep <= config.max_outer_sweeps; ++sweep) {
      YUpdateResult updated = update_Y(state.y, state.x.dense(layout), w, layout,
                                       rho, step, projection);
      state.y_stalls += updated.stalled ? 1 : 0;
      state.y = std::move(updated.y);
      state.x = update_X(state.y, state.z, coords, layout, config.k,
                         config.lambda, rho, config.threads);
      state.z = update_Z(measurement_matrix(state.x, coords), config.rank);
      const double total = record(sweep);
      if (previous - total <= config.outer_tolerance * std::abs(previous)) {
        converged = true;
        break;
      }
      previous = total;
    }
    if (!converged) state.max_sweeps_exceeded = true;
  }

  state.z_pixels = PixelZ(state.z, state.frames);
  state.objective = objective_cycle(w, state.x.dense(layout)) +
                    config.lambda * objective_geo(state.x, state.z, coords);
  return state;
}

}  // namespace consmatch
