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

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "consmatch/assignment.hpp"
#include "consmatch/evaluation.hpp"
#include "consmatch/projection.hpp"
#include "consmatch/solver.hpp"
#include "consmatch/synthetic.hpp"
#include "oracles.hpp"

namespace consmatch {
namespace {

Eigen::MatrixXd RandomMatrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (double& v : m.reshaped()) v = normal(rng);
  return m;
}

SelectionLabeling RandomLabeling(std::mt19937_64& rng,
                                 const std::vector<int>& sizes, int k) {
  SelectionLabeling x;
  x.k = k;
  for (int p : sizes) {
    std::vector<int> rows(p);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(k);
    x.selected.push_back(rows);
  }
  return x;
}

std::vector<Eigen::Matrix2Xd> RandomCoords(std::mt19937_64& rng,
                                           const std::vector<int>& sizes) {
  std::vector<Eigen::Matrix2Xd> coords;
  for (int p : sizes) coords.push_back(RandomMatrix(rng, 2, p));
  return coords;
}

ProblemInstance Planted(const SyntheticOptions& options, int k) {
  SolverConfig config;
  config.k = k;
  const PlantedInstance planted = generate(options);
  return validate_instance(planted.features, planted.scores, config);
}

TEST(ObjectiveCycleTest, Examples) {
  const Eigen::MatrixXd y = Eigen::MatrixXd::Identity(3, 2);
  EXPECT_EQ(objective_cycle(Eigen::MatrixXd(y * y.transpose()), y), 0.0);
  EXPECT_EQ(objective_cycle(Eigen::MatrixXd::Identity(3, 3),
                            Eigen::MatrixXd::Zero(3, 2)),
            0.75);
}

TEST(ObjectiveCycleTest, MatchesElementwiseLoop) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd w = RandomMatrix(rng, 4, 4);
    const Eigen::MatrixXd y = RandomMatrix(rng, 4, 2);
    double want = 0.0;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        double dot = 0.0;
        for (int c = 0; c < 2; ++c) dot += y(a, c) * y(b, c);
        want += (w(a, b) - dot) * (w(a, b) - dot);
      }
    }
    want /= 4.0;
    EXPECT_NEAR(objective_cycle(w, y), want, 1e-12 * std::max(1.0, want));
    const Eigen::MatrixXd sym = 0.5 * (w + w.transpose());
    const SparseMatrix sparse = sym.sparseView();
    EXPECT_NEAR(objective_cycle(sparse, y), objective_cycle(sym, y),
                1e-10 * std::max(1.0, want));
  }
}

TEST(ObjectiveGeoTest, Examples) {
  const std::vector<int> sizes{3};
  SelectionLabeling x{1, {{1}}};
  std::vector<Eigen::Matrix2Xd> coords{Eigen::Matrix2Xd::Zero(2, 3)};
  coords[0].col(1) << 3.0, 4.0;
  EXPECT_EQ(objective_geo(x, Eigen::MatrixXd::Zero(2, 1), coords), 12.5);
  EXPECT_EQ(objective_geo(x, measurement_matrix(x, coords), coords), 0.0);
}

TEST(ObjectiveGeoTest, MatchesPerImageLoop) {
  std::mt19937_64 rng(42);
  const std::vector<int> sizes{4, 5, 3};
  const SelectionLabeling x = RandomLabeling(rng, sizes, 3);
  const auto coords = RandomCoords(rng, sizes);
  const Eigen::MatrixXd z = RandomMatrix(rng, 6, 3);
  double want = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::MatrixXd ci_xi = coords[i] * x.block(i, sizes[i]);
    want += (ci_xi - z.middleRows(2 * i, 2)).squaredNorm();
  }
  EXPECT_NEAR(objective_geo(x, z, coords), 0.5 * want, 1e-12 * want);
}

TEST(ObjectiveTotalTest, ComposesTerms) {
  std::mt19937_64 rng(43);
  const std::vector<int> sizes{3, 4};
  const BlockLayout layout(sizes);
  const SelectionLabeling x = RandomLabeling(rng, sizes, 2);
  const auto coords = RandomCoords(rng, sizes);
  const Eigen::MatrixXd dense = x.dense(layout);

  const SparseMatrix exact = x.correspondence_matrix(layout);
  const ObjectiveTerms zero = objective_total(
      exact, dense, x, measurement_matrix(x, coords), coords, layout, 1.0, 5.0);
  EXPECT_EQ(zero.total, 0.0);

  const Eigen::MatrixXd w_dense = RandomMatrix(rng, 7, 7);
  const Eigen::MatrixXd w_sym = 0.5 * (w_dense + w_dense.transpose());
  const SparseMatrix w = w_sym.sparseView();
  const Eigen::MatrixXd y = RandomMatrix(rng, 7, 2);
  const Eigen::MatrixXd z = RandomMatrix(rng, 4, 2);
  const double cycle = 0.25 * (w_sym - y * y.transpose()).squaredNorm();
  const double geo = objective_geo(x, z, coords);
  const double coupling = 0.5 * (dense - y).squaredNorm();

  const ObjectiveTerms no_rho =
      objective_total(w, y, x, z, coords, layout, 2.0, 0.0);
  EXPECT_NEAR(no_rho.total, cycle + 2.0 * geo, 1e-9);
  EXPECT_EQ(no_rho.coupling, 0.0);

  const ObjectiveTerms all = objective_total(w, y, x, z, coords, layout, 2.0, 3.0);
  EXPECT_NEAR(all.cycle, cycle, 1e-9);
  EXPECT_NEAR(all.geo, 2.0 * geo, 1e-9);
  EXPECT_NEAR(all.coupling, 3.0 * coupling, 1e-9);
  EXPECT_NEAR(all.total, cycle + 2.0 * geo + 3.0 * coupling, 1e-9);
}

TEST(GradientTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> sizes{3, 4, 3};
    const BlockLayout layout(sizes);
    Eigen::MatrixXd w = RandomMatrix(rng, 10, 10).cwiseAbs();
    w = (0.5 * (w + w.transpose())).eval();
    const Eigen::MatrixXd y =
        project_onto_C(RandomMatrix(rng, 10, 3), layout).y;
    const Eigen::MatrixXd x = RandomLabeling(rng, sizes, 3).dense(layout);
    const double rho = 0.5 * (trial % 4);
    const Eigen::MatrixXd analytic =
        gradient_Y(SparseMatrix(w.sparseView()), y, x, rho);
    const Eigen::MatrixXd numeric =
        oracles::FiniteDifferenceGradient(w, y, x, rho, 1e-5);
    EXPECT_LE((analytic - numeric).norm(), 1e-5 * numeric.norm());
  }
}

TEST(UpdateYTest, StationaryPointIsUnchanged) {
  const std::vector<int> sizes{3, 3};
  const BlockLayout layout(sizes);
  const SelectionLabeling x{2, {{0, 2}, {1, 0}}};
  const Eigen::MatrixXd y = x.dense(layout);
  const YUpdateResult r =
      update_Y(y, Eigen::MatrixXd(), x.correspondence_matrix(layout), layout,
               0.0, StepControl{}, ProjectionOptions{});
  EXPECT_EQ(r.y, y);
  EXPECT_EQ(r.objective, 0.0);
}

// A target X is chosen so that the gradient has zero column sums in every
// block; a small step from an interior point then stays in C.
TEST(UpdateYTest, SmallInteriorStepIsPlainGradientStep) {
  std::mt19937_64 rng(45);
  const std::vector<int> sizes{4, 5};
  const BlockLayout layout(sizes);
  Eigen::MatrixXd y(9, 2);
  for (int i = 0; i < 2; ++i) {
    std::uniform_real_distribution<double> unit(0.5, 1.5);
    for (int a = 0; a < sizes[i]; ++a) {
      for (int c = 0; c < 2; ++c) y(layout.offset(i) + a, c) = unit(rng);
    }
    auto block = image_rows(y, layout, i);
    block.array().rowwise() /= block.colwise().sum().array();
  }
  Eigen::MatrixXd w = RandomMatrix(rng, 9, 9).cwiseAbs() * 0.3;
  w = (0.5 * (w + w.transpose())).eval();
  const SparseMatrix ws = w.sparseView();
  const double rho = 2.0;
  const Eigen::MatrixXd base = y * (y.transpose() * y) - w * y;
  Eigen::MatrixXd centered = base;
  for (int i = 0; i < 2; ++i) {
    auto block = image_rows(centered, layout, i);
    block.rowwise() -= block.colwise().mean();
  }
  const Eigen::MatrixXd x = y + (base - centered) / rho;
  ASSERT_LE((gradient_Y(ws, y, x, rho) - centered).norm(), 1e-12);

  StepControl step;
  step.initial_step = 1e-3;
  step.max_iterations = 1;
  const YUpdateResult r = update_Y(y, x, ws, layout, rho, step, {});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE((r.y - (y - 1e-3 * centered)).norm(), 1e-12);
}

// Two images, one candidate pair each, one label: C is parametrized by
// (t, s) with Y = (t, 1 - t, s, 1 - s).
TEST(UpdateYTest, TinyInstanceReachesGridMinimizer) {
  const std::vector<int> sizes{2, 2};
  const BlockLayout layout(sizes);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(4, 4);
  w(0, 2) = w(2, 0) = 0.9;
  w(1, 3) = w(3, 1) = 0.3;
  const SparseMatrix ws = w.sparseView();
  Eigen::MatrixXd x(4, 1);
  x << 1.0, 0.0, 0.0, 1.0;
  const double rho = 0.4;
  auto point = [](double t, double s) {
    Eigen::MatrixXd y(4, 1);
    y << t, 1.0 - t, s, 1.0 - s;
    return y;
  };
  auto f = [&](double t, double s) {
    return oracles::DenseObjective(w, point(t, s), x, rho);
  };
  double best_t = 0.0, best_s = 0.0, best = f(0.0, 0.0);
  auto search = [&](double t0, double t1, double s0, double s1, double h) {
    for (double t = t0; t <= t1 + 1e-12; t += h) {
      for (double s = s0; s <= s1 + 1e-12; s += h) {
        const double tc = std::clamp(t, 0.0, 1.0), sc = std::clamp(s, 0.0, 1.0);
        if (f(tc, sc) < best) {
          best = f(tc, sc);
          best_t = tc;
          best_s = sc;
        }
      }
    }
  };
  search(0.0, 1.0, 0.0, 1.0, 1e-2);
  search(best_t - 1e-2, best_t + 1e-2, best_s - 1e-2, best_s + 1e-2, 1e-5);

  StepControl step;
  step.tolerance = 1e-12;
  step.max_iterations = 5000;
  ProjectionOptions projection;
  projection.tolerance = 1e-12;
  const YUpdateResult r =
      update_Y(point(0.5, 0.5), x, ws, layout, rho, step, projection);
  EXPECT_LE((r.y - point(best_t, best_s)).norm(), 1e-3);
}

TEST(UpdateYTest, HistoryIsNonIncreasingAndFeasible) {
  std::mt19937_64 rng(46);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticOptions options;
    options.num_images = 5;
    options.universe = 6;
    options.outliers_per_image = 3;
    options.match_corruption_rate = 0.3;
    options.seed = seed;
    const ProblemInstance instance = Planted(options, 5);
    const BlockLayout& layout = instance.layout();
    const Eigen::MatrixXd y0 =
        project_onto_C(RandomMatrix(rng, layout.total(), 5), layout).y;
    const Eigen::MatrixXd x = discretize(y0);
    const YUpdateResult r =
        update_Y(y0, x, instance.scores(), layout, 1.0, StepControl{}, {});
    for (size_t t = 1; t < r.history.size(); ++t) {
      EXPECT_LE(r.history[t], r.history[t - 1]);
    }
    EXPECT_LE(constraint_violation(r.y, layout), 1e-6);
  }
}

TEST(UpdateXTest, WithoutGeometryDiscretizesEachBlock) {
  std::mt19937_64 rng(47);
  const std::vector<int> sizes{4, 3, 5};
  const BlockLayout layout(sizes);
  const Eigen::MatrixXd y = project_onto_C(RandomMatrix(rng, 12, 3), layout).y;
  const auto coords = RandomCoords(rng, sizes);
  const SelectionLabeling x = update_X(y, RandomMatrix(rng, 6, 3), coords,
                                       layout, 3, 0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(x.block(i, sizes[i]),
              discretize(Eigen::MatrixXd(image_rows(y, layout, i))));
  }
}

TEST(UpdateXTest, WithoutCouplingSnapsToCoincidentCandidates) {
  std::mt19937_64 rng(48);
  const std::vector<int> sizes{5};
  const BlockLayout layout(sizes);
  const auto coords = RandomCoords(rng, sizes);
  Eigen::MatrixXd z(2, 2);
  z.col(0) = coords[0].col(3);
  z.col(1) = coords[0].col(1);
  const SelectionLabeling x = update_X(Eigen::MatrixXd::Zero(5, 2), z, coords,
                                       layout, 2, 1.0, 0.0);
  EXPECT_EQ(x.selected[0], (std::vector<int>{3, 1}));
  EXPECT_EQ(objective_geo(x, z, coords), 0.0);
}

TEST(UpdateXTest, EachBlockMinimizesLinearCost) {
  std::mt19937_64 rng(49);
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<int> sizes{3, 4};
    const BlockLayout layout(sizes);
    const Eigen::MatrixXd y = project_onto_C(RandomMatrix(rng, 7, 2), layout).y;
    const auto coords = RandomCoords(rng, sizes);
    const Eigen::MatrixXd z = RandomMatrix(rng, 4, 2);
    const double lambda = 1.0, rho = 1.0;
    const SelectionLabeling x = update_X(y, z, coords, layout, 2, lambda, rho);
    for (int i = 0; i < 2; ++i) {
      Eigen::MatrixXd h(sizes[i], 2);
      for (int a = 0; a < sizes[i]; ++a) {
        for (int b = 0; b < 2; ++b) {
          h(a, b) = lambda * (coords[i].col(a) - z.block(2 * i, b, 2, 1))
                                 .squaredNorm() -
                    2.0 * rho * y(layout.offset(i) + a, b);
        }
      }
      const oracles::LapOracle best = oracles::EnumerateLap(h);
      double got = 0.0;
      for (int b = 0; b < 2; ++b) got += h(x.selected[i][b], b);
      EXPECT_NEAR(got, best.cost, 1e-12);
    }
  }
}

TEST(UpdateZTest, LowRankInputIsUnchanged) {
  std::mt19937_64 rng(50);
  const Eigen::MatrixXd m = RandomMatrix(rng, 8, 3) * RandomMatrix(rng, 3, 6);
  EXPECT_LE((update_Z(m, 4) - m).norm(), 1e-9);
  EXPECT_EQ(update_Z(Eigen::MatrixXd::Zero(6, 5), 4),
            Eigen::MatrixXd::Zero(6, 5));
}

TEST(UpdateZTest, TailEnergyMatchesEigenvalues) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd m = RandomMatrix(rng, 8, 5);
    const Eigen::MatrixXd z = update_Z(m, 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.transpose() * m);
    // Eigenvalues ascend; the smallest is the discarded energy.
    EXPECT_NEAR((m - z).squaredNorm(), eig.eigenvalues()[0], 1e-9);
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(z).singularValues();
    EXPECT_LE(s[4], 1e-8 * s[0]);
  }
}

TEST(InitializeTest, RecoversPlantedLabelingUpToPermutation) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SyntheticOptions options;
    options.num_images = 6;
    options.universe = 6;
    options.outliers_per_image = 4;
    options.seed = seed;
    const PlantedInstance planted = generate(options);
    SolverConfig config;
    config.k = 6;
    config.seed = seed;
    const ProblemInstance instance =
        validate_instance(planted.features, planted.scores, config);
    const Initialization init = initialize(instance, config);
    EXPECT_EQ(recall(init.x, planted.truth), 1.0) << "seed " << seed;
    EXPECT_EQ(precision(init.x, planted.truth).value, 1.0) << "seed " << seed;
  }
}

TEST(InitializeTest, SingleImageStaysFeasible) {
  FeatureSet f;
  f.image_id = "only";
  f.coordinates = Eigen::Matrix2Xd::Random(2, 4);
  SolverConfig config;
  config.k = 3;
  const ProblemInstance instance = validate_instance({f}, {}, config);
  const Initialization init = initialize(instance, config);
  EXPECT_LE(constraint_violation(init.y, instance.layout()), 1e-6);
  EXPECT_LT(init.objective_trace.back(), init.objective_trace.front());
}

TEST(InitializeTest, AllOnesScoresGiveMonotoneFeasibleTrace) {
  std::vector<FeatureSet> features;
  PairwiseScores scores;
  for (int i = 0; i < 3; ++i) {
    FeatureSet f;
    f.image_id = std::to_string(i);
    f.coordinates = Eigen::Matrix2Xd::Random(2, 3);
    features.push_back(f);
    for (int j = i + 1; j < 3; ++j) scores.blocks[{i, j}] = Eigen::MatrixXd::Ones(3, 3);
  }
  SolverConfig config;
  config.k = 2;
  const ProblemInstance instance = validate_instance(features, scores, config);
  const Initialization init = initialize(instance, config);
  for (size_t t = 1; t < init.objective_trace.size(); ++t) {
    EXPECT_LE(init.objective_trace[t], init.objective_trace[t - 1]);
  }
  EXPECT_LE(constraint_violation(init.y, instance.layout()), 1e-6);
  init.x.check(instance.layout());
}

TEST(SolveTest, NoiselessPlantedRecovery) {
  SyntheticOptions options;
  options.num_images = 8;
  options.universe = 8;
  options.outliers_per_image = 6;
  options.seed = 3;
  const PlantedInstance planted = generate(options);
  SolverConfig config;
  config.k = 8;
  const SolverState state = solve(
      validate_instance(planted.features, planted.scores, config), config);
  EXPECT_EQ(recall(state.x, planted.truth), 1.0);
  EXPECT_FALSE(state.max_sweeps_exceeded);
}

TEST(SolveTest, TraceIsMonotoneWithinStagesAndStatesFeasible) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticOptions options;
    options.num_images = 5;
    options.universe = 6;
    options.outliers_per_image = 2;
    options.coord_noise_sigma = 0.02;
    options.match_corruption_rate = 0.3;
    options.seed = seed;
    const ProblemInstance instance = Planted(options, 5);
    SolverConfig config;
    config.k = 5;
    const SolverState state = solve(instance, config);
    for (size_t t = 1; t < state.trace.size(); ++t) {
      if (state.trace[t].stage != state.trace[t - 1].stage) continue;
      EXPECT_LE(state.trace[t].terms.total, state.trace[t - 1].terms.total + 1e-9);
    }
    state.x.check(instance.layout());
    EXPECT_LE(constraint_violation(state.y, instance.layout()), 1e-6);
    const Eigen::VectorXd s =
        Eigen::JacobiSVD<Eigen::MatrixXd>(state.z).singularValues();
    if (s.size() > 4) EXPECT_LE(s[4], 1e-8 * s[0]);
  }
}

TEST(SolveTest, ZeroLambdaReportsNoGeometricTerm) {
  SyntheticOptions options;
  options.num_images = 4;
  options.universe = 5;
  options.outliers_per_image = 2;
  options.coord_noise_sigma = 0.05;
  options.seed = 2;
  SolverConfig config;
  config.k = 5;
  config.lambda = 0.0;
  const SolverState state = solve(Planted(options, 5), config);
  for (const TraceRecord& r : state.trace) EXPECT_EQ(r.terms.geo, 0.0);
}

TEST(SolveTest, ResultIndependentOfThreadCountAndRepeatable) {
  SyntheticOptions options;
  options.num_images = 6;
  options.universe = 7;
  options.outliers_per_image = 3;
  options.coord_noise_sigma = 0.01;
  options.match_corruption_rate = 0.2;
  options.seed = 8;
  const ProblemInstance instance = Planted(options, 6);
  SolverConfig config;
  config.k = 6;
  const SolverState one = solve(instance, config);
  const SolverState again = solve(instance, config);
  config.threads = 4;
  const SolverState four = solve(instance, config);
  EXPECT_EQ(one.x.selected, again.x.selected);
  EXPECT_EQ(one.x.selected, four.x.selected);
  EXPECT_EQ(one.y, four.y);
  EXPECT_EQ(one.objective, four.objective);
  ASSERT_EQ(one.trace.size(), four.trace.size());
}

TEST(SolveTest, ZPixelsInvertNormalization) {
  SyntheticOptions options;
  options.num_images = 5;
  options.universe = 6;
  options.seed = 4;
  const PlantedInstance planted = generate(options);
  SolverConfig config;
  config.k = 6;
  const ProblemInstance instance =
      validate_instance(planted.features, planted.scores, config);
  const SolverState state = solve(instance, config);
  const Eigen::MatrixXd raw =
      measurement_matrix(state.x, raw_coordinates(instance.features()));
  EXPECT_LE((state.z_pixels - raw).norm(), 1e-9 * raw.norm());
}

TEST(NormalizingFramesTest, CentersAndScales) {
  std::mt19937_64 rng(52);
  FeatureSet f;
  f.coordinates = 50.0 * RandomMatrix(rng, 2, 7);
  f.coordinates.row(0).array() += 300.0;
  const std::vector<FeatureSet> features{f};
  const auto frames = normalizing_frames(features);
  const auto coords = apply_frames(features, frames);
  EXPECT_LE(coords[0].rowwise().mean().norm(), 1e-12);
  EXPECT_NEAR(coords[0].colwise().norm().mean(), std::sqrt(2.0), 1e-12);
}

}  // namespace
}  // namespace consmatch
