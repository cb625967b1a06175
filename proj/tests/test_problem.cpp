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

#include <random>

#include <gtest/gtest.h>

#include "consmatch/error.hpp"
#include "consmatch/problem.hpp"

namespace consmatch {
namespace {

FeatureSet Features(const std::string& id, int p) {
  FeatureSet f;
  f.image_id = id;
  f.coordinates = Eigen::Matrix2Xd::Zero(2, p);
  for (int c = 0; c < p; ++c) f.coordinates.col(c) << c, 2.0 * c;
  return f;
}

SolverConfig ConfigWithK(int k) {
  SolverConfig config;
  config.k = k;
  return config;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

TEST(ValidateInstanceTest, AcceptsConsistentShapes) {
  PairwiseScores scores;
  scores.blocks[{0, 1}] = Eigen::MatrixXd::Identity(3, 3);
  const ProblemInstance instance = validate_instance(
      {Features("a", 3), Features("b", 3)}, scores, ConfigWithK(2));
  EXPECT_EQ(instance.num_images(), 2);
  EXPECT_EQ(instance.total_features(), 6);
}

TEST(ValidateInstanceTest, RejectsKAboveSmallestImage) {
  EXPECT_EQ(CodeOf([] {
              validate_instance({Features("a", 3), Features("b", 5)}, {},
                                ConfigWithK(4));
            }),
            ErrorCode::kInfeasibleK);
}

TEST(ValidateInstanceTest, RejectsMisshapenBlock) {
  PairwiseScores scores;
  scores.blocks[{0, 1}] = Eigen::MatrixXd::Zero(3, 2);
  EXPECT_EQ(CodeOf([&] {
              validate_instance({Features("a", 3), Features("b", 3)}, scores,
                                ConfigWithK(2));
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(ValidateInstanceTest, RejectsNonFiniteInput) {
  FeatureSet bad = Features("a", 2);
  bad.coordinates(0, 1) = std::nan("");
  EXPECT_EQ(CodeOf([&] {
              validate_instance({bad, Features("b", 2)}, {}, ConfigWithK(1));
            }),
            ErrorCode::kNonFinite);

  PairwiseScores scores;
  scores.blocks[{0, 1}] = Eigen::MatrixXd::Zero(2, 2);
  scores.blocks[{0, 1}](1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(CodeOf([&] {
              validate_instance({Features("a", 2), Features("b", 2)}, scores,
                                ConfigWithK(1));
            }),
            ErrorCode::kNonFinite);
}

TEST(ValidateInstanceTest, RejectsScoresOutsideUnitInterval) {
  PairwiseScores scores;
  scores.blocks[{0, 1}] = Eigen::MatrixXd::Constant(2, 2, 1.5);
  EXPECT_EQ(CodeOf([&] {
              validate_instance({Features("a", 2), Features("b", 2)}, scores,
                                ConfigWithK(1));
            }),
            ErrorCode::kInvalidValue);
}

TEST(ValidateInstanceTest, RejectsNonUnitDescriptors) {
  FeatureSet f = Features("a", 2);
  f.descriptors = Eigen::MatrixXd::Constant(3, 2, 1.0);
  EXPECT_EQ(CodeOf([&] {
              validate_instance({f, Features("b", 2)}, {}, ConfigWithK(1));
            }),
            ErrorCode::kInvalidValue);
}

TEST(ValidateInstanceTest, RejectsBadConfig) {
  SolverConfig config = ConfigWithK(1);
  config.rho_schedule = {10.0, 1.0};
  EXPECT_EQ(CodeOf([&] {
              validate_instance({Features("a", 2), Features("b", 2)}, {},
                                config);
            }),
            ErrorCode::kInvalidArgument);
  config = ConfigWithK(0);
  EXPECT_EQ(CodeOf([&] {
              validate_instance({Features("a", 2), Features("b", 2)}, {},
                                config);
            }),
            ErrorCode::kInvalidArgument);
}

TEST(ValidateInstanceTest, AveragesBothOrientations) {
  PairwiseScores scores;
  Eigen::MatrixXd forward(2, 2), backward(2, 2);
  forward << 1.0, 0.0, 0.2, 0.0;
  backward << 0.6, 0.0, 0.0, 0.0;  // backward(0,0) pairs with forward(0,0)
  scores.blocks[{0, 1}] = forward;
  scores.blocks[{1, 0}] = backward;
  const ProblemInstance instance = validate_instance(
      {Features("a", 2), Features("b", 2)}, scores, ConfigWithK(1));
  const Eigen::MatrixXd w(instance.scores());
  EXPECT_DOUBLE_EQ(w(0, 2), 0.8);
  EXPECT_DOUBLE_EQ(w(1, 2), 0.1);
  EXPECT_DOUBLE_EQ(w(2, 0), 0.8);
  EXPECT_DOUBLE_EQ(w(2, 1), 0.1);
  EXPECT_TRUE(w.isApprox(w.transpose(), 1e-12));
}

TEST(AssembleBlockTest, SingleImageIsIdentity) {
  const std::vector<int> sizes{2};
  const Eigen::MatrixXd w(assemble_block({}, BlockLayout(sizes)));
  EXPECT_EQ(w, Eigen::MatrixXd::Identity(2, 2));
}

TEST(AssembleBlockTest, PlacesOffDiagonalEntry) {
  PairwiseScores scores;
  scores.blocks[{0, 1}] = Eigen::MatrixXd::Constant(1, 1, 0.7);
  const std::vector<int> sizes{1, 1};
  const Eigen::MatrixXd w(assemble_block(scores, BlockLayout(sizes)));
  Eigen::Matrix2d want;
  want << 1.0, 0.7, 0.7, 1.0;
  EXPECT_EQ(w, want);
}

TEST(AssembleBlockTest, MatchesIndexArithmeticAndRoundTrips) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<int> sizes{2, 3, 2};
  const BlockLayout layout(sizes);
  PairwiseScores scores;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      Eigen::MatrixXd b(sizes[i], sizes[j]);
      for (double& v : b.reshaped()) v = unit(rng);
      scores.blocks[{i, j}] = b;
    }
  }
  const Eigen::MatrixXd w(assemble_block(scores, layout));
  const int starts[3] = {0, 2, 5};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int a = 0; a < sizes[i]; ++a) {
        for (int b = 0; b < sizes[j]; ++b) {
          double want = 0.0;
          if (i == j) {
            want = a == b ? 1.0 : 0.0;
          } else if (i < j) {
            want = scores.blocks.at({i, j})(a, b);
          } else {
            want = scores.blocks.at({j, i})(b, a);
          }
          EXPECT_EQ(w(starts[i] + a, starts[j] + b), want);
        }
      }
    }
  }
}

TEST(AssembleBlockTest, DiagonalInputIsReplacedByIdentity) {
  PairwiseScores scores;
  scores.blocks[{0, 0}] = Eigen::MatrixXd::Constant(2, 2, 0.5);
  const std::vector<int> sizes{2};
  const ProblemInstance instance =
      validate_instance({Features("a", 2)}, scores, ConfigWithK(1));
  EXPECT_EQ(Eigen::MatrixXd(instance.scores()), Eigen::MatrixXd::Identity(2, 2));
}

TEST(SelectionLabelingTest, BlockProductsArePartialPermutations) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 4);
    std::vector<int> sizes;
    SelectionLabeling x;
    x.k = k;
    for (int i = 0; i < 4; ++i) {
      const int p = k + static_cast<int>(rng() % 4);
      sizes.push_back(p);
      std::vector<int> rows(p);
      std::iota(rows.begin(), rows.end(), 0);
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(k);
      x.selected.push_back(rows);
    }
    const BlockLayout layout(sizes);
    x.check(layout);
    const Eigen::MatrixXd dense = x.dense(layout);
    const Eigen::MatrixXd p = Eigen::MatrixXd(x.correspondence_matrix(layout));
    EXPECT_TRUE(p.isApprox(dense * dense.transpose()));
    for (int i = 0; i < 4; ++i) {
      const Eigen::MatrixXd xi = x.block(i, sizes[i]);
      EXPECT_EQ(xi.transpose() * xi, Eigen::MatrixXd::Identity(k, k));
      for (int z = 0; z < 4; ++z) {
        for (int j = 0; j < 4; ++j) {
          const Eigen::MatrixXd xz = x.block(z, sizes[z]);
          const Eigen::MatrixXd xj = x.block(j, sizes[j]);
          const Eigen::MatrixXd pij = xi * xj.transpose();
          EXPECT_LE(pij.rowwise().sum().maxCoeff(), 1.0);
          EXPECT_LE(pij.colwise().sum().maxCoeff(), 1.0);
          EXPECT_EQ((xi * xz.transpose()) * (xz * xj.transpose()), pij);
        }
      }
    }
  }
}

TEST(SelectionLabelingTest, CheckRejectsInvalidLabelings) {
  const std::vector<int> sizes{3, 3};
  const BlockLayout layout(sizes);
  SelectionLabeling repeated{2, {{0, 0}, {1, 2}}};
  EXPECT_THROW(repeated.check(layout), Error);
  SelectionLabeling out_of_range{2, {{0, 3}, {1, 2}}};
  EXPECT_THROW(out_of_range.check(layout), Error);
  SelectionLabeling wrong_count{2, {{0, 1}}};
  EXPECT_THROW(wrong_count.check(layout), Error);
}

}  // namespace
}  // namespace consmatch
