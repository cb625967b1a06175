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

#ifndef CONSMATCH_IO_HPP_
#define CONSMATCH_IO_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "consmatch/problem.hpp"
#include "consmatch/solver.hpp"
#include "consmatch/synthetic.hpp"

namespace consmatch {

inline constexpr int kFormatVersion = 1;

// Solver settings a problem file may carry. Command-line flags override
// them; they override the built-in defaults.
struct SolverDefaults {
  std::optional<int> k;
  std::optional<int> rank;
  std::optional<double> lambda;
  std::optional<std::vector<double>> rho_schedule;
};

void apply_defaults(const SolverDefaults& defaults, SolverConfig& config);

struct ProblemDocument {
  std::vector<FeatureSet> features;
  PairwiseScores scores;
  SolverDefaults defaults;
};

// JSON problem document:
//   {"format": "consmatch-problem", "version": 1,
//    "images": [{"id", "num_candidates", "coordinates": [2 x p row-major],
//                "descriptors": {"dim", "values": [d x p row-major]}}],
//    "blocks": [[i, j, row, col, value], ...],
//    "solver": {"k", "rank", "lambda", "rho"}}
// Parsing failures throw kParse.
ProblemDocument parse_problem(std::istream& in);
void write_problem(std::ostream& out, const ProblemDocument& doc);

// {"format": "consmatch-truth", "images": [{"id", "correspondences":
//   [[candidate, label], ...]}]}, label -1 for outliers.
GroundTruth parse_truth(std::istream& in);
void write_truth(std::ostream& out, const GroundTruth& truth,
                 std::span<const std::string> image_ids);

// {"format": "consmatch-labeling", "k", "images": [{"id", "selected":
//   [[candidate, label], ...]}]}.
SelectionLabeling parse_labeling(std::istream& in);
void write_labeling(std::ostream& out, const SelectionLabeling& labeling,
                    std::span<const std::string> image_ids);

// CSV, one row per record: stage,iteration,rho,cycle,geo,coupling,total.
void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace);

// Whitespace table "label x y z", one row per reconstructed point.
void write_point_cloud(std::ostream& out, const Eigen::Matrix3Xd& shape);

// Helpers that open files and map stream failures to kIo.
ProblemDocument read_problem_file(const std::string& path);
void write_problem_file(const std::string& path, const ProblemDocument& doc);
GroundTruth read_truth_file(const std::string& path);
SelectionLabeling read_labeling_file(const std::string& path);

}  // namespace consmatch

#endif  // CONSMATCH_IO_HPP_
