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

// Command-line front end. Every operation goes through the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "consmatch/consmatch.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitWarning = 3;

// Owns a C handle and releases it with the matching free function.
template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (ptr_ != nullptr) Free(ptr_);
  }
  T** out() { return &ptr_; }
  T* get() const { return ptr_; }

 private:
  T* ptr_ = nullptr;
};

using Problem = Handle<cm_problem, cm_problem_free>;
using Truth = Handle<cm_truth, cm_truth_free>;
using Config = Handle<cm_config, cm_config_free>;
using Result = Handle<cm_result, cm_result_free>;
using Labeling = Handle<cm_labeling, cm_labeling_free>;
using Report = Handle<cm_report, cm_report_free>;
using Reconstruction = Handle<cm_reconstruction, cm_reconstruction_free>;

// Thrown on a failed call; carries the process exit code.
struct Failure {
  int exit_code;
};

void Check(cm_status status) {
  if (status == CM_OK) return;
  std::fprintf(stderr, "error: %s: %s\n", cm_status_name(status),
               cm_last_error());
  throw Failure{status == CM_ERR_INVALID_ARGUMENT ? kExitUsage : kExitInvalid};
}

struct SynthArgs {
  int n = 0;
  int universe = 10;
  int outliers = 0;
  double sigma = 0.0;
  double corrupt = 0.0;
  std::uint64_t seed = 0;
  int descriptor_dim = 0;
  double descriptor_noise = 0.0;
  bool match_descriptors = false;
  std::string out;
  std::string truth;
};

struct SolveArgs {
  std::string problem;
  int k = 0;
  double lambda = 1.0;
  bool lambda_set = false;
  int rank = 4;
  std::vector<double> rho;
  std::uint64_t seed = 0;
  int threads = 1;
  int max_sweeps = 0;
  bool match_descriptors = false;
  std::string out;
  std::string trace;
};

struct EvalArgs {
  std::string labeling;
  std::string truth;
  std::string problem;
  int rank = 4;
  std::string id;
};

struct ReconstructArgs {
  std::string problem;
  std::string labeling;
  std::string out;
};

int RunSynth(const SynthArgs& args) {
  cm_synth_params params;
  cm_synth_params_default(&params);
  params.num_images = args.n;
  params.universe = args.universe;
  params.outliers_per_image = args.outliers;
  params.coord_noise_sigma = args.sigma;
  params.match_corruption_rate = args.corrupt;
  params.seed = args.seed;
  params.descriptor_dim = args.descriptor_dim;
  params.descriptor_noise = args.descriptor_noise;
  params.match_descriptors = args.match_descriptors ? 1 : 0;
  Problem problem;
  Truth truth;
  Check(cm_synth_generate(&params, problem.out(), truth.out()));
  Check(cm_problem_write(problem.get(), args.out.c_str()));
  Check(cm_truth_write(truth.get(), args.truth.c_str()));
  return kExitOk;
}

int RunSolve(const SolveArgs& args) {
  Problem problem;
  Check(cm_problem_read(args.problem.c_str(), problem.out()));
  if (args.match_descriptors) {
    Check(cm_problem_match_descriptors(problem.get(), args.threads));
  }
  Config config;
  Check(cm_config_create(config.out()));
  Check(cm_config_apply_problem_defaults(config.get(), problem.get()));
  if (args.k > 0) Check(cm_config_set_k(config.get(), args.k));
  if (args.lambda_set) Check(cm_config_set_lambda(config.get(), args.lambda));
  Check(cm_config_set_rank(config.get(), args.rank));
  if (!args.rho.empty()) {
    Check(cm_config_set_rho_schedule(config.get(), args.rho.data(),
                                     args.rho.size()));
  }
  Check(cm_config_set_seed(config.get(), args.seed));
  Check(cm_config_set_threads(config.get(), args.threads));
  if (args.max_sweeps > 0) {
    Check(cm_config_set_max_outer_sweeps(config.get(), args.max_sweeps));
  }
  if (cm_config_k(config.get()) <= 0) {
    std::fprintf(stderr, "error: k is neither given by --k nor by the problem file\n");
    return kExitUsage;
  }

  Result result;
  Check(cm_solve(problem.get(), config.get(), result.out()));
  Labeling labeling;
  Check(cm_result_labeling(result.get(), labeling.out()));
  Check(cm_labeling_write(labeling.get(), problem.get(), args.out.c_str()));
  if (!args.trace.empty()) {
    Check(cm_result_write_trace(result.get(), args.trace.c_str()));
  }
  std::printf("objective %.17g\n", cm_result_objective(result.get()));
  if (cm_result_max_sweeps_exceeded(result.get())) {
    std::fprintf(stderr, "warning: sweep limit reached before convergence\n");
    return kExitWarning;
  }
  return kExitOk;
}

int RunEval(const EvalArgs& args) {
  Labeling labeling;
  Check(cm_labeling_read(args.labeling.c_str(), labeling.out()));
  Truth truth;
  Check(cm_truth_read(args.truth.c_str(), truth.out()));
  Problem problem;
  if (!args.problem.empty()) {
    Check(cm_problem_read(args.problem.c_str(), problem.out()));
  }
  Report report;
  Check(cm_evaluate(labeling.get(), truth.get(), problem.get(), args.rank,
                    report.out()));
  const std::string id =
      args.id.empty() ? std::filesystem::path(args.labeling).stem().string()
                      : args.id;
  for (size_t i = 0; i < cm_report_size(report.get()); ++i) {
    const char* name = nullptr;
    double value = 0.0;
    Check(cm_report_metric(report.get(), i, &name, &value));
    std::printf("%s %.17g %s\n", name, value, id.c_str());
  }
  return kExitOk;
}

int RunReconstruct(const ReconstructArgs& args) {
  Problem problem;
  Check(cm_problem_read(args.problem.c_str(), problem.out()));
  Labeling labeling;
  Check(cm_labeling_read(args.labeling.c_str(), labeling.out()));
  Reconstruction reconstruction;
  Check(cm_reconstruct(problem.get(), labeling.get(), reconstruction.out()));
  if (!args.out.empty()) {
    Check(cm_reconstruction_write_points(reconstruction.get(), args.out.c_str()));
  }
  std::printf("rms %.17g\n", cm_reconstruction_rms(reconstruction.get()));
  if (cm_reconstruction_degenerate(reconstruction.get())) {
    std::fprintf(stderr, "warning: measurement matrix has rank below 3\n");
    return kExitWarning;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint feature selection and labeling across image collections"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cm_version()));

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a planted instance");
  synth_cmd->add_option("--n", synth.n, "Number of images")
      ->required()
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--universe", synth.universe, "Universe size")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--outliers", synth.outliers, "Outliers per image")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--sigma", synth.sigma, "Coordinate noise")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--corrupt", synth.corrupt, "Match corruption rate")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--descriptor-dim", synth.descriptor_dim,
                        "Descriptor dimension, 0 for none")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--descriptor-noise", synth.descriptor_noise,
                        "Descriptor noise")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_flag("--match-descriptors", synth.match_descriptors,
                      "Build scores by matching descriptors");
  synth_cmd->add_option("--out", synth.out, "Problem file")->required();
  synth_cmd->add_option("--truth", synth.truth, "Ground-truth file")->required();

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Select and label features");
  solve_cmd->add_option("problem", solve.problem, "Problem file")->required();
  solve_cmd->add_option("--k", solve.k, "Number of labels")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--lambda", solve.lambda, "Geometric weight")
      ->check(CLI::NonNegativeNumber)
      ->each([&solve](const std::string&) { solve.lambda_set = true; });
  solve_cmd->add_option("--rank", solve.rank, "Measurement rank")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--rho", solve.rho, "Coupling schedule")
      ->delimiter(',');
  solve_cmd->add_option("--seed", solve.seed, "Random seed");
  solve_cmd->add_option("--threads", solve.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-sweeps", solve.max_sweeps,
                        "Sweep limit per coupling stage")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--match-descriptors", solve.match_descriptors,
                      "Replace scores by descriptor matching");
  solve_cmd->add_option("--out", solve.out, "Labeling file")->required();
  solve_cmd->add_option("--trace", solve.trace, "Objective trace CSV");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a labeling");
  eval_cmd->add_option("labeling", eval.labeling, "Labeling file")->required();
  eval_cmd->add_option("truth", eval.truth, "Ground-truth file")->required();
  eval_cmd->add_option("--problem", eval.problem,
                       "Problem file for input and rank metrics");
  eval_cmd->add_option("--rank", eval.rank, "Rank for the tail ratio")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--id", eval.id, "Instance id in the report");

  ReconstructArgs recon;
  CLI::App* recon_cmd =
      app.add_subcommand("reconstruct", "Affine reconstruction of a labeling");
  recon_cmd->add_option("problem", recon.problem, "Problem file")->required();
  recon_cmd->add_option("labeling", recon.labeling, "Labeling file")->required();
  recon_cmd->add_option("--out", recon.out, "Point cloud file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return RunSynth(synth);
    if (solve_cmd->parsed()) return RunSolve(solve);
    if (eval_cmd->parsed()) return RunEval(eval);
    if (recon_cmd->parsed()) return RunReconstruct(recon);
  } catch (const Failure& failure) {
    return failure.exit_code;
  }
  return kExitUsage;
}
