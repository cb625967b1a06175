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

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "consmatch/consmatch.h"
#include "consmatch/error.hpp"
#include "consmatch/evaluation.hpp"
#include "consmatch/frontend.hpp"
#include "consmatch/io.hpp"
#include "consmatch/problem.hpp"
#include "consmatch/reconstruction.hpp"
#include "consmatch/solver.hpp"
#include "consmatch/synthetic.hpp"

struct cm_problem {
  consmatch::ProblemDocument doc;
};
struct cm_truth {
  consmatch::GroundTruth truth;
  std::vector<std::string> ids;
};
struct cm_config {
  consmatch::SolverConfig config;
};
struct cm_result {
  consmatch::SolverState state;
};
struct cm_labeling {
  consmatch::SelectionLabeling labeling;
};
struct cm_report {
  std::vector<std::pair<std::string, double>> metrics;
};
struct cm_reconstruction {
  consmatch::AffineReconstruction result;
};

namespace {

thread_local std::string last_error;

cm_status ToStatus(consmatch::ErrorCode code) {
  using consmatch::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return CM_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return CM_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kInfeasibleK: return CM_ERR_INFEASIBLE_K;
    case ErrorCode::kNonFinite: return CM_ERR_NON_FINITE;
    case ErrorCode::kInvalidValue: return CM_ERR_INVALID_VALUE;
    case ErrorCode::kInfeasible: return CM_ERR_INFEASIBLE;
    case ErrorCode::kInstanceTooLarge: return CM_ERR_INSTANCE_TOO_LARGE;
    case ErrorCode::kDegenerate: return CM_ERR_DEGENERATE;
    case ErrorCode::kKTooSmall: return CM_ERR_K_TOO_SMALL;
    case ErrorCode::kIndexMismatch: return CM_ERR_INDEX_MISMATCH;
    case ErrorCode::kParse: return CM_ERR_PARSE;
    case ErrorCode::kIo: return CM_ERR_IO;
  }
  return CM_ERR_INTERNAL;
}

cm_status Fail(cm_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs fn and converts every exception into a status code.
template <typename Fn>
cm_status Guard(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return CM_OK;
  } catch (const consmatch::Error& e) {
    return Fail(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(CM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(CM_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(CM_ERR_INTERNAL, "unknown failure");
  }
}

void Require(bool condition, const char* what) {
  if (!condition) {
    throw consmatch::Error(consmatch::ErrorCode::kInvalidArgument, what);
  }
}

std::vector<std::string> ImageIds(const cm_problem* problem) {
  std::vector<std::string> ids;
  if (problem == nullptr) return ids;
  for (const auto& f : problem->doc.features) ids.push_back(f.image_id);
  return ids;
}

template <typename Fn>
void WriteFile(const char* path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) {
    throw consmatch::Error(consmatch::ErrorCode::kIo,
                           std::string("cannot write ") + path);
  }
  fn(out);
  if (!out) {
    throw consmatch::Error(consmatch::ErrorCode::kIo,
                           std::string("failed writing ") + path);
  }
}

consmatch::ProblemInstance Validate(const cm_problem* problem,
                                    const consmatch::SolverConfig& config) {
  return consmatch::validate_instance(problem->doc.features,
                                      problem->doc.scores, config);
}

}  // namespace

extern "C" {

const char* cm_version(void) { return "1.0.0"; }

const char* cm_status_name(cm_status status) {
  switch (status) {
    case CM_OK: return "ok";
    case CM_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case CM_ERR_DIMENSION_MISMATCH: return "dimension-mismatch";
    case CM_ERR_INFEASIBLE_K: return "infeasible-k";
    case CM_ERR_NON_FINITE: return "non-finite";
    case CM_ERR_INVALID_VALUE: return "invalid-value";
    case CM_ERR_INFEASIBLE: return "infeasible";
    case CM_ERR_INSTANCE_TOO_LARGE: return "instance-too-large";
    case CM_ERR_DEGENERATE: return "degenerate";
    case CM_ERR_K_TOO_SMALL: return "k-too-small";
    case CM_ERR_INDEX_MISMATCH: return "index-mismatch";
    case CM_ERR_PARSE: return "parse";
    case CM_ERR_IO: return "io";
    case CM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* cm_last_error(void) { return last_error.c_str(); }

// ---- Problems

cm_status cm_problem_read(const char* path, cm_problem** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto problem = std::make_unique<cm_problem>();
    problem->doc = consmatch::read_problem_file(path);
    *out = problem.release();
  });
}

cm_status cm_problem_write(const cm_problem* problem, const char* path) {
  return Guard([&] {
    Require(problem != nullptr && path != nullptr, "null argument");
    WriteFile(path, [&](std::ostream& os) {
      consmatch::write_problem(os, problem->doc);
    });
  });
}

void cm_problem_free(cm_problem* problem) { delete problem; }

int cm_problem_num_images(const cm_problem* problem) {
  return problem ? static_cast<int>(problem->doc.features.size()) : 0;
}

int cm_problem_num_candidates(const cm_problem* problem, int image) {
  if (!problem || image < 0 ||
      image >= static_cast<int>(problem->doc.features.size())) {
    return -1;
  }
  return problem->doc.features[image].size();
}

cm_status cm_problem_match_descriptors(cm_problem* problem, int threads) {
  return Guard([&] {
    Require(problem != nullptr, "null problem");
    Require(threads > 0, "thread count must be positive");
    problem->doc.scores =
        consmatch::match_all_pairs(problem->doc.features, threads);
  });
}

// ---- Ground truth

cm_status cm_truth_read(const char* path, cm_truth** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto truth = std::make_unique<cm_truth>();
    truth->truth = consmatch::read_truth_file(path);
    *out = truth.release();
  });
}

cm_status cm_truth_write(const cm_truth* truth, const char* path) {
  return Guard([&] {
    Require(truth != nullptr && path != nullptr, "null argument");
    WriteFile(path, [&](std::ostream& os) {
      consmatch::write_truth(os, truth->truth, truth->ids);
    });
  });
}

void cm_truth_free(cm_truth* truth) { delete truth; }

// ---- Synthetic instances

void cm_synth_params_default(cm_synth_params* params) {
  if (params == nullptr) return;
  const consmatch::SyntheticOptions defaults;
  params->num_images = defaults.num_images;
  params->universe = defaults.universe;
  params->outliers_per_image = defaults.outliers_per_image;
  params->coord_noise_sigma = defaults.coord_noise_sigma;
  params->match_corruption_rate = defaults.match_corruption_rate;
  params->seed = defaults.seed;
  params->descriptor_dim = defaults.descriptor_dim;
  params->descriptor_noise = defaults.descriptor_noise;
  params->match_descriptors = 0;
}

cm_status cm_synth_generate(const cm_synth_params* params, cm_problem** problem,
                            cm_truth** truth) {
  return Guard([&] {
    Require(params != nullptr && problem != nullptr && truth != nullptr,
            "null argument");
    *problem = nullptr;
    *truth = nullptr;
    consmatch::SyntheticOptions options;
    options.num_images = params->num_images;
    options.universe = params->universe;
    options.outliers_per_image = params->outliers_per_image;
    options.coord_noise_sigma = params->coord_noise_sigma;
    options.match_corruption_rate = params->match_corruption_rate;
    options.seed = params->seed;
    options.descriptor_dim = params->descriptor_dim;
    options.descriptor_noise = params->descriptor_noise;
    options.source = params->match_descriptors
                         ? consmatch::ScoreSource::kDescriptorMatching
                         : consmatch::ScoreSource::kPlanted;
    consmatch::PlantedInstance planted = consmatch::generate(options);

    auto p = std::make_unique<cm_problem>();
    auto t = std::make_unique<cm_truth>();
    for (const auto& f : planted.features) t->ids.push_back(f.image_id);
    t->truth = std::move(planted.truth);
    p->doc.features = std::move(planted.features);
    p->doc.scores = std::move(planted.scores);
    p->doc.defaults.k = options.universe;
    *problem = p.release();
    *truth = t.release();
  });
}

// ---- Configuration

cm_status cm_config_create(cm_config** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = new cm_config();
  });
}

void cm_config_free(cm_config* config) { delete config; }

cm_status cm_config_apply_problem_defaults(cm_config* config,
                                           const cm_problem* problem) {
  return Guard([&] {
    Require(config != nullptr && problem != nullptr, "null argument");
    consmatch::apply_defaults(problem->doc.defaults, config->config);
  });
}

cm_status cm_config_set_k(cm_config* config, int k) {
  return Guard([&] {
    Require(config != nullptr, "null config");
    Require(k > 0, "k must be positive");
    config->config.k = k;
  });
}

cm_status cm_config_set_rank(cm_config* config, int rank) {
  return Guard([&] {
    Require(config != nullptr, "null config");
    Require(rank > 0, "rank must be positive");
    config->config.rank = rank;
  });
}

cm_status cm_config_set_lambda(cm_config* config, double lambda) {
  return Guard([&] {
    Require(config != nullptr, "null config");
    Require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
    config->config.lambda = lambda;
  });
}

cm_status cm_config_set_rho_schedule(cm_config* config, const double* values,
                                     size_t count) {
  return Guard([&] {
    Require(config != nullptr && values != nullptr, "null argument");
    consmatch::SolverConfig candidate = config->config;
    candidate.rho_schedule.assign(values, values + count);
    candidate.k = 1;  // only the schedule is being checked here
    candidate.validate();
    config->config.rho_schedule = std::move(candidate.rho_schedule);
  });
}

cm_status cm_config_set_seed(cm_config* config, uint64_t seed) {
  return Guard([&] {
    Require(config != nullptr, "null config");
    config->config.seed = seed;
  });
}

cm_status cm_config_set_threads(cm_config* config, int threads) {
  return Guard([&] {
    Require(config != nullptr, "null config");
    Require(threads > 0, "thread count must be positive");
    config->config.threads = threads;
  });
}

cm_status cm_config_set_max_outer_sweeps(cm_config* config, int sweeps) {
  return Guard([&] {
    Require(config != nullptr, "null config");
    Require(sweeps > 0, "sweep limit must be positive");
    config->config.max_outer_sweeps = sweeps;
  });
}

int cm_config_k(const cm_config* config) {
  return config ? config->config.k : 0;
}

// ---- Solving

cm_status cm_solve(const cm_problem* problem, const cm_config* config,
                   cm_result** out) {
  return Guard([&] {
    Require(problem != nullptr && config != nullptr && out != nullptr,
            "null argument");
    *out = nullptr;
    const consmatch::ProblemInstance instance = Validate(problem, config->config);
    auto result = std::make_unique<cm_result>();
    result->state = consmatch::solve(instance, config->config);
    *out = result.release();
  });
}

void cm_result_free(cm_result* result) { delete result; }

int cm_result_max_sweeps_exceeded(const cm_result* result) {
  return result && result->state.max_sweeps_exceeded ? 1 : 0;
}

double cm_result_objective(const cm_result* result) {
  return result ? result->state.objective : 0.0;
}

size_t cm_result_trace_length(const cm_result* result) {
  return result ? result->state.trace.size() : 0;
}

cm_status cm_result_trace_record(const cm_result* result, size_t index,
                                 cm_trace_record* out) {
  return Guard([&] {
    Require(result != nullptr && out != nullptr, "null argument");
    Require(index < result->state.trace.size(), "trace index out of range");
    const consmatch::TraceRecord& r = result->state.trace[index];
    *out = cm_trace_record{r.stage,         r.iteration,      r.rho,
                           r.terms.cycle,   r.terms.geo,      r.terms.coupling,
                           r.terms.total};
  });
}

cm_status cm_result_write_trace(const cm_result* result, const char* path) {
  return Guard([&] {
    Require(result != nullptr && path != nullptr, "null argument");
    WriteFile(path, [&](std::ostream& os) {
      consmatch::write_trace(os, result->state.trace);
    });
  });
}

cm_status cm_result_labeling(const cm_result* result, cm_labeling** out) {
  return Guard([&] {
    Require(result != nullptr && out != nullptr, "null argument");
    *out = new cm_labeling{result->state.x};
  });
}

// ---- Labelings

cm_status cm_labeling_read(const char* path, cm_labeling** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto labeling = std::make_unique<cm_labeling>();
    labeling->labeling = consmatch::read_labeling_file(path);
    *out = labeling.release();
  });
}

cm_status cm_labeling_write(const cm_labeling* labeling,
                            const cm_problem* problem, const char* path) {
  return Guard([&] {
    Require(labeling != nullptr && path != nullptr, "null argument");
    const auto ids = ImageIds(problem);
    WriteFile(path, [&](std::ostream& os) {
      consmatch::write_labeling(os, labeling->labeling, ids);
    });
  });
}

void cm_labeling_free(cm_labeling* labeling) { delete labeling; }

int cm_labeling_k(const cm_labeling* labeling) {
  return labeling ? labeling->labeling.k : 0;
}

int cm_labeling_num_images(const cm_labeling* labeling) {
  return labeling ? labeling->labeling.num_images() : 0;
}

int cm_labeling_candidate(const cm_labeling* labeling, int image, int label) {
  if (!labeling || image < 0 || image >= labeling->labeling.num_images() ||
      label < 0 || label >= labeling->labeling.k) {
    return -1;
  }
  return labeling->labeling.selected[image][label];
}

// ---- Evaluation

cm_status cm_evaluate(const cm_labeling* labeling, const cm_truth* truth,
                      const cm_problem* problem, int rank, cm_report** out) {
  return Guard([&] {
    Require(labeling != nullptr && truth != nullptr && out != nullptr,
            "null argument");
    Require(rank > 0, "rank must be positive");
    *out = nullptr;
    const consmatch::SelectionLabeling& x = labeling->labeling;
    const consmatch::GroundTruth& gt = truth->truth;
    auto report = std::make_unique<cm_report>();
    auto& metrics = report->metrics;

    const auto counts = consmatch::count_correspondences(x, gt);
    const auto prec = consmatch::precision(counts);
    metrics.emplace_back("recall", consmatch::recall(counts).value);
    metrics.emplace_back("precision", prec.value);
    metrics.emplace_back("precision_vacuous", prec.vacuous ? 1.0 : 0.0);
    metrics.emplace_back("predicted_pairs", static_cast<double>(counts.predicted));
    metrics.emplace_back("truth_pairs", static_cast<double>(counts.truth));
    metrics.emplace_back("correct_pairs", static_cast<double>(counts.correct));
    metrics.emplace_back("inlier_fraction", consmatch::inlier_fraction(x, gt));

    std::vector<int> sizes;
    for (const auto& labels : gt.labels) sizes.push_back(static_cast<int>(labels.size()));
    const consmatch::BlockLayout layout(sizes);
    metrics.emplace_back(
        "cycle_violation",
        consmatch::cycle_check(x.correspondence_matrix(layout), layout,
                               consmatch::all_triplets(x.num_images())));

    if (problem != nullptr) {
      const auto& features = problem->doc.features;
      if (features.size() != gt.labels.size()) {
        throw consmatch::Error(consmatch::ErrorCode::kIndexMismatch,
                               "problem and ground truth image counts differ");
      }
      for (size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != sizes[i]) {
          throw consmatch::Error(consmatch::ErrorCode::kIndexMismatch,
                                 "problem and ground truth candidate counts differ");
        }
      }
      const auto input = consmatch::count_correspondences(problem->doc.scores, gt);
      metrics.emplace_back("input_recall", consmatch::recall(input).value);
      metrics.emplace_back("input_precision", consmatch::precision(input).value);
      const auto coords = consmatch::raw_coordinates(features);
      const auto diag = consmatch::rank_diagnostic(
          consmatch::measurement_matrix(x, coords), rank);
      metrics.emplace_back("rank_tail_ratio", diag.tail_ratio);
      for (Eigen::Index s = 0; s < diag.singular_values.size(); ++s) {
        metrics.emplace_back("sigma_" + std::to_string(s + 1),
                             diag.singular_values[s]);
      }
    }
    *out = report.release();
  });
}

void cm_report_free(cm_report* report) { delete report; }

size_t cm_report_size(const cm_report* report) {
  return report ? report->metrics.size() : 0;
}

cm_status cm_report_metric(const cm_report* report, size_t index,
                           const char** name, double* value) {
  return Guard([&] {
    Require(report != nullptr && name != nullptr && value != nullptr,
            "null argument");
    Require(index < report->metrics.size(), "metric index out of range");
    *name = report->metrics[index].first.c_str();
    *value = report->metrics[index].second;
  });
}

cm_status cm_report_find(const cm_report* report, const char* name,
                         double* value) {
  return Guard([&] {
    Require(report != nullptr && name != nullptr && value != nullptr,
            "null argument");
    for (const auto& [key, v] : report->metrics) {
      if (key == name) {
        *value = v;
        return;
      }
    }
    throw consmatch::Error(consmatch::ErrorCode::kInvalidArgument,
                           std::string("no metric named ") + name);
  });
}

// ---- Reconstruction

cm_status cm_reconstruct(const cm_problem* problem, const cm_labeling* labeling,
                         cm_reconstruction** out) {
  return Guard([&] {
    Require(problem != nullptr && labeling != nullptr && out != nullptr,
            "null argument");
    *out = nullptr;
    const auto& x = labeling->labeling;
    std::vector<int> sizes;
    for (const auto& f : problem->doc.features) sizes.push_back(f.size());
    x.check(consmatch::BlockLayout(sizes));
    const auto coords = consmatch::raw_coordinates(problem->doc.features);
    auto r = std::make_unique<cm_reconstruction>();
    r->result = consmatch::affine_factorize(consmatch::measurement_matrix(x, coords));
    *out = r.release();
  });
}

void cm_reconstruction_free(cm_reconstruction* reconstruction) {
  delete reconstruction;
}

double cm_reconstruction_rms(const cm_reconstruction* r) {
  return r ? r->result.reprojection_rms : 0.0;
}

int cm_reconstruction_degenerate(const cm_reconstruction* r) {
  return r && r->result.degenerate ? 1 : 0;
}

int cm_reconstruction_num_points(const cm_reconstruction* r) {
  return r ? static_cast<int>(r->result.shape.cols()) : 0;
}

cm_status cm_reconstruction_point(const cm_reconstruction* r, int label,
                                  double xyz[3]) {
  return Guard([&] {
    Require(r != nullptr && xyz != nullptr, "null argument");
    Require(label >= 0 && label < r->result.shape.cols(), "label out of range");
    for (int d = 0; d < 3; ++d) xyz[d] = r->result.shape(d, label);
  });
}

cm_status cm_reconstruction_write_points(const cm_reconstruction* r,
                                         const char* path) {
  return Guard([&] {
    Require(r != nullptr && path != nullptr, "null argument");
    WriteFile(path, [&](std::ostream& os) {
      consmatch::write_point_cloud(os, r->result.shape);
    });
  });
}

}  // extern "C"
