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

// C interface to the consmatch library. All objects are opaque handles
// created by the library and released with the matching *_free function
// (which accepts NULL). Functions returning cm_status leave a description of
// the failure in cm_last_error() on the calling thread.

#ifndef CONSMATCH_CONSMATCH_H_
#define CONSMATCH_CONSMATCH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CONSMATCH_API __declspec(dllexport)
#else
#define CONSMATCH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cm_status {
  CM_OK = 0,
  CM_ERR_INVALID_ARGUMENT = 1,
  CM_ERR_DIMENSION_MISMATCH = 2,
  CM_ERR_INFEASIBLE_K = 3,
  CM_ERR_NON_FINITE = 4,
  CM_ERR_INVALID_VALUE = 5,
  CM_ERR_INFEASIBLE = 6,
  CM_ERR_INSTANCE_TOO_LARGE = 7,
  CM_ERR_DEGENERATE = 8,
  CM_ERR_K_TOO_SMALL = 9,
  CM_ERR_INDEX_MISMATCH = 10,
  CM_ERR_PARSE = 11,
  CM_ERR_IO = 12,
  CM_ERR_INTERNAL = 13
} cm_status;

typedef struct cm_problem cm_problem;
typedef struct cm_truth cm_truth;
typedef struct cm_config cm_config;
typedef struct cm_result cm_result;
typedef struct cm_labeling cm_labeling;
typedef struct cm_report cm_report;
typedef struct cm_reconstruction cm_reconstruction;

CONSMATCH_API const char* cm_version(void);
CONSMATCH_API const char* cm_status_name(cm_status status);
// Message of the most recent failure on this thread; "" if none.
CONSMATCH_API const char* cm_last_error(void);

// ---- Problems --------------------------------------------------------------

CONSMATCH_API cm_status cm_problem_read(const char* path, cm_problem** out);
CONSMATCH_API cm_status cm_problem_write(const cm_problem* problem,
                                         const char* path);
CONSMATCH_API void cm_problem_free(cm_problem* problem);
CONSMATCH_API int cm_problem_num_images(const cm_problem* problem);
// Candidate count p_i, or -1 for an invalid image index.
CONSMATCH_API int cm_problem_num_candidates(const cm_problem* problem,
                                            int image);
// Replaces every score block with linear matching of the stored descriptors.
CONSMATCH_API cm_status cm_problem_match_descriptors(cm_problem* problem,
                                                     int threads);

// ---- Ground truth ----------------------------------------------------------

CONSMATCH_API cm_status cm_truth_read(const char* path, cm_truth** out);
CONSMATCH_API cm_status cm_truth_write(const cm_truth* truth,
                                       const char* path);
CONSMATCH_API void cm_truth_free(cm_truth* truth);

// ---- Synthetic instances ---------------------------------------------------

typedef struct cm_synth_params {
  int num_images;
  int universe;
  int outliers_per_image;
  double coord_noise_sigma;
  double match_corruption_rate;
  uint64_t seed;
  int descriptor_dim;       // 0: no descriptors
  double descriptor_noise;
  int match_descriptors;    // nonzero: scores from descriptor matching
} cm_synth_params;

CONSMATCH_API void cm_synth_params_default(cm_synth_params* params);
// The generated problem carries k = universe as its solver default.
CONSMATCH_API cm_status cm_synth_generate(const cm_synth_params* params,
                                          cm_problem** problem,
                                          cm_truth** truth);

// ---- Solver configuration --------------------------------------------------

// Starts from lambda = 1, rank 4, rho = (1, 10, 100) and k unset.
CONSMATCH_API cm_status cm_config_create(cm_config** out);
CONSMATCH_API void cm_config_free(cm_config* config);
// Copies the solver section of a problem file into the configuration.
CONSMATCH_API cm_status cm_config_apply_problem_defaults(
    cm_config* config, const cm_problem* problem);
CONSMATCH_API cm_status cm_config_set_k(cm_config* config, int k);
CONSMATCH_API cm_status cm_config_set_rank(cm_config* config, int rank);
CONSMATCH_API cm_status cm_config_set_lambda(cm_config* config, double lambda);
CONSMATCH_API cm_status cm_config_set_rho_schedule(cm_config* config,
                                                   const double* values,
                                                   size_t count);
CONSMATCH_API cm_status cm_config_set_seed(cm_config* config, uint64_t seed);
CONSMATCH_API cm_status cm_config_set_threads(cm_config* config, int threads);
CONSMATCH_API cm_status cm_config_set_max_outer_sweeps(cm_config* config,
                                                       int sweeps);
CONSMATCH_API int cm_config_k(const cm_config* config);

// ---- Solving ---------------------------------------------------------------

typedef struct cm_trace_record {
  int stage;  // index into the rho schedule, -1 during initialization
  int iteration;
  double rho;
  double cycle;
  double geo;
  double coupling;
  double total;
} cm_trace_record;

CONSMATCH_API cm_status cm_solve(const cm_problem* problem,
                                 const cm_config* config, cm_result** out);
CONSMATCH_API void cm_result_free(cm_result* result);
CONSMATCH_API int cm_result_max_sweeps_exceeded(const cm_result* result);
CONSMATCH_API double cm_result_objective(const cm_result* result);
CONSMATCH_API size_t cm_result_trace_length(const cm_result* result);
CONSMATCH_API cm_status cm_result_trace_record(const cm_result* result,
                                               size_t index,
                                               cm_trace_record* out);
CONSMATCH_API cm_status cm_result_write_trace(const cm_result* result,
                                              const char* path);
CONSMATCH_API cm_status cm_result_labeling(const cm_result* result,
                                           cm_labeling** out);

// ---- Labelings -------------------------------------------------------------

CONSMATCH_API cm_status cm_labeling_read(const char* path, cm_labeling** out);
// `problem` may be NULL; it only supplies image ids.
CONSMATCH_API cm_status cm_labeling_write(const cm_labeling* labeling,
                                          const cm_problem* problem,
                                          const char* path);
CONSMATCH_API void cm_labeling_free(cm_labeling* labeling);
CONSMATCH_API int cm_labeling_k(const cm_labeling* labeling);
CONSMATCH_API int cm_labeling_num_images(const cm_labeling* labeling);
// Candidate index carrying `label` in `image`, or -1 when out of range.
CONSMATCH_API int cm_labeling_candidate(const cm_labeling* labeling, int image,
                                        int label);

// ---- Evaluation ------------------------------------------------------------

// Metrics of a labeling against ground truth: recall, precision,
// precision_vacuous, pair counts, inlier_fraction and cycle_violation. With a
// problem it adds input_recall, input_precision, rank_tail_ratio and the
// singular values sigma_1, sigma_2, ... of the measurement matrix.
CONSMATCH_API cm_status cm_evaluate(const cm_labeling* labeling,
                                    const cm_truth* truth,
                                    const cm_problem* problem, int rank,
                                    cm_report** out);
CONSMATCH_API void cm_report_free(cm_report* report);
CONSMATCH_API size_t cm_report_size(const cm_report* report);
// The name pointer stays valid until the report is freed.
CONSMATCH_API cm_status cm_report_metric(const cm_report* report, size_t index,
                                         const char** name, double* value);
CONSMATCH_API cm_status cm_report_find(const cm_report* report,
                                       const char* name, double* value);

// ---- Reconstruction --------------------------------------------------------

// Affine factorization of the labeling's measurement matrix in pixel
// coordinates. Fails with CM_ERR_K_TOO_SMALL when k < 4.
CONSMATCH_API cm_status cm_reconstruct(const cm_problem* problem,
                                       const cm_labeling* labeling,
                                       cm_reconstruction** out);
CONSMATCH_API void cm_reconstruction_free(cm_reconstruction* reconstruction);
CONSMATCH_API double cm_reconstruction_rms(const cm_reconstruction* r);
CONSMATCH_API int cm_reconstruction_degenerate(const cm_reconstruction* r);
CONSMATCH_API int cm_reconstruction_num_points(const cm_reconstruction* r);
CONSMATCH_API cm_status cm_reconstruction_point(const cm_reconstruction* r,
                                                int label, double xyz[3]);
CONSMATCH_API cm_status cm_reconstruction_write_points(
    const cm_reconstruction* r, const char* path);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // CONSMATCH_CONSMATCH_H_
