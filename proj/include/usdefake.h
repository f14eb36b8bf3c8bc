// Copyright 2026 The usdefake Authors. All Rights Reserved.
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

/* C interface of the usdefake library. All objects are opaque handles
 * released with their *_free function; every fallible call returns a
 * udf_status and leaves a message for udf_last_error(). Strings returned
 * through char** are owned by the caller and released with
 * udf_string_free(). */

#ifndef USDEFAKE_H_
#define USDEFAKE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(USDEFAKE_BUILDING_LIBRARY)
#define USDEFAKE_API __attribute__((visibility("default")))
#else
#define USDEFAKE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the command-line exit codes. */
typedef enum udf_status {
  UDF_OK = 0,
  UDF_ERR_USAGE = 1,   /* invalid argument or configuration */
  UDF_ERR_DATA = 2,    /* missing or malformed input, dimension mismatch */
  UDF_ERR_NUMERIC = 3, /* non-finite loss or gradient */
  UDF_ERR_INTERNAL = 4
} udf_status;

typedef enum udf_variant {
  UDF_VARIANT_DEFAKE = 0,   /* news layer only */
  UDF_VARIANT_UDEFAKE = 1,  /* separately trained layers, fused at inference */
  UDF_VARIANT_USDEFAKE = 2  /* jointly trained with fusion */
} udf_variant;

typedef enum udf_log_level {
  UDF_LOG_DEBUG = 0,
  UDF_LOG_INFO = 1,
  UDF_LOG_WARN = 2,
  UDF_LOG_ERROR = 3
} udf_log_level;

USDEFAKE_API const char* udf_version(void);
/* Message of the most recent failure on the calling thread ("" if none). */
USDEFAKE_API const char* udf_last_error(void);
USDEFAKE_API const char* udf_status_string(udf_status status);
USDEFAKE_API void udf_string_free(char* s);

typedef void (*udf_log_fn)(udf_log_level level, const char* message, void* user_data);
/* NULL restores the default stderr sink. */
USDEFAKE_API void udf_set_log_callback(udf_log_fn fn, void* user_data);
USDEFAKE_API void udf_set_log_level(udf_log_level level);

USDEFAKE_API udf_status udf_variant_parse(const char* name, udf_variant* out);
USDEFAKE_API const char* udf_variant_name(udf_variant variant);

/* Training, sampling and evaluation settings. */
typedef struct udf_config {
  uint64_t seed;
  udf_variant variant;
  size_t roots;               /* random-walk roots per layer */
  size_t depth;               /* walk length */
  size_t subgraphs_per_epoch;
  size_t presample_rounds;
  size_t threads;             /* presampling workers */
  size_t epochs;
  double lr;
  size_t hidden_dim;
  size_t layers;
  int fuse_before_final_layer;
  double train_fraction;
  double val_fraction;
  double test_fraction;
  size_t folds;
  double jaccard_threshold;
} udf_config;

USDEFAKE_API void udf_config_default(udf_config* config);
/* Applies a JSON object with optional sections "sampler", "train", "model",
 * "split" and key "jaccard_threshold". The seed and variant keys are
 * honoured as well. */
USDEFAKE_API udf_status udf_config_merge_json(udf_config* config, const char* json);
USDEFAKE_API udf_status udf_config_to_json(const udf_config* config, char** json_out);

/* Synthetic dataset generation. `overrides_json` may be NULL; `seed` always
 * wins over a seed inside the JSON. */
USDEFAKE_API udf_status udf_synth_generate(const char* dir, const char* overrides_json, uint64_t seed);
USDEFAKE_API udf_status udf_synth_default_json(char** json_out);

typedef struct udf_dataset udf_dataset;

typedef struct udf_dataset_info {
  size_t news_nodes;
  size_t user_nodes;
  size_t source_news;
  size_t real_sources;
  size_t fake_sources;
  size_t news_edges;  /* T-T */
  size_t inter_edges; /* U-T */
  size_t user_edges;  /* U-U */
  size_t news_attr_dim;
  size_t user_attr_dim;
} udf_dataset_info;

USDEFAKE_API udf_status udf_dataset_open(const char* dir, udf_dataset** out);
USDEFAKE_API void udf_dataset_free(udf_dataset* dataset);
USDEFAKE_API udf_status udf_dataset_info_get(const udf_dataset* dataset, udf_dataset_info* out);

/* Inclusion probabilities of the (Jaccard-filtered) dataset graph. */
typedef struct udf_probabilities udf_probabilities;

typedef struct udf_probabilities_info {
  size_t rounds;
  double news_min, news_mean; /* node inclusion probabilities */
  double user_min, user_mean;
  int from_cache;
} udf_probabilities_info;

/* Loads `cache_path` when it matches the graph and configuration, otherwise
 * estimates and (when cache_path is not NULL) writes it. */
USDEFAKE_API udf_status udf_presample(const udf_dataset* dataset, const udf_config* config, const char* cache_path,
                                      udf_probabilities** out);
USDEFAKE_API void udf_probabilities_free(udf_probabilities* probabilities);
USDEFAKE_API udf_status udf_probabilities_info_get(const udf_probabilities* probabilities,
                                                   udf_probabilities_info* out);

/* Receives one JSON object per line of output (training-log records or
 * per-epoch progress). */
typedef void (*udf_line_fn)(const char* json_line, void* user_data);

typedef struct udf_model udf_model;

/* Trains fold `fold` and keeps the state of the epoch with the best
 * validation accuracy. `probabilities` may be NULL (estimated on the fly). */
USDEFAKE_API udf_status udf_train(const udf_dataset* dataset, const udf_config* config, size_t fold,
                                  const udf_probabilities* probabilities, udf_line_fn log_fn, void* user_data,
                                  udf_model** out);
USDEFAKE_API udf_status udf_model_save(const udf_model* model, const char* path);
USDEFAKE_API udf_status udf_model_load(const char* path, udf_model** out);
/* Header of the model: configuration, fold, selected epoch, loss history. */
USDEFAKE_API udf_status udf_model_info_json(const udf_model* model, char** json_out);
USDEFAKE_API void udf_model_free(udf_model* model);

typedef struct udf_report udf_report;

typedef struct udf_summary {
  const char* variant; /* valid while the report lives */
  size_t folds;
  double acc_mean, acc_std;
  double pre_mean, pre_std;
  double rec_mean, rec_std;
  double f1_mean, f1_std;
} udf_summary;

typedef struct udf_fold_metrics {
  size_t fold;
  size_t best_epoch;
  double best_val_accuracy;
  double accuracy, precision, recall, f1;
  size_t tp, fp, tn, fn;
  size_t epochs;
} udf_fold_metrics;

/* Test metrics of a trained model on the test split of its fold. The
 * dataset, Jaccard threshold and split settings come from `config`. */
USDEFAKE_API udf_status udf_evaluate(const udf_dataset* dataset, const udf_model* model, const udf_config* config,
                                     udf_report** out);

/* Runs every fold; `progress_fn` (may be NULL) gets one JSON line per epoch. */
USDEFAKE_API udf_status udf_experiment(const udf_dataset* dataset, const udf_config* config,
                                       const udf_probabilities* probabilities, udf_line_fn progress_fn,
                                       void* user_data, udf_report** out);

USDEFAKE_API udf_status udf_report_json(const udf_report* report, char** json_out);
USDEFAKE_API udf_status udf_report_table(const udf_report* report, char** text_out);
USDEFAKE_API udf_status udf_report_summary(const udf_report* report, udf_summary* out);
USDEFAKE_API udf_status udf_report_fold(const udf_report* report, size_t index, udf_fold_metrics* out);
/* Mean total loss of epoch `epoch` (0-based) in fold `index`. */
USDEFAKE_API udf_status udf_report_epoch_loss(const udf_report* report, size_t index, size_t epoch, double* out);
USDEFAKE_API void udf_report_free(udf_report* report);

typedef struct udf_gradcheck_result {
  double max_relative_error;
  size_t coordinates;
  double loss;
  double elapsed_seconds;
} udf_gradcheck_result;

/* 64-bit finite-difference check of the full training loss on a random dual
 * graph (news_nodes x user_nodes, attribute and hidden size `dim`, two GCN
 * layers). */
USDEFAKE_API udf_status udf_gradcheck(uint64_t seed, udf_variant variant, size_t news_nodes, size_t user_nodes,
                                      size_t dim, udf_gradcheck_result* out);

#ifdef __cplusplus
}
#endif

#endif /* USDEFAKE_H_ */
