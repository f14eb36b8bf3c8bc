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

/* Exercises the public C interface from C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "usdefake.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__,    \
              __LINE__, #cond);                                       \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define EXPECT_OK(expr)                                                         \
  do {                                                                          \
    udf_status st_ = (expr);                                                    \
    if (st_ != UDF_OK) {                                                        \
      fprintf(stderr, "%s:%d: %s -> %s (%s)\n", __FILE__, __LINE__, #expr,      \
              udf_status_string(st_), udf_last_error());                        \
      ++failures;                                                               \
    }                                                                           \
  } while (0)

static size_t lines_seen = 0;
static void count_lines(const char* line, void* user_data) {
  (void)user_data;
  if (line && line[0] == '{') ++lines_seen;
}

static size_t warnings = 0;
static void log_sink(udf_log_level level, const char* message, void* user_data) {
  (void)message;
  (void)user_data;
  if (level >= UDF_LOG_WARN) ++warnings;
}

static void test_basics(void) {
  udf_variant v;
  char* json = NULL;
  udf_config cfg;

  EXPECT(strlen(udf_version()) > 0);
  EXPECT_OK(udf_variant_parse("us-defake", &v));
  EXPECT(v == UDF_VARIANT_USDEFAKE);
  EXPECT(strcmp(udf_variant_name(UDF_VARIANT_DEFAKE), "defake") == 0);
  EXPECT(udf_variant_parse("bogus", &v) == UDF_ERR_USAGE);
  EXPECT(strlen(udf_last_error()) > 0);
  EXPECT(udf_variant_parse(NULL, &v) == UDF_ERR_USAGE);

  udf_config_default(&cfg);
  EXPECT(cfg.epochs == 30);
  EXPECT(cfg.hidden_dim == 512);
  EXPECT(cfg.folds == 5);
  EXPECT(fabs(cfg.lr - 0.01) < 1e-15);
  EXPECT(cfg.variant == UDF_VARIANT_USDEFAKE);

  EXPECT_OK(udf_config_merge_json(&cfg, "{\"train\": {\"epochs\": 4}, \"seed\": 9, \"variant\": \"udefake\"}"));
  EXPECT(cfg.epochs == 4);
  EXPECT(cfg.seed == 9);
  EXPECT(cfg.variant == UDF_VARIANT_UDEFAKE);
  EXPECT(udf_config_merge_json(&cfg, "{\"train\": {\"epochz\": 4}}") == UDF_ERR_USAGE);
  EXPECT(udf_config_merge_json(&cfg, "{not json") == UDF_ERR_USAGE);
  EXPECT(cfg.epochs == 4);

  EXPECT_OK(udf_config_to_json(&cfg, &json));
  EXPECT(json && strstr(json, "\"epochs\"") != NULL);
  {
    udf_config back;
    udf_config_default(&back);
    EXPECT_OK(udf_config_merge_json(&back, json));
    EXPECT(back.epochs == 4);
    EXPECT(back.seed == 9);
    EXPECT(back.variant == UDF_VARIANT_UDEFAKE);
  }
  udf_string_free(json);

  EXPECT_OK(udf_synth_default_json(&json));
  EXPECT(json && strstr(json, "n_source_news") != NULL);
  udf_string_free(json);
}

static void test_errors(void) {
  udf_dataset* ds = NULL;
  EXPECT(udf_dataset_open("/nonexistent/usdefake", &ds) == UDF_ERR_DATA);
  EXPECT(ds == NULL);
  EXPECT(strstr(udf_last_error(), "nonexistent") != NULL);
  EXPECT(udf_dataset_open(NULL, &ds) == UDF_ERR_USAGE);
  EXPECT(udf_synth_generate("/tmp/usdefake_capi_bad", "{\"n_users\": 0}", 1) == UDF_ERR_USAGE);
  EXPECT(strcmp(udf_status_string(UDF_ERR_NUMERIC), udf_status_string(UDF_OK)) != 0);
}

static void test_pipeline(const char* dir) {
  udf_dataset* ds = NULL;
  udf_dataset_info info;
  udf_config cfg;
  udf_probabilities* probs = NULL;
  udf_probabilities* cached = NULL;
  udf_probabilities_info pinfo;
  udf_model* model = NULL;
  udf_model* loaded = NULL;
  udf_report* report = NULL;
  udf_report* eval = NULL;
  udf_summary sum;
  udf_fold_metrics fm;
  char cache[512], ckpt[512];
  char* json = NULL;
  double loss = 0.0;

  EXPECT_OK(udf_synth_generate(dir,
                               "{\"n_source_news\": 80, \"n_fake_source_news\": 40, \"n_users\": 60,"
                               " \"n_credible_users\": 30, \"attr_dim_news\": 6, \"attr_dim_user\": 6}",
                               4));
  EXPECT_OK(udf_dataset_open(dir, &ds));
  if (!ds) return;
  EXPECT_OK(udf_dataset_info_get(ds, &info));
  EXPECT(info.source_news == 80);
  EXPECT(info.real_sources == 40 && info.fake_sources == 40);
  EXPECT(info.user_nodes == 60);
  EXPECT(info.news_attr_dim == 6);
  EXPECT(info.inter_edges == info.news_nodes - 80);

  udf_config_default(&cfg);
  cfg.roots = 30;
  cfg.presample_rounds = 100;
  cfg.hidden_dim = 8;
  cfg.epochs = 3;
  cfg.folds = 2;

  snprintf(cache, sizeof cache, "%s/probabilities.bin", dir);
  remove(cache); /* left over from an earlier run */
  EXPECT_OK(udf_presample(ds, &cfg, cache, &probs));
  EXPECT_OK(udf_probabilities_info_get(probs, &pinfo));
  EXPECT(pinfo.rounds == 100);
  EXPECT(!pinfo.from_cache);
  EXPECT(pinfo.news_min > 0.0 && pinfo.news_mean <= 1.0);
  EXPECT_OK(udf_presample(ds, &cfg, cache, &cached));
  EXPECT_OK(udf_probabilities_info_get(cached, &pinfo));
  EXPECT(pinfo.from_cache);
  udf_probabilities_free(cached);

  lines_seen = 0;
  EXPECT_OK(udf_train(ds, &cfg, 1, probs, count_lines, NULL, &model));
  EXPECT(lines_seen == cfg.epochs * cfg.subgraphs_per_epoch);
  snprintf(ckpt, sizeof ckpt, "%s/model.ckpt", dir);
  EXPECT_OK(udf_model_save(model, ckpt));
  EXPECT_OK(udf_model_load(ckpt, &loaded));
  EXPECT_OK(udf_model_info_json(loaded, &json));
  EXPECT(json && strstr(json, "\"fold\"") != NULL);
  udf_string_free(json);

  EXPECT_OK(udf_evaluate(ds, loaded, &cfg, &eval));
  EXPECT_OK(udf_report_fold(eval, 0, &fm));
  EXPECT(fm.fold == 1);
  EXPECT(fm.tp + fm.fp + fm.tn + fm.fn == 16);
  EXPECT(fm.accuracy >= 0.0 && fm.accuracy <= 1.0);
  udf_report_free(eval);
  eval = NULL;
  {
    /* the same model gives the same metrics before and after the save */
    udf_fold_metrics a, b;
    udf_report* r1 = NULL;
    udf_report* r2 = NULL;
    EXPECT_OK(udf_evaluate(ds, model, &cfg, &r1));
    EXPECT_OK(udf_evaluate(ds, loaded, &cfg, &r2));
    EXPECT_OK(udf_report_fold(r1, 0, &a));
    EXPECT_OK(udf_report_fold(r2, 0, &b));
    EXPECT(a.accuracy == b.accuracy && a.tp == b.tp && a.fp == b.fp);
    udf_report_free(r1);
    udf_report_free(r2);
  }

  lines_seen = 0;
  EXPECT_OK(udf_experiment(ds, &cfg, probs, count_lines, NULL, &report));
  EXPECT(lines_seen == cfg.folds * cfg.epochs);
  EXPECT_OK(udf_report_summary(report, &sum));
  EXPECT(sum.folds == 2);
  EXPECT(strcmp(sum.variant, "us-defake") == 0);
  EXPECT(sum.acc_std >= 0.0);
  EXPECT_OK(udf_report_epoch_loss(report, 1, 2, &loss));
  EXPECT(loss > 0.0 && isfinite(loss));
  EXPECT(udf_report_epoch_loss(report, 1, 3, &loss) == UDF_ERR_USAGE);
  EXPECT(udf_report_fold(report, 2, &fm) == UDF_ERR_USAGE);
  EXPECT_OK(udf_report_table(report, &json));
  EXPECT(json && strstr(json, "+/-") != NULL);
  udf_string_free(json);
  EXPECT_OK(udf_report_json(report, &json));
  EXPECT(json && strstr(json, "\"folds\"") != NULL);
  udf_string_free(json);

  /* a model never matches a different dataset */
  {
    udf_dataset* other = NULL;
    char other_dir[512];
    snprintf(other_dir, sizeof other_dir, "%s_other", dir);
    EXPECT_OK(udf_synth_generate(other_dir,
                                 "{\"n_source_news\": 80, \"n_fake_source_news\": 40, \"n_users\": 60,"
                                 " \"n_credible_users\": 30, \"attr_dim_news\": 6, \"attr_dim_user\": 6}",
                                 5));
    EXPECT_OK(udf_dataset_open(other_dir, &other));
    EXPECT(udf_evaluate(other, model, &cfg, &eval) == UDF_ERR_DATA);
    udf_dataset_free(other);
  }

  udf_report_free(report);
  udf_model_free(model);
  udf_model_free(loaded);
  udf_probabilities_free(probs);
  udf_dataset_free(ds);
}

static void test_gradcheck(void) {
  udf_gradcheck_result r;
  EXPECT_OK(udf_gradcheck(1, UDF_VARIANT_USDEFAKE, 10, 8, 6, &r));
  EXPECT(r.max_relative_error < 1e-5);
  EXPECT(r.coordinates > 0);
  EXPECT(udf_gradcheck(1, UDF_VARIANT_USDEFAKE, 0, 8, 6, &r) == UDF_ERR_USAGE);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "/tmp/usdefake_capi_test";
  udf_set_log_callback(log_sink, NULL);
  udf_set_log_level(UDF_LOG_WARN);
  test_basics();
  test_errors();
  test_pipeline(dir);
  test_gradcheck();
  udf_set_log_callback(NULL, NULL);
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("c api: all expectations met\n");
  return 0;
}
