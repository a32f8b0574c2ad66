// Copyright 2026 The tlslab Authors
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


#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tlslab/tlslab.h"

static int failures = 0;

#define EXPECT(cond)                                            \
  do {                                                          \
    if (!(cond)) {                                              \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                               \
    }                                                           \
  } while (0)

static const char* kConfig =
    "{\"pipeline\": \"fig4-gate-scan\", \"seed\": 2,"
    " \"params\": {\"delta_hz\": [-1e8, 0, 1e8], \"g_eff_hz\": [1e6], \"couplings\": [\"one\"]}}";

int main(int argc, char** argv) {
  const char* out_dir = argc > 1 ? argv[1] : "capi_out";
  tlslab_config* cfg = NULL;
  char hash[65];
  const char* name = NULL;
  char* report = NULL;
  double g = 0.0, err = 0.0, err_both = 0.0;
  size_t i;

  EXPECT(strlen(tlslab_version()) > 0);
  EXPECT(tlslab_pipeline_count() == 7);
  EXPECT(strcmp(tlslab_pipeline_name(0), "fig1b-double-swap") == 0);
  EXPECT(tlslab_pipeline_name(99) == NULL);
  for (i = 0; i < tlslab_pipeline_count(); ++i) EXPECT(strlen(tlslab_pipeline_summary(i)) > 0);

  EXPECT(tlslab_config_parse(NULL, &cfg) == TLSLAB_INVALID_ARGUMENT);
  EXPECT(tlslab_config_parse("{\"pipeline\": \"fig4-zeno\"}", &cfg) == TLSLAB_SCHEMA);
  EXPECT(strcmp(tlslab_last_error_context(), "seed") == 0);
  EXPECT(cfg == NULL);
  EXPECT(tlslab_config_parse("{not json", &cfg) == TLSLAB_SCHEMA);
  EXPECT(tlslab_config_load("/nonexistent/cfg.json", &cfg) == TLSLAB_IO);

  EXPECT(tlslab_config_parse(kConfig, &cfg) == TLSLAB_OK);
  EXPECT(tlslab_config_pipeline(cfg, &name) == TLSLAB_OK && strcmp(name, "fig4-gate-scan") == 0);
  EXPECT(tlslab_config_output_dir(cfg, &name) == TLSLAB_OK && strcmp(name, "") == 0);
  EXPECT(tlslab_config_hash(cfg, hash) == TLSLAB_OK && strlen(hash) == 64);
  EXPECT(tlslab_config_check(cfg) == TLSLAB_OK);
  EXPECT(tlslab_config_set_trajectories(cfg, 0) == TLSLAB_SCHEMA);
  EXPECT(tlslab_config_set_seed(cfg, 5) == TLSLAB_OK);
  {
    char changed[65];
    EXPECT(tlslab_config_hash(cfg, changed) == TLSLAB_OK && strcmp(changed, hash) != 0);
  }
  tlslab_set_thread_limit(2);
  EXPECT(tlslab_thread_limit() == 2);
  EXPECT(tlslab_run(cfg, out_dir) == TLSLAB_OK);
  tlslab_set_thread_limit(0);
  tlslab_config_free(cfg);
  tlslab_config_free(NULL);

  {
    char path[4096];
    FILE* f;
    snprintf(path, sizeof path, "%s/manifest.json", out_dir);
    f = fopen(path, "r");
    EXPECT(f != NULL);
    if (f) fclose(f);
  }

  EXPECT(tlslab_validate_file("/nonexistent/cfg.json", &report) == TLSLAB_IO);
  {
    char path[4096];
    FILE* f;
    snprintf(path, sizeof path, "%s/bad.json", out_dir);
    f = fopen(path, "w");
    EXPECT(f != NULL);
    if (f) {
      fputs("{\"pipeline\": \"fig4-zeno\", \"seed\": 1, \"device\": {\"gamma1_tls\": -1}}", f);
      fclose(f);
    }
    EXPECT(tlslab_validate_file(path, &report) == TLSLAB_OK);
    EXPECT(report != NULL && strstr(report, "device.gamma1_tls") != NULL);
    tlslab_string_free(report);
    report = NULL;
  }

  EXPECT(tlslab_effective_coupling(3.68e9, 4.48e9, 3.48e9, 70e6, 30e6, &g) == TLSLAB_OK);
  EXPECT(fabs(g) > 1e5 && fabs(g) < 30e6);
  EXPECT(tlslab_effective_coupling(3.68e9, 4.48e9, 3.48e9, -1.0, 30e6, &g) == TLSLAB_INVALID_ARGUMENT);
  EXPECT(tlslab_effective_coupling(3.68e9, 4.48e9, 3.48e9, 70e6, 30e6, NULL) == TLSLAB_INVALID_ARGUMENT);

  EXPECT(tlslab_iswap_gate_error(50e6, 0.0, 0, 60e-9, 0.0, 0.0, &err) == TLSLAB_OK);
  EXPECT(err < 1e-9);
  EXPECT(tlslab_iswap_gate_error(50e6, 3e6, 0, 60e-9, 1.0 / 44.7e-6, 1.0 / 1.1e-6, &err) == TLSLAB_OK);
  EXPECT(tlslab_iswap_gate_error(50e6, 3e6, 1, 60e-9, 1.0 / 44.7e-6, 1.0 / 1.1e-6, &err_both) == TLSLAB_OK);
  EXPECT(err > 0.0 && err_both >= err);
  EXPECT(tlslab_iswap_gate_error(50e6, 3e6, 0, -1.0, 0.0, 0.0, &err) == TLSLAB_INVALID_ARGUMENT);
  EXPECT(strlen(tlslab_last_error()) > 0);

  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
