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


#ifndef TLSLAB_TLSLAB_H_
#define TLSLAB_TLSLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TLSLAB_BUILDING_LIBRARY)
#define TLSLAB_API __attribute__((visibility("default")))
#else
#define TLSLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tlslab_status {
  TLSLAB_OK = 0,
  TLSLAB_INVALID_ARGUMENT = 1,
  TLSLAB_SCHEMA = 2,
  TLSLAB_NUMERICAL = 3,
  TLSLAB_IO = 4,
  TLSLAB_INTERNAL = 5
} tlslab_status;

typedef struct tlslab_config tlslab_config;

// Message and context of the last failure on the calling thread. Valid until the next
// failing call on that thread.
TLSLAB_API const char* tlslab_last_error(void);
TLSLAB_API const char* tlslab_last_error_context(void);

TLSLAB_API const char* tlslab_version(void);

TLSLAB_API tlslab_status tlslab_config_load(const char* path, tlslab_config** out);
TLSLAB_API tlslab_status tlslab_config_parse(const char* json_text, tlslab_config** out);
TLSLAB_API void tlslab_config_free(tlslab_config* config);

TLSLAB_API tlslab_status tlslab_config_set_seed(tlslab_config* config, uint64_t seed);
TLSLAB_API tlslab_status tlslab_config_set_trajectories(tlslab_config* config, int trajectories);
TLSLAB_API tlslab_status tlslab_config_pipeline(const tlslab_config* config, const char** name);
// Output directory named in the config, or "" when absent.
TLSLAB_API tlslab_status tlslab_config_output_dir(const tlslab_config* config, const char** dir);
// SHA-256 of the canonical config, 64 hex characters plus NUL.
TLSLAB_API tlslab_status tlslab_config_hash(const tlslab_config* config, char out[65]);

// Checks the parameter block without running. TLSLAB_SCHEMA with the field path in the
// last error context when the config is invalid.
TLSLAB_API tlslab_status tlslab_config_check(const tlslab_config* config);

// Newline-separated "field.path: message" report; empty for a valid file. Read failures
// are returned as TLSLAB_IO. Release with tlslab_string_free.
TLSLAB_API tlslab_status tlslab_validate_file(const char* path, char** report);

// Runs the pipeline and writes artifacts plus manifest.json into out_dir.
TLSLAB_API tlslab_status tlslab_run(const tlslab_config* config, const char* out_dir);

TLSLAB_API size_t tlslab_pipeline_count(void);
TLSLAB_API const char* tlslab_pipeline_name(size_t index);
TLSLAB_API const char* tlslab_pipeline_summary(size_t index);

// 0 restores the default (hardware concurrency or TLSLAB_THREADS).
TLSLAB_API void tlslab_set_thread_limit(unsigned threads);
TLSLAB_API unsigned tlslab_thread_limit(void);

// Coupler-mediated qubit-TLS couplings (Hz) for the default device with the given
// frequencies overridden.
TLSLAB_API tlslab_status tlslab_effective_coupling(double f_q, double f_c, double f_tls, double g_q,
                                                   double g_t, double* g_eff_hz);

// Average-gate error of an iSWAP with a TLS at detuning delta_hz coupled to one or both
// qubits, for the default device.
TLSLAB_API tlslab_status tlslab_iswap_gate_error(double delta_hz, double g_eff_hz, int both_qubits,
                                                 double t_gate_s, double gamma1_tls,
                                                 double gamma_phi_tls, double* error);

TLSLAB_API void tlslab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif  // TLSLAB_TLSLAB_H_
