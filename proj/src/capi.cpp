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


#include "tlslab/tlslab.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "tlslab/experiments.hpp"
#include "tlslab/parallel.hpp"
#include "tlslab/pipelines.hpp"

struct tlslab_config {
  tlslab::ExperimentConfig config;
  std::string hash_scratch;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_context;

tlslab_status status_of(tlslab::ErrorKind kind) {
  switch (kind) {
    case tlslab::ErrorKind::InvalidArgument: return TLSLAB_INVALID_ARGUMENT;
    case tlslab::ErrorKind::Schema: return TLSLAB_SCHEMA;
    case tlslab::ErrorKind::Numerical: return TLSLAB_NUMERICAL;
    case tlslab::ErrorKind::Io: return TLSLAB_IO;
  }
  return TLSLAB_INTERNAL;
}

tlslab_status set_error(tlslab_status status, std::string context, std::string message) {
  last_context = std::move(context);
  last_error = std::move(message);
  return status;
}

template <typename F>
tlslab_status guarded(F&& body) {
  try {
    body();
    return TLSLAB_OK;
  } catch (const tlslab::Error& e) {
    return set_error(status_of(e.kind()), e.context(), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TLSLAB_INTERNAL, "", "out of memory");
  } catch (const std::exception& e) {
    return set_error(TLSLAB_INTERNAL, "", e.what());
  } catch (...) {
    return set_error(TLSLAB_INTERNAL, "", "unknown failure");
  }
}

tlslab_status null_argument(const char* name) {
  return set_error(TLSLAB_INVALID_ARGUMENT, name, std::string(name) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* tlslab_last_error(void) { return last_error.c_str(); }
const char* tlslab_last_error_context(void) { return last_context.c_str(); }
const char* tlslab_version(void) { return TLSLAB_VERSION; }

tlslab_status tlslab_config_load(const char* path, tlslab_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new tlslab_config{tlslab::load_config(path), {}}; });
}

tlslab_status tlslab_config_parse(const char* json_text, tlslab_config** out) {
  if (!json_text) return null_argument("json_text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    tlslab::Json j;
    try {
      j = tlslab::Json::parse(json_text);
    } catch (const tlslab::Json::parse_error& e) {
      tlslab::fail(tlslab::ErrorKind::Schema, "", std::string("malformed JSON: ") + e.what());
    }
    *out = new tlslab_config{tlslab::parse_config(j), {}};
  });
}

void tlslab_config_free(tlslab_config* config) { delete config; }

tlslab_status tlslab_config_set_seed(tlslab_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  config->config.seed = seed;
  return TLSLAB_OK;
}

tlslab_status tlslab_config_set_trajectories(tlslab_config* config, int trajectories) {
  if (!config) return null_argument("config");
  if (trajectories < 1) {
    return set_error(TLSLAB_SCHEMA, "trajectories", "trajectories: must be >= 1");
  }
  config->config.trajectories = trajectories;
  return TLSLAB_OK;
}

tlslab_status tlslab_config_pipeline(const tlslab_config* config, const char** name) {
  if (!config) return null_argument("config");
  if (!name) return null_argument("name");
  *name = config->config.pipeline.c_str();
  return TLSLAB_OK;
}

tlslab_status tlslab_config_output_dir(const tlslab_config* config, const char** dir) {
  if (!config) return null_argument("config");
  if (!dir) return null_argument("dir");
  *dir = config->config.output_dir.c_str();
  return TLSLAB_OK;
}

tlslab_status tlslab_config_hash(const tlslab_config* config, char out[65]) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    const std::string h = tlslab::config_hash(config->config);
    std::memcpy(out, h.c_str(), 65);
  });
}

tlslab_status tlslab_config_check(const tlslab_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { tlslab::check_config(config->config); });
}

tlslab_status tlslab_validate_file(const char* path, char** report) {
  if (!path) return null_argument("path");
  if (!report) return null_argument("report");
  *report = nullptr;
  return guarded([&] {
    std::string text;
    for (const auto& line : tlslab::validate_config_file(path)) text += line + "\n";
    *report = copy_string(text);
  });
}

tlslab_status tlslab_run(const tlslab_config* config, const char* out_dir) {
  if (!config) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] { tlslab::run_pipeline(config->config, out_dir); });
}

size_t tlslab_pipeline_count(void) { return tlslab::list_pipelines().size(); }

const char* tlslab_pipeline_name(size_t index) {
  const auto p = tlslab::list_pipelines();
  return index < p.size() ? p[index].name.data() : nullptr;
}

const char* tlslab_pipeline_summary(size_t index) {
  const auto p = tlslab::list_pipelines();
  return index < p.size() ? p[index].summary.data() : nullptr;
}

void tlslab_set_thread_limit(unsigned threads) { tlslab::set_thread_limit(static_cast<int>(threads)); }
unsigned tlslab_thread_limit(void) { return static_cast<unsigned>(tlslab::thread_limit()); }

tlslab_status tlslab_effective_coupling(double f_q, double f_c, double f_tls, double g_q, double g_t,
                                        double* g_eff_hz) {
  if (!g_eff_hz) return null_argument("g_eff_hz");
  return guarded([&] {
    tlslab::DeviceParams d;
    d.f_q1 = f_q;
    d.f_c = f_c;
    d.f_tls = f_tls;
    d.g1 = g_q;
    d.g_t = g_t;
    d.validate();
    *g_eff_hz = tlslab::effective_coupling(d).g_eff_1;
  });
}

tlslab_status tlslab_iswap_gate_error(double delta_hz, double g_eff_hz, int both_qubits, double t_gate_s,
                                      double gamma1_tls, double gamma_phi_tls, double* error) {
  if (!error) return null_argument("error");
  return guarded([&] {
    tlslab::GateSpec s;
    s.delta_hz = delta_hz;
    s.g_eff_hz = g_eff_hz;
    s.both_qubits = both_qubits != 0;
    s.t_gate = t_gate_s;
    s.gamma1_tls = gamma1_tls;
    s.gamma_phi_tls = gamma_phi_tls;
    *error = tlslab::iswap_gate_error(s);
  });
}

void tlslab_string_free(char* s) { delete[] s; }

}  // extern "C"
