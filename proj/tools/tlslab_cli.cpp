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


#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tlslab/tlslab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSchema = 2;
constexpr int kExitRun = 3;

int exit_code(tlslab_status s) {
  switch (s) {
    case TLSLAB_OK: return kExitOk;
    case TLSLAB_SCHEMA: return kExitSchema;
    case TLSLAB_IO:
    case TLSLAB_INVALID_ARGUMENT: return kExitUsage;
    default: return kExitRun;
  }
}

int report(tlslab_status s) {
  const std::string context = tlslab_last_error_context();
  std::cerr << "tlslab: error";
  if (!context.empty()) std::cerr << " [" << context << "]";
  std::cerr << ": " << tlslab_last_error() << "\n";
  return exit_code(s);
}

int run_command(const std::string& config_path, std::string out_dir, std::optional<std::uint64_t> seed,
                std::optional<int> trajectories) {
  tlslab_config* cfg = nullptr;
  tlslab_status s = tlslab_config_load(config_path.c_str(), &cfg);
  if (s != TLSLAB_OK) return report(s);
  if (seed) s = tlslab_config_set_seed(cfg, *seed);
  if (s == TLSLAB_OK && trajectories) s = tlslab_config_set_trajectories(cfg, *trajectories);
  if (s == TLSLAB_OK && out_dir.empty()) {
    const char* dir = "";
    tlslab_config_output_dir(cfg, &dir);
    out_dir = *dir ? dir : "tlslab_out";
  }
  if (s == TLSLAB_OK) s = tlslab_run(cfg, out_dir.c_str());
  char hash[65] = {};
  if (s == TLSLAB_OK) s = tlslab_config_hash(cfg, hash);
  const char* name = "";
  tlslab_config_pipeline(cfg, &name);
  const std::string pipeline = name;
  tlslab_config_free(cfg);
  if (s != TLSLAB_OK) return report(s);
  std::cout << pipeline << ": wrote " << out_dir << "/manifest.json (config " << hash << ")\n";
  return kExitOk;
}

int validate_command(const std::string& config_path) {
  char* text = nullptr;
  const tlslab_status s = tlslab_validate_file(config_path.c_str(), &text);
  if (s != TLSLAB_OK) return report(s);
  const std::string report_text = text;
  tlslab_string_free(text);
  if (report_text.empty()) {
    std::cout << config_path << ": ok\n";
    return kExitOk;
  }
  std::cerr << report_text;
  return kExitSchema;
}

int list_command() {
  for (std::size_t i = 0; i < tlslab_pipeline_count(); ++i) {
    std::cout << tlslab_pipeline_name(i) << "\t" << tlslab_pipeline_summary(i) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyse a TLS coupled to two transmons through a tunable coupler"};
  app.set_version_flag("--version", std::string(tlslab_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trajectories;

  auto* run = app.add_subcommand("run", "Execute a pipeline and write CSV/JSON artifacts with a manifest");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (default: config output_dir or ./tlslab_out)");
  run->add_option("--seed", seed, "Master seed, overrides the config");
  run->add_option("--trajectories", trajectories, "Trajectory count, overrides the config")
      ->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required();

  app.add_subcommand("list", "List pipelines with one-line summaries");
  app.footer("Environment: TLSLAB_THREADS caps worker threads.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (run->parsed()) return run_command(config_path, out_dir, seed, trajectories);
  if (validate->parsed()) return validate_command(config_path);
  return list_command();
}
