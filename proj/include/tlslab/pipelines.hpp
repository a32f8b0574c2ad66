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


#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlslab/io.hpp"

namespace tlslab {

// One runnable experiment. JSON form:
//   {"pipeline": "...", "seed": N, "trajectories": N, "device": {...}, "noise": {...},
//    "params": {...}, "output_dir": "..."}
// device, noise, params, trajectories and output_dir are optional; seed is required.
struct ExperimentConfig {
  std::string pipeline;
  std::uint64_t seed = 0;
  int trajectories = 1;
  DeviceParams device;
  std::optional<NoiseModel> noise;
  Json params = Json::object();
  std::string output_dir;
};

// Throws Error(Schema) whose context is the offending field path.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

// Canonical form with defaults filled in; output_dir is left out so the hash names the
// experiment rather than where its results went.
Json to_json(const ExperimentConfig& c);
std::string config_hash(const ExperimentConfig& c);

// Parses the pipeline's parameter block without running anything. Throws Error(Schema).
void check_config(const ExperimentConfig& c);

// "field.path: message" entries; empty when the config is valid.
std::vector<std::string> validate_config_file(const std::string& path);

struct PipelineInfo {
  std::string_view name;
  std::string_view summary;
};

// Stable order.
std::span<const PipelineInfo> list_pipelines();

struct RunSummary {
  std::string config_sha256;
  std::vector<std::string> artifacts;  // file names relative to the output directory
};

// Runs the pipeline and writes its CSV/JSON artifacts plus manifest.json into out_dir
// (created if needed). Identical configs produce byte-identical files.
RunSummary run_pipeline(const ExperimentConfig& c, const std::string& out_dir);

}  // namespace tlslab
