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


#include <filesystem>
#include <string>

#include "doctest.h"
#include "tlslab/parallel.hpp"
#include "tlslab/pipelines.hpp"

using namespace tlslab;
namespace fs = std::filesystem;

namespace {

std::string schema_path(const Json& j) {
  try {
    check_config(parse_config(j));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Schema) return e.context();
    return "wrong kind: " + std::string(e.what());
  }
  return "no error";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tlslab_test_" + name);
  fs::remove_all(p);
  return p;
}

Json small_gate_scan() {
  return Json::parse(R"({
    "pipeline": "fig4-gate-scan", "seed": 3,
    "params": {"delta_hz": {"start": -200e6, "stop": 200e6, "count": 9}, "g_eff_hz": [1e6, 3e6],
               "couplings": ["one", "both"]}})");
}

Json small_coherence() {
  return Json::parse(R"({
    "pipeline": "fig1-coherence", "seed": 9, "trajectories": 24,
    "noise": {"fluctuators": [{"a_hz": 3e5, "gamma_hz": 2e4, "p_up": 0.5}], "quasi_static_sigma_hz": 1e5},
    "params": {"rabi_s": {"start": 0, "stop": 2e-7, "count": 11}, "t1_s": {"start": 0, "stop": 1e-4, "count": 11},
               "ramsey_s": {"start": 0, "stop": 1e-6, "count": 11}, "echo_s": {"start": 0, "stop": 2e-6, "count": 11},
               "cpmg_pulses": [2], "cpmg_s": {"start": 0, "stop": 2e-6, "count": 11}}})");
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_text_file(e.path().string());
  return out;
}

}  // namespace

TEST_SUITE("pipelines") {

TEST_CASE("pipeline listing is stable and every pipeline has a bundled config") {
  const auto list = list_pipelines();
  std::vector<std::string> names;
  for (const auto& p : list) names.emplace_back(p.name);
  const std::vector<std::string> expected{"fig1b-double-swap", "fig1-coherence", "fig2-chevron", "fig3-psd",
                                          "fig4-tomo",         "fig4-gate-scan", "fig4-zeno"};
  CHECK(names == expected);
  for (const auto& p : list) {
    CHECK_FALSE(p.summary.empty());
    const fs::path cfg = fs::path(TLSLAB_SOURCE_DIR) / "configs" / (std::string(p.name) + ".json");
    REQUIRE(fs::exists(cfg));
    CHECK(validate_config_file(cfg.string()).empty());
    CHECK(load_config(cfg.string()).pipeline == p.name);
  }
}

TEST_CASE("config schema violations carry field paths") {
  Json j = small_gate_scan();
  CHECK(schema_path(j) == "no error");
  Json no_seed = j;
  no_seed.erase("seed");
  CHECK(schema_path(no_seed) == "seed");
  Json neg = j;
  neg["device"] = {{"gamma1_tls", -5.0}};
  CHECK(schema_path(neg) == "device.gamma1_tls");
  Json unknown = j;
  unknown["pipeline"] = "fig9";
  CHECK(schema_path(unknown) == "pipeline");
  Json traj = j;
  traj["trajectories"] = 0;
  CHECK(schema_path(traj) == "trajectories");
  Json extra = j;
  extra["colour"] = "blue";
  CHECK(schema_path(extra) == "colour");
  Json grid = j;
  grid["params"]["delta_hz"] = {3.0, 1.0, 2.0};
  CHECK(schema_path(grid) == "params.delta_hz");
  Json param = j;
  param["params"]["t_gate"] = 1.0;
  CHECK(schema_path(param) == "params.t_gate");
  Json noise = small_coherence();
  noise["noise"]["fluctuators"][0]["p_up"] = 2.0;
  CHECK(schema_path(noise) == "noise.fluctuators[0].p_up");
}

TEST_CASE("validate_config_file reports problems without throwing") {
  const fs::path dir = scratch("validate");
  fs::create_directories(dir);
  const fs::path bad = dir / "bad.json";
  write_text_file(bad.string(), "{\"pipeline\": \"fig4-zeno\"");
  const auto report = validate_config_file(bad.string());
  CHECK(report.size() == 1);
  try {
    validate_config_file((dir / "missing.json").string());
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  fs::remove_all(dir);
}

TEST_CASE("config hash ignores the output directory and tracks content") {
  ExperimentConfig a = parse_config(small_gate_scan());
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  b.seed = 4;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(parse_config(to_json(a))) == config_hash(a));
}

TEST_CASE("run writes a complete manifest") {
  const fs::path dir = scratch("manifest");
  const ExperimentConfig c = parse_config(small_gate_scan());
  const RunSummary s = run_pipeline(c, dir.string());
  const Json m = Json::parse(read_text_file((dir / "manifest.json").string()));
  CHECK(m["pipeline"] == "fig4-gate-scan");
  CHECK(m["seed"] == 3);
  CHECK(m["config_sha256"] == s.config_sha256);
  CHECK(m["config_sha256"] == sha256_hex(to_json(c).dump()));
  for (const char* key : {"tlslab", "eigen", "fftw", "nlohmann_json"}) CHECK(m["versions"].contains(key));
  REQUIRE(m["artifacts"].size() >= 1);
  for (const auto& a : m["artifacts"]) {
    const std::string file = a["file"];
    CHECK(a["sha256"] == sha256_hex(read_text_file((dir / file).string())));
  }
  const std::string csv = read_text_file((dir / "gate_scan.csv").string());
  CHECK(csv.find("average_gate_fidelity") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("identical configs give bit-identical output for any thread count") {
  for (const Json& j : {small_gate_scan(), small_coherence()}) {
    const ExperimentConfig c = parse_config(j);
    std::vector<std::map<std::string, std::string>> runs;
    for (int threads : {1, 3, 1}) {
      set_thread_limit(threads);
      const fs::path dir = scratch("det_" + std::to_string(runs.size()));
      run_pipeline(c, dir.string());
      runs.push_back(read_dir(dir));
      fs::remove_all(dir);
    }
    set_thread_limit(0);
    CHECK(runs[0] == runs[1]);
    CHECK(runs[0] == runs[2]);
  }
}

TEST_CASE("seed changes stochastic output") {
  ExperimentConfig c = parse_config(small_coherence());
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  run_pipeline(c, a.string());
  c.seed += 1;
  run_pipeline(c, b.string());
  CHECK(read_text_file((a / "ramsey.csv").string()) != read_text_file((b / "ramsey.csv").string()));
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // TEST_SUITE
