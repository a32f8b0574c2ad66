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

#include <string>
#include <string_view>

#include "json.hpp"
#include "tlslab/analysis.hpp"
#include "tlslab/model.hpp"
#include "tlslab/noise.hpp"
#include "tlslab/protocols.hpp"
#include "tlslab/solver.hpp"
#include "tlslab/tomography.hpp"

namespace tlslab {

using Json = nlohmann::json;

// Typed access to a JSON object that reports failures as Error(Schema) carrying the
// dotted field path, e.g. "device.gamma1_q1".
class JsonReader {
 public:
  JsonReader(const Json& node, std::string path);

  const std::string& path() const { return path_; }
  std::string child_path(std::string_view key) const;
  bool has(std::string_view key) const;
  const Json& at(std::string_view key) const;

  double number(std::string_view key) const;
  double number(std::string_view key, double fallback) const;
  std::uint64_t unsigned_integer(std::string_view key) const;
  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const;
  int integer(std::string_view key, int fallback) const;
  bool boolean(std::string_view key, bool fallback) const;
  std::string string(std::string_view key) const;
  std::string string(std::string_view key, std::string_view fallback) const;
  std::vector<double> numbers(std::string_view key) const;
  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const;

  // Throws on any key that was never looked up.
  void reject_unknown() const;

 private:
  const Json& node_;
  std::string path_;
  mutable std::vector<std::string> seen_;
};

[[noreturn]] void schema_error(const std::string& path, const std::string& message);

Json to_json(const DeviceParams& p);
DeviceParams device_from_json(const Json& j, const std::string& path = "device");

Json to_json(const NoiseModel& m);
NoiseModel noise_from_json(const Json& j, const std::string& path = "noise");

Json to_json(const PulseSchedule& s);
PulseSchedule schedule_from_json(const Json& j, const std::string& path = "schedule");

Json to_json(const Eigen::MatrixXcd& m);  // {"real": [[...]], "imag": [[...]]}
Eigen::MatrixXcd complex_matrix_from_json(const Json& j, const std::string& path = "matrix");

Json to_json(const FitResult& f);
Json to_json(const TomoResult& t);
Json to_json(const ProcessMatrix& p);
Json to_json(const SimResult& r);
Json to_json(const SpectrumEstimate& s);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// CSV writers: '#'-prefixed metadata lines, one header row, then data.
std::string sim_result_csv(const SimResult& r);
std::string sweep_csv(const SweepResult2D& s);  // long format: y, x, z
std::string spectrum_csv(const SpectrumEstimate& s);
SpectrumEstimate spectrum_from_csv(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

std::string sha256_hex(std::string_view data);

}  // namespace tlslab
