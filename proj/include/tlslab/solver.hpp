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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tlslab/model.hpp"
#include "tlslab/noise.hpp"

namespace tlslab {

// Joint state of Q1 (most significant bit), Q2, coupler and TLS.
using DensityMatrix = Matrix16c;

// label is four '0'/'1' characters in Q1, Q2, C, TLS order, e.g. "1000".
DensityMatrix basis_state(std::string_view label);
DensityMatrix basis_state(int index);

// Hermitian to 1e-10 (relative), unit trace to 1e-9, eigenvalues >= -1e-8.
void validate_density(const DensityMatrix& rho, std::string_view context = "DensityMatrix");

double population(const DensityMatrix& rho, Element e);
double expectation(const DensityMatrix& rho, Element e, Axis axis);
// Partial trace over coupler and TLS; basis |Q1 Q2>.
Eigen::Matrix4cd reduce_to_qubits(const DensityMatrix& rho);

// exp(-i angle n.sigma/2) with n = (cos phase, sin phase, 0) for X, rotated by a further
// pi/2 for Y; phase is ignored for Z.
struct Rotation {
  Element element = Element::Tls;
  Axis axis = Axis::X;
  double angle_rad = 0.0;
  double phase_rad = 0.0;
};

struct Reset {
  Element element = Element::Tls;
};

struct Barrier {};

using Operation = std::variant<Rotation, Reset, Barrier>;

struct InstantOp {
  double time = 0.0;
  Operation op;
};

struct Segment {
  double duration = 0.0;
  // Absent entries fall back to the model frequency.
  std::array<std::optional<double>, kNumElements> freq_hz{};
  std::vector<DriveTerm> drives;
  // Elements whose frequency differs from the end of the previous segment ramp linearly
  // over the first rise_fall seconds.
  double rise_fall = 0.0;
};

struct PulseSchedule {
  std::vector<Segment> segments;
  std::vector<InstantOp> instant_ops;

  double span() const;
  void validate() const;

  // Builder helpers; both return *this.
  PulseSchedule& idle(double duration);
  PulseSchedule& add(Segment segment);
  PulseSchedule& at(double time, Operation op);
};

DensityMatrix apply_instant_op(const DensityMatrix& rho, const Operation& op);

struct Observable {
  std::string name;
  std::vector<double> values;
};

struct SimResult {
  std::vector<double> times;
  // p_q1, p_q2, p_c, p_tls followed by requested expectations (x_tls, ...).
  std::vector<Observable> observables;
  std::vector<DensityMatrix> rho_snapshots;
  std::uint64_t seed = 0;
  int n_trajectories = 1;
  std::vector<std::string> flags;

  const std::vector<double>& observable(std::string_view name) const;
};

struct PropagateOptions {
  std::optional<NoiseModel> noise;
  int n_trajectories = 1;
  std::uint64_t seed = 0;
  Element noise_element = Element::Tls;
  bool keep_snapshots = false;
  std::vector<std::pair<Element, Axis>> expectations;
  // Largest RK4 step for time-dependent stretches; 0 picks 1/(400 * fastest frequency).
  double max_step_s = 0.0;
  std::uint64_t max_steps = 200'000'000;
};

SimResult propagate(const PulseSchedule& schedule, const CircuitModel& model, const DensityMatrix& rho0,
                    std::span<const double> sample_times, const PropagateOptions& options = {});
SimResult propagate(const PulseSchedule& schedule, const DeviceParams& params, const DensityMatrix& rho0,
                    std::span<const double> sample_times, const PropagateOptions& options = {});

struct EvolveOptions {
  Element noise_element = Element::Tls;
  double max_step_s = 0.0;
  std::uint64_t max_steps = 200'000'000;
};

// One deterministic evolution with an explicit frequency-offset path (times relative to
// the schedule start). Returns the state at each sample time.
std::vector<DensityMatrix> evolve(const PulseSchedule& schedule, const CircuitModel& model,
                                  const DensityMatrix& rho0, std::span<const double> sample_times,
                                  const OffsetPath* path = nullptr, const EvolveOptions& options = {});

std::uint64_t sample_shots(double prob, std::uint64_t n_shots, std::uint64_t seed);

}  // namespace tlslab
