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
#include <vector>

#include <Eigen/Dense>

#include "tlslab/model.hpp"
#include "tlslab/noise.hpp"
#include "tlslab/solver.hpp"

namespace tlslab {

struct ProtocolContext {
  DeviceParams device;
  std::optional<NoiseModel> noise;  // acts on `target` (single-element protocols) or the TLS
  int n_trajectories = 1;
  std::uint64_t seed = 0;
  Element target = Element::Tls;
  double rise_fall = 2e-9;
  // Qubit-qubit exchange left over at the decoupling bias.
  double residual_qq_hz = 0.0;
  // Defaults to effective_coupling(device).
  std::optional<EffectiveCouplings> couplings;

  // Target element on its own, in a frame at its idle frequency.
  CircuitModel single_model() const;
  // Q1, Q2 and TLS with effective exchange; coupler is an idle spectator.
  CircuitModel pair_model() const;
  PropagateOptions options(std::uint64_t stream = 0) const;
};

struct SweepResult2D {
  std::string x_name, x_unit;
  std::string y_name, y_unit;
  std::string z_name;
  std::vector<double> x;
  std::vector<double> y;
  Eigen::MatrixXd z;  // rows follow y, columns follow x

  void validate() const;
};

// Coherence sequences on ctx.target. Every result carries p_<element> observables; for
// ramsey/echo/cpmg the final pulse is chosen so a fully coherent element reads p = 1.
SimResult rabi(const ProtocolContext& ctx, double drive_rabi_hz, std::span<const double> durations);
SimResult t1_protocol(const ProtocolContext& ctx, std::span<const double> delays);
SimResult ramsey(const ProtocolContext& ctx, std::span<const double> delays, double virtual_detuning_hz = 0.0);
SimResult echo(const ProtocolContext& ctx, std::span<const double> delays);
SimResult cpmg(const ProtocolContext& ctx, std::span<const double> delays, int n_pulses);

// P_Q2 after Q1 -> TLS (t1) then TLS -> Q2 (t2); x follows t2, y follows t1.
SweepResult2D double_swap_map(const ProtocolContext& ctx, std::span<const double> t1_grid,
                              std::span<const double> t2_grid);

// Excited qubit parked at f_tls + delta (rise_fall ramps in); populations read on the plateau.
SimResult relaxation_trace(const ProtocolContext& ctx, double delta_hz, std::span<const double> delays,
                           Element qubit = Element::Q1);
// x follows delays, y follows delta.
SweepResult2D relaxation_chevron(const ProtocolContext& ctx, std::span<const double> delta_grid,
                                 std::span<const double> delays, Element qubit = Element::Q1);

// sqrt(X), Y drive at rabi frequency Omega, sqrt(X); one result per Omega with p_<target>.
std::vector<SimResult> spin_locking(const ProtocolContext& ctx, std::span<const double> omega_rabi_hz,
                                    std::span<const double> durations);

struct Modulation {
  double amplitude_hz = 0.0;
  double freq_hz = 0.0;
  double phase_rad = 0.0;
};

struct RepeatedRamseyOptions {
  double ts = 1e-3;
  std::size_t n_samples = 1024;
  double tau = 200e-9;
  std::uint64_t shots_per_point = 1;  // 0 reports exact probabilities
  bool reset = true;
  double final_phase_rad = -0.5 * std::numbers::pi;
  std::optional<Modulation> modulation;
};

struct RepeatedRamseyResult {
  double ts = 0.0;
  double tau = 0.0;
  std::uint64_t shots_per_point = 0;
  std::vector<double> times;
  std::vector<double> probabilities;
  std::vector<std::string> flags;
};

// Fixed-delay Ramsey repeated every ts; the noise is one continuous realization across
// the whole wall-clock span.
RepeatedRamseyResult repeated_ramsey(const ProtocolContext& ctx, const RepeatedRamseyOptions& options);

struct IdlePairResult {
  std::vector<double> delta_grid;
  std::vector<double> delays;
  std::string initial_state;
  // rho[i][j]: two-qubit state at delta_grid[i], delays[j]
  std::vector<std::vector<Eigen::Matrix4cd>> rho;
};

// q2_offset_hz detunes Q2 from Q1 while both sit near the TLS.
IdlePairResult idle_pair_experiment(const ProtocolContext& ctx, std::span<const double> delta_grid,
                                    std::span<const double> delays, const std::string& initial_state,
                                    double q2_offset_hz = 0.0);

struct GateSpec {
  double delta_hz = 0.0;  // both qubits at f_tls + delta during the gate
  double g_eff_hz = 0.0;
  bool both_qubits = false;
  double t_gate = 60e-9;
  double gamma1_tls = 1.0 / 44.7e-6;
  double gamma_phi_tls = 1.0 / 1.1e-6;
  double gamma1_qubits = 0.0;
  double gamma_phi_qubits = 0.0;
};

struct GateExperiment {
  PulseSchedule schedule;  // includes the virtual-Z frame correction at t_gate
  CircuitModel model;
  double t_gate = 0.0;
  Eigen::Matrix4cd ideal;  // iSWAP on |Q1 Q2>
};

Eigen::Matrix4cd iswap_matrix();
GateExperiment iswap_gate_experiment(const GateSpec& spec, const DeviceParams& device = {});

}  // namespace tlslab
