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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlslab/common.hpp"

namespace tlslab {

// Static device description. Frequencies and couplings are ordinary frequencies (Hz);
// rates are in 1/s. Pure-dephasing rates follow the convention that an off-diagonal
// element decays as exp(-gamma_phi * t).
struct DeviceParams {
  double f_q1 = 3.68e9;
  double f_q2 = 3.30e9;
  double f_c = 4.48e9;
  double f_tls = 3.48e9;
  double g1 = 70e6;
  double g2 = 61e6;
  double g_t = 30e6;
  double gamma1_q1 = 1.0 / 20e-6;
  double gamma1_q2 = 1.0 / 20e-6;
  double gamma1_c = 1.0 / 10e-6;
  double gamma1_tls = 1.0 / 44.7e-6;
  double gamma_phi_q1 = 0.0;
  double gamma_phi_q2 = 0.0;
  double gamma_phi_c = 0.0;
  double gamma_phi_tls = 1.0 / 1.1e-6;

  double frequency(Element e) const;
  void set_frequency(Element e, double hz);
  double gamma1(Element e) const;
  double gamma_phi(Element e) const;

  // |f_c - f_tls| >= 5 max(g1, g2, g_t); the regime where the effective coupling
  // formula is trustworthy. Advisory only.
  bool dispersive_ok() const;

  // Human-readable invariant violations ("g1 must be >= 0", ...); empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;  // throws Error(InvalidArgument) listing violations
};

// Exchange term 2*pi*g (s+_a s-_b + h.c.).
struct Coupling {
  Element a;
  Element b;
  double g_hz;
};

// Resonant unless detuning_hz != 0. The drive enters as
// 2*pi*(rabi/2)(cos(phase) sx + sin(phase) sy) in the driven element's frame.
struct DriveTerm {
  Element element = Element::Tls;
  double rabi_hz = 0.0;
  double phase_rad = 0.0;
  double detuning_hz = 0.0;
};

// Direct couplings of the effective (coupler-eliminated) description.
struct EffectiveCouplings {
  double q1_tls_hz = 0.0;
  double q2_tls_hz = 0.0;
  double q1_q2_hz = 0.0;
};

// Everything the solver needs to know about the circuit: bare element frequencies,
// Markovian rates, and which pairs exchange excitations. The rotating frame is at
// frame_hz for every element (the TLS frequency by default).
struct CircuitModel {
  std::array<double, kNumElements> freq_hz{};
  std::array<double, kNumElements> gamma1{};
  std::array<double, kNumElements> gamma_phi{};
  std::vector<Coupling> couplings;
  double frame_hz = 0.0;

  // Qubits and TLS couple only through the coupler (g1, g2, g_t).
  static CircuitModel full(const DeviceParams& p);
  // Coupler eliminated: direct qubit-TLS and qubit-qubit exchange; the coupler is an
  // uncoupled spectator.
  static CircuitModel effective(const DeviceParams& p, const EffectiveCouplings& c);
};

using Matrix16c = Eigen::Matrix<cplx, kDim, kDim>;

// 16x16 Hermitian matrix in rad/s, basis Q1 (x) Q2 (x) C (x) TLS, |0> ground, expressed
// in the frame rotating at the TLS frequency.
struct Hamiltonian {
  Matrix16c matrix = Matrix16c::Zero();
};

Hamiltonian build_hamiltonian(const DeviceParams& params, std::span<const DriveTerm> drives = {});
Hamiltonian build_hamiltonian(const CircuitModel& model, std::span<const DriveTerm> drives = {});

struct EffectiveParams {
  double g_eff_1 = 0.0;  // Hz
  double g_eff_2 = 0.0;  // Hz
  double delta_c = 0.0;  // f_c - f_tls, Hz
  std::optional<double> delta;  // f_qk - f_tls, when a target qubit frequency is given
  std::optional<double> theta;  // atan2(2 g_eff_k, delta), in (0, pi)
  bool dispersive_ok = true;
  std::vector<std::string> flags;
};

// g_eff_k = g_k g_t / |f_c - f_tls|. With a target frequency for `qubit`, delta and the
// mixing angle for that qubit are filled in. Throws when the coupler sits on the TLS.
EffectiveParams effective_coupling(const DeviceParams& params,
                                   std::optional<double> target_qubit_hz = std::nullopt,
                                   Element qubit = Element::Q1);

// Single-excitation block (Hz), basis |Q1>, |Q2>, |C>, |TLS>; absolute frequencies.
Eigen::Matrix4d single_excitation_block(const DeviceParams& params);

struct CrossingGap {
  double min_gap_hz = 0.0;
  double f_at_min_hz = 0.0;
};

// Sweeps `swept`'s frequency, taking the smallest adjacent eigen-gap of the
// single-excitation block at each point; the grid minimum is refined by golden-section
// search. Throws when the minimum sits on an end of the sweep.
CrossingGap avoided_crossing_gap(const DeviceParams& params, std::span<const double> f_sweep,
                                 Element swept = Element::Q1);

double mixing_angle(double g_eff_hz, double delta_hz);

enum class MixingConvention {
  // Gamma_avg = G_q cos^2(theta) + G_tls sin^2(theta), theta = atan2(2g, delta).
  AsPublished,
  // Eigenvector weights of the hybridized qubit-like state: cos^2(theta/2), sin^2(theta/2)
  // with theta = atan2(2g, |delta|).
  EigenvectorWeights,
};

double gamma_avg_theory(double gamma1_q, double gamma1_tls, double g_eff_hz, double delta_hz,
                        MixingConvention convention = MixingConvention::AsPublished);

}  // namespace tlslab
