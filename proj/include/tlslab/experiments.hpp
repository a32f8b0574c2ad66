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
#include <vector>

#include "tlslab/analysis.hpp"
#include "tlslab/protocols.hpp"
#include "tlslab/tomography.hpp"

namespace tlslab {

// Delay grids left empty skip the corresponding sequence.
struct CoherencePlan {
  double rabi_hz = 10e6;
  std::vector<double> rabi_durations;
  std::vector<double> t1_delays;
  std::vector<double> ramsey_delays;
  std::vector<double> echo_delays;
  std::vector<int> cpmg_pulses;
  std::vector<double> cpmg_delays;
};

// Fits: damped cosine for Rabi, exponential for T1 populations, Gaussian decay of the
// Ramsey coherence 2p - 1, exponential decay of the echo and CPMG coherences.
struct CoherenceSuite {
  std::optional<SimResult> rabi, t1, ramsey, echo;
  std::vector<SimResult> cpmg;
  std::optional<FitResult> rabi_fit, t1_fit, ramsey_fit, echo_fit;
  std::vector<FitResult> cpmg_fits;
};

CoherenceSuite run_coherence_suite(const ProtocolContext& ctx, const CoherencePlan& plan);

struct PsdPlan {
  std::vector<double> sampling_intervals_s{4e-3, 40e-6, 0.4e-6};
  std::size_t n_samples = std::size_t{1} << 17;
  std::size_t segment_len = 8192;
  double tau = 200e-9;
  std::uint64_t shots_per_point = 100;
  // Each interleaved cross spectrum is kept between its band_skip_bins-th bin and
  // band_top_fraction of its Nyquist frequency.
  double band_top_fraction = 1.0 / 3.0;
  std::size_t band_skip_bins = 2;
  std::vector<double> spinlock_rabi_hz{2e5, 3.17e5, 5.02e5, 7.96e5, 1.26e6, 2e6};
  double spinlock_duration_s = 60e-6;
  std::size_t spinlock_points = 41;
  int spinlock_trajectories = 100;
  StitchOptions stitch;
  int lorentzians = 2;
  double fit_f_lo = 0.0;  // 0 selects the stitched band edges
  double fit_f_hi = 0.0;
};

struct PsdReconstruction {
  std::vector<SpectrumEstimate> bands;  // one per sampling interval
  std::vector<RepeatedRamseyResult> series;
  double contrast = 1.0;
  std::vector<SimResult> spinlock_traces;
  std::vector<FitResult> spinlock_fits;
  SpectrumEstimate spinlock;
  StitchResult stitched;
  FitResult power_law;
  FitResult lorentzians;
};

// Repeated Ramsey at each sampling interval, even/odd interleaved cross spectra,
// spin-locking relaxometry, stitching, and power-law plus Lorentzian fits. The noise
// acts on ctx.target; ctx.noise must be set.
PsdReconstruction reconstruct_psd(const ProtocolContext& ctx, const PsdPlan& plan);

// 1 - average gate fidelity of the simulated iSWAP.
double iswap_gate_error(const GateSpec& spec, const DeviceParams& device = {});

}  // namespace tlslab
