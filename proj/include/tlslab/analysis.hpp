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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlslab/noise.hpp"
#include "tlslab/spectrum.hpp"

namespace tlslab {

struct FitParam {
  std::string name;
  std::string unit;
  double value = 0.0;
  double sigma = 0.0;  // 1-sigma from s^2 (J^T J)^-1
};

struct FitResult {
  std::string model;
  std::vector<FitParam> params;
  double residual_norm = 0.0;
  bool converged = false;
  std::vector<std::string> flags;

  const FitParam& param(std::string_view name) const;
  double value(std::string_view name) const { return param(name).value; }
  double sigma(std::string_view name) const { return param(name).sigma; }
};

// y = A exp(-t/tau) [+ C]
FitResult fit_exponential(std::span<const double> t, std::span<const double> y, bool with_offset = false);
// y = A exp(-(t/tau)^2) [+ C]
FitResult fit_gaussian_decay(std::span<const double> t, std::span<const double> y, bool with_offset = false);
// y = A exp(-gamma t) cos(2 pi f t + phi) + C
FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y);

struct OscAvgResult {
  std::optional<double> gamma_osc;  // absent when overdamped
  double gamma_avg = 0.0;
  std::optional<double> f_osc;
  FitResult full;  // stage-one fit (or the single exponential when overdamped)
  FitResult tail;
  std::vector<std::string> flags;
};

// Two-stage decomposition of a relaxation trace into damped swap oscillations on top of
// a slower exponential; gamma_avg comes from a tail refit on t > 3/gamma_osc.
OscAvgResult extract_osc_avg(std::span<const double> t, std::span<const double> y);

// Hann window, one-sided, mean removed per segment; overlap is a fraction in [0, 1).
SpectrumEstimate welch_psd(std::span<const double> series, double ts, std::size_t segment_len,
                           double overlap = 0.5);
// Real part of the averaged cross-periodogram of two series sharing a noise process;
// lag_s is the time offset of b's samples relative to a's and is compensated.
SpectrumEstimate cross_psd(std::span<const double> a, std::span<const double> b, double ts,
                           std::size_t segment_len, double overlap = 0.5, double lag_s = 0.0);

struct TransduceResult {
  std::vector<double> offsets_hz;
  std::size_t clipped = 0;
  std::vector<std::string> flags;
};

// delta_f = asin((2p - 1)/contrast) / (2 pi tau); out-of-range values are clipped.
TransduceResult transduce(std::span<const double> probabilities, double tau, double contrast);
// Fringe contrast for a single shot: noise faster than 1/tau plus Markovian decay.
double ramsey_contrast(const NoiseModel& model, double tau, double gamma1, double gamma_phi);

struct StitchOptions {
  int bins_per_decade = 10;
  double max_discrepancy_db = 6.0;
};

struct StitchResult {
  SpectrumEstimate spectrum;
  double consistency_db = 0.0;  // largest |median log-ratio| over overlapping pairs
};

StitchResult stitch_spectra(std::span<const SpectrumEstimate> inputs, const StitchOptions& options = {});

// log10 S = log10 A - alpha log10 f over [f_lo, f_hi]; params "A" (Hz^2/Hz at 1 Hz), "alpha".
FitResult fit_power_law(const SpectrumEstimate& spec, double f_lo, double f_hi);

struct LorentzianFitOptions {
  bool power_law_background = false;
  double f_lo = 0.0;
  double f_hi = std::numeric_limits<double>::infinity();
};

// Sum of telegraph Lorentzians (p_up = 1/2) fitted in log space; params a_i (Hz) and
// gamma_i (1/s), plus "A" and "alpha" with a background.
FitResult fit_lorentzian_sum(const SpectrumEstimate& spec, int n_components,
                             const LorentzianFitOptions& options = {});

// S(Omega) = (Gamma_1rho - Gamma_1/2) / pi^2 in Hz^2/Hz at f = Omega.
SpectrumEstimate spinlock_to_psd(std::span<const double> omega_hz, std::span<const double> gamma_1rho,
                                 double gamma1, std::span<const double> gamma_1rho_sigma = {});

}  // namespace tlslab
