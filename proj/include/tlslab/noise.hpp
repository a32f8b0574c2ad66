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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tlslab/parallel.hpp"
#include "tlslab/spectrum.hpp"

namespace tlslab {

// Telegraph process shifting the TLS frequency by +a (up) or -a (down). For the
// default occupancy of one half both directions switch at `switch_rate`; in general
// the up and down rates are 2*rate*p_up and 2*rate*(1 - p_up), so the autocorrelation
// always decays as exp(-2*rate*|tau|).
struct TelegraphFluctuator {
  double amplitude_hz = 0.0;
  double switch_rate = 1.0;  // 1/s
  double p_up = 0.5;

  double rate_to_up() const { return 2.0 * switch_rate * p_up; }
  double rate_to_down() const { return 2.0 * switch_rate * (1.0 - p_up); }
  double mean_offset() const { return amplitude_hz * (2.0 * p_up - 1.0); }
  double variance() const { return 4.0 * amplitude_hz * amplitude_hz * p_up * (1.0 - p_up); }
  void validate() const;
};

struct NoiseModel {
  std::vector<TelegraphFluctuator> fluctuators;
  double white_level = 0.0;           // one-sided, Hz^2/Hz
  double quasi_static_sigma_hz = 0.0;  // Gaussian static offset per repetition

  void validate() const;
  bool empty() const {
    return fluctuators.empty() && white_level == 0.0 && quasi_static_sigma_hz == 0.0;
  }
  // White frequency noise is equivalent to Markovian pure dephasing at pi^2 * level.
  double markovian_dephasing_rate() const;
  double total_variance() const;  // sum of fluctuator variances + sigma^2
};

struct NoiseTrajectory {
  std::vector<double> times;    // uniform grid, s
  std::vector<double> offsets;  // Hz, value held from times[i] to times[i+1]
  std::vector<std::string> flags;
};

// Piecewise-constant frequency offset with arbitrary breakpoints; values[i] holds on
// [times[i], times[i+1]) and the last value holds indefinitely.
struct OffsetPath {
  std::vector<double> times;
  std::vector<double> values;

  double at(double t) const;
  static OffsetPath constant(double value) { return {{0.0}, {value}}; }
  static OffsetPath from_trajectory(const NoiseTrajectory& traj);
};

// Event-driven telegraph process. run_until resolves every switch; jump_to moves across
// a long idle span using the exact two-state transition probability.
class TelegraphProcess {
 public:
  TelegraphProcess(const TelegraphFluctuator& tlf, Rng& rng);

  bool up() const { return up_; }
  double time() const { return t_; }
  double offset() const { return up_ ? tlf_.amplitude_hz : -tlf_.amplitude_hz; }

  // Appends the times of all switches in (time(), t_end] and ends at t_end.
  void run_until(double t_end, Rng& rng, std::vector<double>* switch_times);
  void jump_to(double t_end, Rng& rng);

 private:
  TelegraphFluctuator tlf_;
  bool up_ = false;
  double t_ = 0.0;
};

// Sum of all fluctuators plus one quasi-static draw over [0, duration], with exact
// switch times as breakpoints.
OffsetPath sample_offset_path(const NoiseModel& model, double duration, Rng& rng);

NoiseTrajectory rtn_trajectory(const TelegraphFluctuator& tlf, double duration, double dt,
                               std::uint64_t seed);

double tlf_psd(const TelegraphFluctuator& tlf, double f);

// Sum of fluctuator Lorentzians plus the white level; tagged analytic.
SpectrumEstimate ensemble_psd(const NoiseModel& model, std::span<const double> f_grid);

struct OneOverFSynthesis {
  NoiseModel model;
  std::vector<std::string> flags;
};

// Fluctuator rates log-spaced over [rate_min, rate_max] (1/s) with amplitudes
// a_i^2 proportional to rate_i^(1 - alpha), scaled so the ensemble equals
// level_at_1hz / f^alpha at 1 Hz.
OneOverFSynthesis synthesize_one_over_f(double level_at_1hz, double alpha, double rate_min,
                                        double rate_max, int count);

// Local log-log slope fit of an analytic ensemble over [f_lo, f_hi]; returns alpha for
// S ~ f^-alpha.
double ensemble_log_slope(const NoiseModel& model, double f_lo, double f_hi, int points = 200);

double quasi_static_sample(const NoiseModel& model, std::uint64_t seed);

struct RamseyOptions {
  // Noise slower than 1/experiment_duration_s is invisible to the experiment. Infinite
  // duration means no cutoff.
  double experiment_duration_s = std::numeric_limits<double>::infinity();
};

struct RamseyPrediction {
  double coherence = 1.0;  // |<exp(i phi)>| at the requested delay
  double chi = 0.0;
  double t2_s = std::numeric_limits<double>::infinity();  // exp(-chi(T2)) = 1/e
};

// Gaussian-phase free-induction decay chi(t) = (2 pi)^2 t^2/2 int S(f) sinc^2(pi f t) df.
RamseyPrediction ramsey_prediction(const NoiseModel& model, double t, const RamseyOptions& options = {});
// Same from a (possibly band-limited) estimate: log-log interpolation inside the band,
// power-law extrapolation of the lowest decade down to the cutoff, zero above the band.
RamseyPrediction ramsey_prediction(const SpectrumEstimate& spectrum, double t,
                                   const RamseyOptions& options = {});

}  // namespace tlslab
