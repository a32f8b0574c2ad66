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


#include "tlslab/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace tlslab {

namespace {

std::vector<double> coherence_of(const SimResult& r, Element target) {
  const std::string name = "p_" + std::string(element_name(target));
  std::vector<double> c = r.observable(name);
  for (double& v : c) v = 2.0 * v - 1.0;
  return c;
}

ProtocolContext with_stream(const ProtocolContext& ctx, std::uint64_t stream) {
  ProtocolContext c = ctx;
  c.seed = stream_seed(ctx.seed, stream);
  return c;
}

bool is_stochastic(const std::optional<NoiseModel>& noise) {
  return noise && (!noise->fluctuators.empty() || noise->quasi_static_sigma_hz > 0.0);
}

}  // namespace

CoherenceSuite run_coherence_suite(const ProtocolContext& ctx, const CoherencePlan& plan) {
  CoherenceSuite out;
  const std::string p_name = "p_" + std::string(element_name(ctx.target));
  if (!plan.rabi_durations.empty()) {
    out.rabi = rabi(with_stream(ctx, 0), plan.rabi_hz, plan.rabi_durations);
    out.rabi_fit = fit_damped_cosine(plan.rabi_durations, out.rabi->observable(p_name));
  }
  if (!plan.t1_delays.empty()) {
    out.t1 = t1_protocol(with_stream(ctx, 1), plan.t1_delays);
    out.t1_fit = fit_exponential(plan.t1_delays, out.t1->observable(p_name));
  }
  if (!plan.ramsey_delays.empty()) {
    out.ramsey = ramsey(with_stream(ctx, 2), plan.ramsey_delays);
    out.ramsey_fit = fit_gaussian_decay(plan.ramsey_delays, coherence_of(*out.ramsey, ctx.target));
  }
  if (!plan.echo_delays.empty()) {
    out.echo = echo(with_stream(ctx, 3), plan.echo_delays);
    out.echo_fit = fit_exponential(plan.echo_delays, coherence_of(*out.echo, ctx.target));
  }
  if (!plan.cpmg_delays.empty()) {
    for (std::size_t i = 0; i < plan.cpmg_pulses.size(); ++i) {
      out.cpmg.push_back(cpmg(with_stream(ctx, 4 + i), plan.cpmg_delays, plan.cpmg_pulses[i]));
      out.cpmg_fits.push_back(fit_exponential(plan.cpmg_delays, coherence_of(out.cpmg.back(), ctx.target)));
    }
  }
  return out;
}

PsdReconstruction reconstruct_psd(const ProtocolContext& ctx, const PsdPlan& plan) {
  constexpr std::string_view where = "experiments.reconstruct_psd";
  require(ctx.noise.has_value(), where, "a noise model is required");
  require(!plan.sampling_intervals_s.empty(), where, "at least one sampling interval is required");
  require(plan.segment_len >= 8 && plan.n_samples >= 4 * plan.segment_len, where,
          "n_samples must hold at least two interleaved segments");
  require(plan.band_top_fraction > 0.0 && plan.band_top_fraction <= 1.0, where,
          "band_top_fraction must lie in (0, 1]");
  PsdReconstruction out;
  const Element target = ctx.target;
  const double gamma1 = ctx.device.gamma1(target);
  const double gamma_phi = ctx.device.gamma_phi(target);
  out.contrast = ramsey_contrast(*ctx.noise, plan.tau, gamma1, gamma_phi);

  const std::size_t n_bands = plan.sampling_intervals_s.size();
  out.bands.resize(n_bands);
  out.series.resize(n_bands);
  parallel_for(n_bands, [&](std::size_t b) {
    const double ts = plan.sampling_intervals_s[b];
    RepeatedRamseyOptions o;
    o.ts = ts;
    o.n_samples = plan.n_samples;
    o.tau = plan.tau;
    o.shots_per_point = plan.shots_per_point;
    out.series[b] = repeated_ramsey(with_stream(ctx, b), o);
    const TransduceResult tr = transduce(out.series[b].probabilities, plan.tau, out.contrast);
    std::vector<double> even, odd;
    for (std::size_t i = 0; i + 1 < tr.offsets_hz.size(); i += 2) {
      even.push_back(tr.offsets_hz[i]);
      odd.push_back(tr.offsets_hz[i + 1]);
    }
    const SpectrumEstimate full = cross_psd(even, odd, 2.0 * ts, plan.segment_len, 0.5, ts);
    const double f_top = plan.band_top_fraction / (4.0 * ts);
    SpectrumEstimate band;
    band.source = full.source;
    band.flags = full.flags;
    band.flags.insert(band.flags.end(), tr.flags.begin(), tr.flags.end());
    for (std::size_t k = plan.band_skip_bins; k < full.size(); ++k) {
      if (full.freqs[k] > f_top) break;
      band.freqs.push_back(full.freqs[k]);
      band.psd.push_back(full.psd[k]);
      band.variance.push_back(full.variance[k]);
    }
    out.bands[b] = std::move(band);
  });

  std::vector<SpectrumEstimate> inputs = out.bands;
  if (!plan.spinlock_rabi_hz.empty()) {
    ProtocolContext sl = with_stream(ctx, n_bands);
    sl.n_trajectories = is_stochastic(ctx.noise) ? plan.spinlock_trajectories : 1;
    const std::vector<double> durations = linspace(0.0, plan.spinlock_duration_s, plan.spinlock_points);
    out.spinlock_traces = spin_locking(sl, plan.spinlock_rabi_hz, durations);
    const std::string p_name = "p_" + std::string(element_name(target));
    std::vector<double> omegas, rates, sigmas;
    for (std::size_t i = 0; i < out.spinlock_traces.size(); ++i) {
      FitResult f = fit_exponential(durations, out.spinlock_traces[i].observable(p_name), true);
      const double tau = f.value("tau");
      omegas.push_back(plan.spinlock_rabi_hz[i]);
      rates.push_back(1.0 / tau);
      sigmas.push_back(f.sigma("tau") / (tau * tau));
      out.spinlock_fits.push_back(std::move(f));
    }
    out.spinlock = spinlock_to_psd(omegas, rates, gamma1, sigmas);
    if (out.spinlock.size() > 0) inputs.push_back(out.spinlock);
  }
  out.stitched = stitch_spectra(inputs, plan.stitch);

  const SpectrumEstimate& s = out.stitched.spectrum;
  const double lo = plan.fit_f_lo > 0.0 ? plan.fit_f_lo : s.freqs.front();
  const double hi = plan.fit_f_hi > 0.0 ? plan.fit_f_hi : s.freqs.back();
  out.power_law = fit_power_law(s, lo, hi);
  if (plan.lorentzians > 0) {
    LorentzianFitOptions lo_opts;
    lo_opts.power_law_background = true;
    lo_opts.f_lo = lo;
    lo_opts.f_hi = hi;
    out.lorentzians = fit_lorentzian_sum(s, plan.lorentzians, lo_opts);
  }
  return out;
}

double iswap_gate_error(const GateSpec& spec, const DeviceParams& device) {
  const GateExperiment gate = iswap_gate_experiment(spec, device);
  return 1.0 - average_gate_fidelity(channel_from_experiment(gate), gate.ideal);
}

}  // namespace tlslab
