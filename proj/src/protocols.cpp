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

#include "tlslab/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tlslab/parallel.hpp"

namespace tlslab {

namespace {

constexpr double kPi = std::numbers::pi;

bool stochastic(const std::optional<NoiseModel>& noise) {
  return noise && (!noise->fluctuators.empty() || noise->quasi_static_sigma_hz > 0.0);
}

void require_ascending(std::span<const double> v, std::string_view ctx, const char* what) {
  require(!v.empty(), ctx, std::string(what) + " must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= 0.0, ctx, std::string(what) + " must be >= 0");
    if (i > 0) require(v[i] >= v[i - 1], ctx, std::string(what) + " must be ascending");
  }
}

void set_populations(SimResult& r, const std::vector<DensityMatrix>& states) {
  r.observables.clear();
  for (Element e : kAllElements) {
    Observable o{"p_" + std::string(element_name(e)), {}};
    for (const auto& rho : states) o.values.push_back(population(rho, e));
    r.observables.push_back(std::move(o));
  }
}

// Applies a per-sample final pulse to the stored snapshots and re-reads populations.
void finish_with(SimResult& r, const std::function<Operation(std::size_t)>& final_op) {
  std::vector<DensityMatrix> states(r.rho_snapshots.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i] = apply_instant_op(r.rho_snapshots[i], final_op(i));
  }
  set_populations(r, states);
  r.rho_snapshots.clear();
}

Rotation rot(Element e, Axis axis, double angle, double phase = 0.0) {
  return Rotation{e, axis, angle, phase};
}

}  // namespace

CircuitModel ProtocolContext::single_model() const {
  CircuitModel m = CircuitModel::full(device);
  m.couplings.clear();
  m.frame_hz = device.frequency(target);
  return m;
}

CircuitModel ProtocolContext::pair_model() const {
  EffectiveCouplings c;
  if (couplings) {
    c = *couplings;
  } else {
    const EffectiveParams ep = effective_coupling(device);
    c.q1_tls_hz = ep.g_eff_1;
    c.q2_tls_hz = ep.g_eff_2;
  }
  c.q1_q2_hz = residual_qq_hz;
  return CircuitModel::effective(device, c);
}

PropagateOptions ProtocolContext::options(std::uint64_t stream) const {
  PropagateOptions o;
  o.noise = noise;
  o.n_trajectories = stochastic(noise) ? n_trajectories : 1;
  o.seed = stream_seed(seed, stream);
  o.noise_element = target;
  return o;
}

void SweepResult2D::validate() const {
  constexpr std::string_view ctx = "SweepResult2D";
  require(z.rows() == static_cast<Eigen::Index>(y.size()) && z.cols() == static_cast<Eigen::Index>(x.size()),
          ctx, "z dimensions do not match the axes");
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    require(z.data()[i] >= -1e-6 && z.data()[i] <= 1.0 + 1e-6, ctx, "z outside [0, 1]");
  }
}

SimResult rabi(const ProtocolContext& ctx, double drive_rabi_hz, std::span<const double> durations) {
  require_ascending(durations, "protocols.rabi", "durations");
  require(drive_rabi_hz >= 0.0, "protocols.rabi", "drive_rabi_hz must be >= 0");
  PulseSchedule s;
  Segment seg;
  seg.duration = durations.back();
  seg.drives.push_back({ctx.target, drive_rabi_hz, 0.0, 0.0});
  s.add(seg);
  return propagate(s, ctx.single_model(), basis_state(0), durations, ctx.options());
}

SimResult t1_protocol(const ProtocolContext& ctx, std::span<const double> delays) {
  require_ascending(delays, "protocols.t1", "delays");
  PulseSchedule s;
  s.idle(delays.back()).at(0.0, rot(ctx.target, Axis::X, kPi));
  return propagate(s, ctx.single_model(), basis_state(0), delays, ctx.options());
}

SimResult ramsey(const ProtocolContext& ctx, std::span<const double> delays, double virtual_detuning_hz) {
  require_ascending(delays, "protocols.ramsey", "delays");
  PulseSchedule s;
  s.idle(delays.back()).at(0.0, rot(ctx.target, Axis::X, 0.5 * kPi));
  PropagateOptions o = ctx.options();
  o.keep_snapshots = true;
  SimResult r = propagate(s, ctx.single_model(), basis_state(0), delays, o);
  finish_with(r, [&](std::size_t i) {
    return rot(ctx.target, Axis::X, 0.5 * kPi, kTwoPi * virtual_detuning_hz * delays[i]);
  });
  return r;
}

SimResult echo(const ProtocolContext& ctx, std::span<const double> delays) { return cpmg(ctx, delays, 1); }

SimResult cpmg(const ProtocolContext& ctx, std::span<const double> delays, int n_pulses) {
  require_ascending(delays, "protocols.cpmg", "delays");
  require(n_pulses >= 1, "protocols.cpmg", "N must be >= 1");
  const CircuitModel model = ctx.single_model();
  std::vector<DensityMatrix> finals(delays.size());
  SimResult out;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    const double tau = delays[i];
    PulseSchedule s;
    s.idle(tau).at(0.0, rot(ctx.target, Axis::X, 0.5 * kPi));
    for (int k = 0; k < n_pulses; ++k) {
      s.at(tau * (2.0 * k + 1.0) / (2.0 * n_pulses), rot(ctx.target, Axis::Y, kPi));
    }
    s.at(tau, rot(ctx.target, Axis::X, 0.5 * kPi));
    PropagateOptions o = ctx.options(i);
    o.keep_snapshots = true;
    const double t[] = {tau};
    SimResult r = propagate(s, model, basis_state(0), t, o);
    finals[i] = r.rho_snapshots.front();
    out.n_trajectories = o.n_trajectories;
  }
  out.times.assign(delays.begin(), delays.end());
  set_populations(out, finals);
  out.seed = ctx.seed;
  return out;
}

SweepResult2D double_swap_map(const ProtocolContext& ctx, std::span<const double> t1_grid,
                              std::span<const double> t2_grid) {
  require_ascending(t1_grid, "protocols.double_swap_map", "t1_grid");
  require_ascending(t2_grid, "protocols.double_swap_map", "t2_grid");
  const CircuitModel model = ctx.pair_model();
  SweepResult2D out{"t2", "s", "t1", "s", "p_q2", {}, {}, {}};
  out.x.assign(t2_grid.begin(), t2_grid.end());
  out.y.assign(t1_grid.begin(), t1_grid.end());
  out.z.resize(static_cast<Eigen::Index>(t1_grid.size()), static_cast<Eigen::Index>(t2_grid.size()));
  const double f_tls = ctx.device.f_tls;
  PropagateOptions base = ctx.options();
  base.noise_element = Element::Tls;
  parallel_for(t1_grid.size(), [&](std::size_t i) {
    const double t1 = t1_grid[i];
    const double t2max = t2_grid.back();
    PulseSchedule s;
    Segment a;
    a.duration = t1;
    a.freq_hz[element_index(Element::Q1)] = f_tls;
    a.rise_fall = std::min(ctx.rise_fall, 0.5 * t1);
    Segment b;
    b.duration = t2max;
    b.freq_hz[element_index(Element::Q2)] = f_tls;
    b.rise_fall = std::min(ctx.rise_fall, 0.5 * t2max);
    s.add(a).add(b).at(0.0, rot(Element::Q1, Axis::X, kPi));
    std::vector<double> times(t2_grid.size());
    for (std::size_t j = 0; j < times.size(); ++j) times[j] = t1 + t2_grid[j];
    PropagateOptions o = base;
    o.seed = stream_seed(ctx.seed, i);
    const SimResult r = propagate(s, model, basis_state(0), times, o);
    const auto& p = r.observable("p_q2");
    for (std::size_t j = 0; j < p.size(); ++j) out.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
  });
  return out;
}

SimResult relaxation_trace(const ProtocolContext& ctx, double delta_hz, std::span<const double> delays,
                           Element qubit) {
  require_ascending(delays, "protocols.relaxation_trace", "delays");
  require(qubit == Element::Q1 || qubit == Element::Q2, "protocols.relaxation_trace", "qubit must be q1 or q2");
  PulseSchedule s;
  Segment seg;
  seg.duration = delays.back();
  seg.freq_hz[element_index(qubit)] = ctx.device.f_tls + delta_hz;
  seg.rise_fall = std::min(ctx.rise_fall, 0.5 * seg.duration);
  s.add(seg).at(0.0, rot(qubit, Axis::X, kPi));
  PropagateOptions o = ctx.options();
  o.noise_element = Element::Tls;
  return propagate(s, ctx.pair_model(), basis_state(0), delays, o);
}

SweepResult2D relaxation_chevron(const ProtocolContext& ctx, std::span<const double> delta_grid,
                                 std::span<const double> delays, Element qubit) {
  const std::string name = "p_" + std::string(element_name(qubit));
  SweepResult2D out{"delay", "s", "delta", "Hz", name, {}, {}, {}};
  out.x.assign(delays.begin(), delays.end());
  out.y.assign(delta_grid.begin(), delta_grid.end());
  out.z.resize(static_cast<Eigen::Index>(delta_grid.size()), static_cast<Eigen::Index>(delays.size()));
  parallel_for(delta_grid.size(), [&](std::size_t i) {
    ProtocolContext c = ctx;
    c.seed = stream_seed(ctx.seed, i);
    const SimResult r = relaxation_trace(c, delta_grid[i], delays, qubit);
    const auto& p = r.observable(name);
    for (std::size_t j = 0; j < p.size(); ++j) out.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
  });
  return out;
}

std::vector<SimResult> spin_locking(const ProtocolContext& ctx, std::span<const double> omega_rabi_hz,
                                    std::span<const double> durations) {
  require_ascending(durations, "protocols.spin_locking", "durations");
  const CircuitModel model = ctx.single_model();
  std::vector<SimResult> out(omega_rabi_hz.size());
  for (std::size_t i = 0; i < omega_rabi_hz.size(); ++i) {
    require(omega_rabi_hz[i] > 0.0, "protocols.spin_locking", "Rabi frequencies must be > 0");
    PulseSchedule s;
    Segment seg;
    seg.duration = durations.back();
    seg.drives.push_back({ctx.target, omega_rabi_hz[i], 0.5 * kPi, 0.0});
    s.add(seg).at(0.0, rot(ctx.target, Axis::X, 0.5 * kPi));
    PropagateOptions o = ctx.options(i);
    o.keep_snapshots = true;
    out[i] = propagate(s, model, basis_state(0), durations, o);
    finish_with(out[i], [&](std::size_t) { return rot(ctx.target, Axis::X, 0.5 * kPi); });
  }
  return out;
}

RepeatedRamseyResult repeated_ramsey(const ProtocolContext& ctx, const RepeatedRamseyOptions& opt) {
  constexpr std::string_view where = "protocols.repeated_ramsey";
  require(opt.tau > 0.0, where, "tau must be > 0");
  require(opt.ts > opt.tau, where, "sampling interval ts is shorter than the Ramsey sequence");
  require(opt.n_samples >= 1, where, "n_samples must be >= 1");
  RepeatedRamseyResult out;
  out.ts = opt.ts;
  out.tau = opt.tau;
  out.shots_per_point = opt.shots_per_point;
  if (opt.n_samples < 1024) out.flags.push_back("short_series_for_spectra");

  CircuitModel model = ctx.single_model();
  const int target = element_index(ctx.target);
  NoiseModel noise = ctx.noise.value_or(NoiseModel{});
  noise.validate();
  model.gamma_phi[target] += noise.markovian_dephasing_rate();

  PulseSchedule s;
  s.idle(opt.tau);
  if (opt.reset) s.at(0.0, Reset{ctx.target});
  s.at(0.0, rot(ctx.target, Axis::X, 0.5 * kPi));
  s.at(opt.tau, rot(ctx.target, Axis::X, 0.5 * kPi, opt.final_phase_rad));

  Rng noise_rng = make_rng(ctx.seed, 0);
  Rng shot_rng = make_rng(ctx.seed, 1);
  std::vector<TelegraphProcess> procs;
  for (const auto& f : noise.fluctuators) procs.emplace_back(f, noise_rng);
  std::normal_distribution<double> gauss(0.0, 1.0);

  EvolveOptions eo;
  eo.noise_element = ctx.target;
  const double sample_t[] = {opt.tau};
  DensityMatrix rho = basis_state(0);
  out.times.resize(opt.n_samples);
  out.probabilities.resize(opt.n_samples);
  std::vector<double> switches;
  struct Flip {
    double t;
    std::size_t which;
  };
  std::vector<Flip> flips;
  for (std::size_t k = 0; k < opt.n_samples; ++k) {
    const double t0 = static_cast<double>(k) * opt.ts;
    double base = 0.0;
    if (noise.quasi_static_sigma_hz > 0.0) base += noise.quasi_static_sigma_hz * gauss(noise_rng);
    if (opt.modulation) {
      base += opt.modulation->amplitude_hz *
              std::sin(kTwoPi * opt.modulation->freq_hz * t0 + opt.modulation->phase_rad);
    }
    flips.clear();
    std::vector<double> level(procs.size());
    for (std::size_t i = 0; i < procs.size(); ++i) {
      procs[i].jump_to(t0, noise_rng);
      level[i] = procs[i].offset();
      switches.clear();
      procs[i].run_until(t0 + opt.tau, noise_rng, &switches);
      for (double t : switches) flips.push_back({t - t0, i});
    }
    std::sort(flips.begin(), flips.end(), [](const Flip& a, const Flip& b) { return a.t < b.t; });
    OffsetPath path;
    double sum = base;
    for (double v : level) sum += v;
    path.times.push_back(0.0);
    path.values.push_back(sum);
    for (const auto& f : flips) {
      sum -= 2.0 * level[f.which];
      level[f.which] = -level[f.which];
      path.times.push_back(f.t);
      path.values.push_back(sum);
    }
    const auto states = evolve(s, model, rho, sample_t, &path, eo);
    const double p = std::clamp(population(states.front(), ctx.target), 0.0, 1.0);
    out.times[k] = t0;
    if (opt.shots_per_point == 0) {
      out.probabilities[k] = p;
    } else {
      std::binomial_distribution<std::uint64_t> draw(opt.shots_per_point, p);
      out.probabilities[k] = static_cast<double>(draw(shot_rng)) / static_cast<double>(opt.shots_per_point);
    }
    if (!opt.reset) {
      // Measurement removes coherences; the excited population relaxes during dead time.
      const double keep = std::exp(-model.gamma1[target] * (opt.ts - opt.tau));
      DensityMatrix next = DensityMatrix::Zero();
      next(0, 0) = 1.0 - p * keep;
      next(element_bit(ctx.target), element_bit(ctx.target)) = p * keep;
      rho = next;
    }
  }
  return out;
}

IdlePairResult idle_pair_experiment(const ProtocolContext& ctx, std::span<const double> delta_grid,
                                    std::span<const double> delays, const std::string& initial_state,
                                    double q2_offset_hz) {
  constexpr std::string_view where = "protocols.idle_pair_experiment";
  require_ascending(delays, where, "delays");
  require(initial_state == "00" || initial_state == "01" || initial_state == "10" || initial_state == "11",
          where, "initial_state must be one of 00, 01, 10, 11");
  IdlePairResult out;
  out.delta_grid.assign(delta_grid.begin(), delta_grid.end());
  out.delays.assign(delays.begin(), delays.end());
  out.initial_state = initial_state;
  out.rho.resize(delta_grid.size());
  const CircuitModel model = ctx.pair_model();
  parallel_for(delta_grid.size(), [&](std::size_t i) {
    PulseSchedule s;
    Segment seg;
    seg.duration = delays.back();
    seg.freq_hz[element_index(Element::Q1)] = ctx.device.f_tls + delta_grid[i];
    seg.freq_hz[element_index(Element::Q2)] = ctx.device.f_tls + delta_grid[i] + q2_offset_hz;
    seg.rise_fall = std::min(ctx.rise_fall, 0.5 * seg.duration);
    s.add(seg);
    if (initial_state[0] == '1') s.at(0.0, rot(Element::Q1, Axis::X, kPi));
    if (initial_state[1] == '1') s.at(0.0, rot(Element::Q2, Axis::X, kPi));
    PropagateOptions o = ctx.options(i);
    o.noise_element = Element::Tls;
    o.keep_snapshots = true;
    const SimResult r = propagate(s, model, basis_state(0), delays, o);
    out.rho[i].reserve(delays.size());
    for (const auto& rho : r.rho_snapshots) out.rho[i].push_back(reduce_to_qubits(rho));
  });
  return out;
}

Eigen::Matrix4cd iswap_matrix() {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u(0, 0) = 1.0;
  u(1, 2) = cplx(0.0, 1.0);
  u(2, 1) = cplx(0.0, 1.0);
  u(3, 3) = 1.0;
  return u;
}

GateExperiment iswap_gate_experiment(const GateSpec& spec, const DeviceParams& device) {
  constexpr std::string_view where = "protocols.iswap_gate_experiment";
  require(spec.t_gate > 0.0, where, "t_gate must be > 0");
  require(spec.g_eff_hz >= 0.0, where, "g_eff must be >= 0");
  require(spec.gamma1_tls >= 0.0 && spec.gamma_phi_tls >= 0.0, where, "TLS rates must be >= 0");
  GateExperiment g;
  g.t_gate = spec.t_gate;
  g.ideal = iswap_matrix();
  // Negative exchange makes exp(-iHt) an iSWAP with +i on the swapped amplitudes.
  const double j = -1.0 / (4.0 * spec.t_gate);
  g.model = CircuitModel::effective(device, {spec.g_eff_hz, spec.both_qubits ? spec.g_eff_hz : 0.0, j});
  g.model.frame_hz = device.f_tls;
  const double fq = device.f_tls + spec.delta_hz;
  g.model.freq_hz[element_index(Element::Q1)] = fq;
  g.model.freq_hz[element_index(Element::Q2)] = fq;
  g.model.gamma1 = {spec.gamma1_qubits, spec.gamma1_qubits, 0.0, spec.gamma1_tls};
  g.model.gamma_phi = {spec.gamma_phi_qubits, spec.gamma_phi_qubits, 0.0, spec.gamma_phi_tls};
  const double frame_phase = kTwoPi * spec.delta_hz * spec.t_gate;
  g.schedule.idle(spec.t_gate)
      .at(spec.t_gate, rot(Element::Q1, Axis::Z, frame_phase))
      .at(spec.t_gate, rot(Element::Q2, Axis::Z, frame_phase));
  return g;
}

}  // namespace tlslab
