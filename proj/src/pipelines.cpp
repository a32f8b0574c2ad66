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


#include "tlslab/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

#include <fftw3.h>

#include "tlslab/experiments.hpp"

namespace tlslab {

namespace {

constexpr std::string_view kPipelineNames[] = {
    "fig1b-double-swap", "fig1-coherence", "fig2-chevron", "fig3-psd",
    "fig4-tomo",         "fig4-gate-scan", "fig4-zeno",
};

constexpr PipelineInfo kPipelines[] = {
    {kPipelineNames[0], "Q2 excitation after Q1 -> TLS -> Q2 double swap vs pulse lengths"},
    {kPipelineNames[1], "TLS Rabi, T1, Ramsey, echo and CPMG traces with fitted times"},
    {kPipelineNames[2], "Relaxation chevron and Gamma_osc/Gamma_avg vs qubit-TLS detuning"},
    {kPipelineNames[3], "Repeated-Ramsey and spin-locking PSD, stitched, with 1/f and TLF fits"},
    {kPipelineNames[4], "Two-qubit purity and concurrence chevrons from simulated tomography"},
    {kPipelineNames[5], "iSWAP gate error vs detuning for TLS coupled to one or both qubits"},
    {kPipelineNames[6], "iSWAP gate error vs TLS relaxation rate (Zeno/anti-Zeno)"},
};

// A grid is either an explicit ascending array or {"start", "stop", "count", "spacing"}.
std::vector<double> read_grid(const JsonReader& r, std::string_view key, std::vector<double> fallback) {
  if (!r.has(key)) return fallback;
  const Json& node = r.at(key);
  const std::string path = r.child_path(key);
  std::vector<double> out;
  if (node.is_array()) {
    out = r.numbers(key);
  } else {
    JsonReader g(node, path);
    const double start = g.number("start");
    const double stop = g.number("stop");
    const std::uint64_t count = g.unsigned_integer("count");
    const std::string spacing = g.string("spacing", "linear");
    g.reject_unknown();
    if (count < 1 || count > 1'000'000) schema_error(path + ".count", "must lie in [1, 1000000]");
    if (spacing == "linear") {
      out = linspace(start, stop, count);
    } else if (spacing == "log") {
      if (!(start > 0.0) || !(stop > 0.0)) schema_error(path, "log grids need positive bounds");
      out = logspace(start, stop, count);
    } else {
      schema_error(path + ".spacing", "must be 'linear' or 'log'");
    }
  }
  if (out.empty()) schema_error(path, "grid is empty");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) schema_error(path, "grid must be strictly ascending");
  }
  return out;
}

void require_nonnegative(const std::vector<double>& v, const JsonReader& r, std::string_view key) {
  for (double x : v) {
    if (x < 0.0) schema_error(r.child_path(key), "values must be >= 0");
  }
}

double positive(const JsonReader& r, std::string_view key, double fallback) {
  const double v = r.number(key, fallback);
  if (!(v > 0.0)) schema_error(r.child_path(key), "must be > 0");
  return v;
}

double nonnegative(const JsonReader& r, std::string_view key, double fallback) {
  const double v = r.number(key, fallback);
  if (v < 0.0) schema_error(r.child_path(key), "must be >= 0");
  return v;
}

Element element_param(const JsonReader& r, std::string_view key, Element fallback) {
  if (!r.has(key)) return fallback;
  const std::string name = r.string(key);
  for (Element e : kAllElements) {
    if (element_name(e) == name) return e;
  }
  schema_error(r.child_path(key), "unknown element '" + name + "'");
}

bool stochastic(const std::optional<NoiseModel>& noise) {
  return noise && (!noise->fluctuators.empty() || noise->quasi_static_sigma_hz > 0.0);
}

// Context fields shared by every pipeline.
ProtocolContext read_context(const ExperimentConfig& c, const JsonReader& r) {
  ProtocolContext ctx;
  ctx.device = c.device;
  ctx.noise = c.noise;
  ctx.seed = c.seed;
  ctx.n_trajectories = stochastic(c.noise) ? c.trajectories : 1;
  ctx.target = element_param(r, "target", Element::Tls);
  ctx.rise_fall = nonnegative(r, "rise_fall_s", ctx.rise_fall);
  ctx.residual_qq_hz = nonnegative(r, "residual_qq_hz", 0.0);
  if (r.has("couplings")) {
    JsonReader cr(r.at("couplings"), r.child_path("couplings"));
    EffectiveCouplings ec;
    ec.q1_tls_hz = nonnegative(cr, "q1_tls_hz", 0.0);
    ec.q2_tls_hz = nonnegative(cr, "q2_tls_hz", 0.0);
    ec.q1_q2_hz = nonnegative(cr, "q1_q2_hz", 0.0);
    cr.reject_unknown();
    ctx.couplings = ec;
  }
  return ctx;
}

class Sink {
 public:
  explicit Sink(std::string dir) : dir_(std::move(dir)) {}
  void write(const std::string& name, std::string_view content) {
    write_text_file((std::filesystem::path(dir_) / name).string(), content);
    files_.emplace_back(name, sha256_hex(content));
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

// Each pipeline parses its parameters first; with no sink it stops there.
using PipelineFn = std::function<void(const ExperimentConfig&, Sink*)>;

void double_swap_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const ProtocolContext ctx = read_context(c, r);
  const auto t1 = read_grid(r, "t1_s", linspace(0.0, 300e-9, 31));
  const auto t2 = read_grid(r, "t2_s", linspace(0.0, 300e-9, 31));
  require_nonnegative(t1, r, "t1_s");
  require_nonnegative(t2, r, "t2_s");
  r.reject_unknown();
  if (!sink) return;
  sink->write("double_swap.csv", sweep_csv(double_swap_map(ctx, t1, t2)));
}

void coherence_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const ProtocolContext ctx = read_context(c, r);
  CoherencePlan plan;
  plan.rabi_hz = positive(r, "rabi_hz", 10e6);
  plan.rabi_durations = read_grid(r, "rabi_s", linspace(0.0, 400e-9, 81));
  plan.t1_delays = read_grid(r, "t1_s", linspace(0.0, 150e-6, 31));
  plan.ramsey_delays = read_grid(r, "ramsey_s", linspace(0.0, 1.5e-6, 31));
  plan.echo_delays = read_grid(r, "echo_s", linspace(0.0, 60e-6, 31));
  plan.cpmg_delays = read_grid(r, "cpmg_s", linspace(0.0, 80e-6, 31));
  for (const auto* g : {&plan.rabi_durations, &plan.t1_delays, &plan.ramsey_delays, &plan.echo_delays,
                        &plan.cpmg_delays}) {
    if (g->front() < 0.0) schema_error("params", "delay grids must be >= 0");
  }
  if (r.has("cpmg_pulses")) {
    for (double n : r.numbers("cpmg_pulses")) {
      if (n < 1 || n != std::floor(n) || n > 4096) schema_error(r.child_path("cpmg_pulses"), "entries must be integers in [1, 4096]");
      plan.cpmg_pulses.push_back(static_cast<int>(n));
    }
  } else {
    plan.cpmg_pulses = {1, 2, 4, 8, 16};
  }
  r.reject_unknown();
  if (!sink) return;
  const CoherenceSuite s = run_coherence_suite(ctx, plan);
  Json fits = Json::object();
  sink->write("rabi.csv", sim_result_csv(*s.rabi));
  fits["rabi"] = to_json(*s.rabi_fit);
  sink->write("t1.csv", sim_result_csv(*s.t1));
  fits["t1"] = to_json(*s.t1_fit);
  sink->write("ramsey.csv", sim_result_csv(*s.ramsey));
  fits["ramsey"] = to_json(*s.ramsey_fit);
  sink->write("echo.csv", sim_result_csv(*s.echo));
  fits["echo"] = to_json(*s.echo_fit);
  Json cp = Json::array();
  for (std::size_t i = 0; i < s.cpmg.size(); ++i) {
    const std::string n = std::to_string(plan.cpmg_pulses[i]);
    sink->write("cpmg_n" + n + ".csv", sim_result_csv(s.cpmg[i]));
    cp.push_back({{"n_pulses", plan.cpmg_pulses[i]}, {"fit", to_json(s.cpmg_fits[i])}});
  }
  fits["cpmg"] = cp;
  sink->write_json("fits.json", fits);
}

void chevron_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const ProtocolContext ctx = read_context(c, r);
  const Element qubit = element_param(r, "qubit", Element::Q1);
  if (qubit != Element::Q1 && qubit != Element::Q2) schema_error(r.child_path("qubit"), "must be q1 or q2");
  const auto deltas = read_grid(r, "delta_hz", linspace(-10e6, 10e6, 41));
  const auto delays = read_grid(r, "delays_s", logspace(10e-9, 100e-6, 60));
  const auto rate_delays = read_grid(r, "rate_delays_s", linspace(0.0, 40e-6, 1601));
  require_nonnegative(delays, r, "delays_s");
  require_nonnegative(rate_delays, r, "rate_delays_s");
  r.reject_unknown();
  if (!sink) return;
  sink->write("chevron.csv", sweep_csv(relaxation_chevron(ctx, deltas, delays, qubit)));

  const double g_eff = ctx.couplings ? (qubit == Element::Q1 ? ctx.couplings->q1_tls_hz : ctx.couplings->q2_tls_hz)
                                     : (qubit == Element::Q1 ? effective_coupling(ctx.device).g_eff_1
                                                             : effective_coupling(ctx.device).g_eff_2);
  const double g1q = ctx.device.gamma1(qubit);
  const double g1t = ctx.device.gamma1_tls;
  std::vector<OscAvgResult> fits(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t i) {
    ProtocolContext pc = ctx;
    pc.seed = stream_seed(ctx.seed, deltas.size() + i);
    const SimResult tr = relaxation_trace(pc, deltas[i], rate_delays, qubit);
    fits[i] = extract_osc_avg(rate_delays, tr.observable("p_" + std::string(element_name(qubit))));
  });
  std::ostringstream out;
  out << "# g_eff_hz: " << format_double(g_eff) << "\n";
  out << "delta_hz,gamma_osc_per_s,f_osc_hz,gamma_avg_per_s,gamma_avg_theory_as_published,"
         "gamma_avg_theory_eigenvector\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    out << format_double(deltas[i]) << ',' << format_double(fits[i].gamma_osc.value_or(nan)) << ','
        << format_double(fits[i].f_osc.value_or(nan)) << ',' << format_double(fits[i].gamma_avg) << ','
        << format_double(gamma_avg_theory(g1q, g1t, g_eff, deltas[i], MixingConvention::AsPublished)) << ','
        << format_double(gamma_avg_theory(g1q, g1t, g_eff, deltas[i], MixingConvention::EigenvectorWeights))
        << '\n';
  }
  sink->write("rates.csv", out.str());
}

void psd_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const ProtocolContext ctx = read_context(c, r);
  if (!c.noise) schema_error("noise", "fig3-psd needs a noise model");
  PsdPlan plan;
  plan.sampling_intervals_s = r.numbers("sampling_intervals_s", plan.sampling_intervals_s);
  if (plan.sampling_intervals_s.empty()) schema_error(r.child_path("sampling_intervals_s"), "must not be empty");
  plan.tau = positive(r, "tau_s", plan.tau);
  for (double ts : plan.sampling_intervals_s) {
    if (!(ts > plan.tau)) schema_error(r.child_path("sampling_intervals_s"), "every interval must exceed tau_s");
  }
  plan.n_samples = r.unsigned_integer("n_samples", plan.n_samples);
  plan.segment_len = r.unsigned_integer("segment_len", plan.segment_len);
  if (plan.segment_len < 8 || plan.n_samples < 4 * plan.segment_len) {
    schema_error(r.child_path("n_samples"), "must be at least 4 * segment_len (segment_len >= 8)");
  }
  plan.shots_per_point = r.unsigned_integer("shots_per_point", plan.shots_per_point);
  plan.band_top_fraction = positive(r, "band_top_fraction", plan.band_top_fraction);
  if (plan.band_top_fraction > 1.0) schema_error(r.child_path("band_top_fraction"), "must be <= 1");
  plan.band_skip_bins = r.unsigned_integer("band_skip_bins", plan.band_skip_bins);
  plan.spinlock_rabi_hz = r.numbers("spinlock_rabi_hz", plan.spinlock_rabi_hz);
  for (double o : plan.spinlock_rabi_hz) {
    if (!(o > 0.0)) schema_error(r.child_path("spinlock_rabi_hz"), "entries must be > 0");
  }
  plan.spinlock_duration_s = positive(r, "spinlock_duration_s", plan.spinlock_duration_s);
  plan.spinlock_points = r.unsigned_integer("spinlock_points", plan.spinlock_points);
  if (plan.spinlock_points < 5) schema_error(r.child_path("spinlock_points"), "must be >= 5");
  plan.spinlock_trajectories = c.trajectories;
  plan.stitch.bins_per_decade = r.integer("bins_per_decade", plan.stitch.bins_per_decade);
  if (plan.stitch.bins_per_decade < 1) schema_error(r.child_path("bins_per_decade"), "must be >= 1");
  plan.lorentzians = r.integer("lorentzians", plan.lorentzians);
  if (plan.lorentzians < 0) schema_error(r.child_path("lorentzians"), "must be >= 0");
  plan.fit_f_lo = nonnegative(r, "fit_f_lo_hz", 0.0);
  plan.fit_f_hi = nonnegative(r, "fit_f_hi_hz", 0.0);
  r.reject_unknown();
  if (!sink) return;

  const PsdReconstruction p = reconstruct_psd(ctx, plan);
  for (std::size_t b = 0; b < p.bands.size(); ++b) {
    sink->write("band_" + std::to_string(b) + ".csv", spectrum_csv(p.bands[b]));
  }
  if (p.spinlock.size() > 0) sink->write("spinlock.csv", spectrum_csv(p.spinlock));
  const SpectrumEstimate& s = p.stitched.spectrum;
  sink->write("stitched.csv", spectrum_csv(s));
  sink->write("analytic.csv", spectrum_csv(ensemble_psd(*c.noise, s.freqs)));

  double longest = 0.0;
  for (std::size_t b = 0; b < p.series.size(); ++b) {
    longest = std::max(longest, plan.sampling_intervals_s[b] * static_cast<double>(plan.n_samples));
  }
  RamseyOptions ro;
  ro.experiment_duration_s = longest;
  Json bands = Json::array();
  for (std::size_t b = 0; b < p.bands.size(); ++b) {
    bands.push_back({{"ts_s", plan.sampling_intervals_s[b]}, {"flags", p.series[b].flags}});
  }
  Json spin = Json::array();
  for (std::size_t i = 0; i < p.spinlock_fits.size(); ++i) {
    spin.push_back({{"rabi_hz", plan.spinlock_rabi_hz[i]}, {"fit", to_json(p.spinlock_fits[i])}});
  }
  const Json summary = {
      {"contrast", p.contrast},
      {"consistency_db", p.stitched.consistency_db},
      {"power_law", to_json(p.power_law)},
      {"lorentzians", to_json(p.lorentzians)},
      {"model_log_slope", ensemble_log_slope(*c.noise, s.freqs.front(), s.freqs.back())},
      {"ramsey_t2_from_stitched_s", ramsey_prediction(s, 1e-7, ro).t2_s},
      {"ramsey_t2_from_model_s", ramsey_prediction(*c.noise, 1e-7, ro).t2_s},
      {"bands", bands},
      {"spinlock", spin},
  };
  sink->write_json("fits.json", summary);
}

void tomo_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const ProtocolContext ctx = read_context(c, r);
  const auto deltas = read_grid(r, "delta_hz", linspace(-6e6, 6e6, 25));
  const auto delays = read_grid(r, "delays_s", linspace(0.0, 1e-6, 41));
  require_nonnegative(delays, r, "delays_s");
  const std::uint64_t shots = r.unsigned_integer("shots_per_basis", 2000);
  const double q2_offset = r.number("q2_offset_hz", 1e6);
  std::vector<std::string> states{"11", "10"};
  if (r.has("initial_states")) {
    const Json& arr = r.at("initial_states");
    if (!arr.is_array() || arr.empty()) schema_error(r.child_path("initial_states"), "expected a non-empty array");
    states.clear();
    for (const auto& v : arr) {
      if (!v.is_string()) schema_error(r.child_path("initial_states"), "entries must be strings");
      const std::string s = v.get<std::string>();
      if (s != "00" && s != "01" && s != "10" && s != "11") {
        schema_error(r.child_path("initial_states"), "entries must be one of 00, 01, 10, 11");
      }
      states.push_back(s);
    }
  }
  r.reject_unknown();
  if (!sink) return;
  for (std::size_t si = 0; si < states.size(); ++si) {
    ProtocolContext pc = ctx;
    pc.seed = stream_seed(ctx.seed, si);
    const IdlePairResult res = idle_pair_experiment(pc, deltas, delays, states[si], q2_offset);
    SweepResult2D pur{"delay", "s", "delta", "Hz", "purity", delays, deltas,
                      Eigen::MatrixXd(deltas.size(), delays.size())};
    SweepResult2D con = pur;
    con.z_name = "concurrence";
    const std::uint64_t tomo_seed = stream_seed(ctx.seed, 1000 + si);
    parallel_for(deltas.size() * delays.size(), [&](std::size_t k) {
      const std::size_t i = k / delays.size();
      const std::size_t j = k % delays.size();
      const TomoResult t = simulate_tomography(res.rho[i][j], shots, stream_seed(tomo_seed, k));
      pur.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.purity;
      con.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.concurrence;
    });
    sink->write("purity_" + states[si] + ".csv", sweep_csv(pur));
    sink->write("concurrence_" + states[si] + ".csv", sweep_csv(con));
  }
}

struct GateParams {
  double t_gate = 60e-9;
  double gamma1_tls = 0.0;
  double gamma_phi_tls = 0.0;
  std::vector<std::string> couplings{"one", "both"};
};

GateParams read_gate_params(const ExperimentConfig& c, const JsonReader& r, double default_phi) {
  GateParams g;
  g.t_gate = positive(r, "t_gate_s", g.t_gate);
  g.gamma1_tls = nonnegative(r, "gamma1_tls", c.device.gamma1_tls);
  g.gamma_phi_tls = nonnegative(r, "gamma_phi_tls", default_phi);
  if (r.has("couplings")) {
    const Json& arr = r.at("couplings");
    if (!arr.is_array() || arr.empty()) schema_error(r.child_path("couplings"), "expected a non-empty array");
    g.couplings.clear();
    for (const auto& v : arr) {
      if (!v.is_string() || (v.get<std::string>() != "one" && v.get<std::string>() != "both")) {
        schema_error(r.child_path("couplings"), "entries must be 'one' or 'both'");
      }
      g.couplings.push_back(v.get<std::string>());
    }
  }
  return g;
}

GateSpec gate_spec(const ExperimentConfig& c, const GateParams& g, double delta, double g_eff, bool both) {
  GateSpec s;
  s.delta_hz = delta;
  s.g_eff_hz = g_eff;
  s.both_qubits = both;
  s.t_gate = g.t_gate;
  s.gamma1_tls = g.gamma1_tls;
  s.gamma_phi_tls = g.gamma_phi_tls;
  (void)c;
  return s;
}

void gate_scan_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const auto deltas = read_grid(r, "delta_hz", linspace(-500e6, 500e6, 201));
  const auto g_list = r.numbers("g_eff_hz", {1e6, 3e6, 10e6});
  for (double g : g_list) {
    if (g < 0.0) schema_error(r.child_path("g_eff_hz"), "entries must be >= 0");
  }
  const GateParams gp = read_gate_params(c, r, c.device.gamma_phi_tls);
  r.reject_unknown();
  if (!sink) return;
  const std::size_t per_g = gp.couplings.size() * deltas.size();
  std::vector<double> err(g_list.size() * per_g);
  parallel_for(err.size(), [&](std::size_t k) {
    const std::size_t gi = k / per_g;
    const std::size_t ci = (k % per_g) / deltas.size();
    const std::size_t di = k % deltas.size();
    err[k] = iswap_gate_error(gate_spec(c, gp, deltas[di], g_list[gi], gp.couplings[ci] == "both"), c.device);
  });
  std::ostringstream out;
  out << "# t_gate_s: " << format_double(gp.t_gate) << "\n# gamma1_tls: " << format_double(gp.gamma1_tls)
      << "\n# gamma_phi_tls: " << format_double(gp.gamma_phi_tls) << "\n";
  out << "g_eff_hz,coupling,delta_hz,average_gate_fidelity,gate_error\n";
  for (std::size_t k = 0; k < err.size(); ++k) {
    const std::size_t gi = k / per_g;
    const std::size_t ci = (k % per_g) / deltas.size();
    const std::size_t di = k % deltas.size();
    out << format_double(g_list[gi]) << ',' << gp.couplings[ci] << ',' << format_double(deltas[di]) << ','
        << format_double(1.0 - err[k]) << ',' << format_double(err[k]) << '\n';
  }
  sink->write("gate_scan.csv", out.str());
}

void zeno_pipeline(const ExperimentConfig& c, Sink* sink) {
  JsonReader r(c.params, "params");
  const auto deltas = r.numbers("delta_hz", {10e6, 20e6, 50e6});
  const double g_eff = nonnegative(r, "g_eff_hz", 1e6);
  const auto rates = read_grid(r, "gamma1_tls_grid", logspace(1e5, 3e9, 81));
  if (rates.front() <= 0.0) schema_error(r.child_path("gamma1_tls_grid"), "rates must be > 0");
  const GateParams gp = read_gate_params(c, r, 0.0);
  r.reject_unknown();
  if (!sink) return;
  const std::size_t per_d = gp.couplings.size() * rates.size();
  std::vector<double> err(deltas.size() * per_d);
  parallel_for(err.size(), [&](std::size_t k) {
    const std::size_t di = k / per_d;
    const std::size_t ci = (k % per_d) / rates.size();
    GateParams local = gp;
    local.gamma1_tls = rates[k % rates.size()];
    err[k] = iswap_gate_error(gate_spec(c, local, deltas[di], g_eff, gp.couplings[ci] == "both"), c.device);
  });
  std::ostringstream out;
  out << "# g_eff_hz: " << format_double(g_eff) << "\n# gamma_phi_tls: " << format_double(gp.gamma_phi_tls)
      << "\n";
  out << "delta_hz,coupling,gamma1_tls_per_s,gate_error\n";
  Json peaks = Json::array();
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    for (std::size_t ci = 0; ci < gp.couplings.size(); ++ci) {
      const std::size_t base = di * per_d + ci * rates.size();
      std::size_t best = 0;
      for (std::size_t k = 0; k < rates.size(); ++k) {
        out << format_double(deltas[di]) << ',' << gp.couplings[ci] << ',' << format_double(rates[k]) << ','
            << format_double(err[base + k]) << '\n';
        if (err[base + k] > err[base + best]) best = k;
      }
      const bool interior = best > 0 && best + 1 < rates.size();
      peaks.push_back({{"delta_hz", deltas[di]},
                       {"coupling", gp.couplings[ci]},
                       {"argmax_gamma1_tls", rates[best]},
                       {"max_gate_error", err[base + best]},
                       {"interior_maximum", interior},
                       {"argmax_over_delta", deltas[di] != 0.0 ? rates[best] / std::abs(deltas[di]) : 0.0},
                       {"argmax_over_two_pi_delta",
                        deltas[di] != 0.0 ? rates[best] / (kTwoPi * std::abs(deltas[di])) : 0.0}});
    }
  }
  sink->write("zeno.csv", out.str());
  sink->write_json("zeno_peaks.json", peaks);
}

const PipelineFn& pipeline_fn(const std::string& name) {
  static const std::vector<std::pair<std::string_view, PipelineFn>> table = {
      {kPipelineNames[0], double_swap_pipeline}, {kPipelineNames[1], coherence_pipeline},
      {kPipelineNames[2], chevron_pipeline},     {kPipelineNames[3], psd_pipeline},
      {kPipelineNames[4], tomo_pipeline},        {kPipelineNames[5], gate_scan_pipeline},
      {kPipelineNames[6], zeno_pipeline},
  };
  for (const auto& [n, fn] : table) {
    if (n == name) return fn;
  }
  schema_error("pipeline", "unknown pipeline '" + name + "'");
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  JsonReader r(j, "");
  ExperimentConfig c;
  c.pipeline = r.string("pipeline");
  pipeline_fn(c.pipeline);
  c.seed = r.unsigned_integer("seed");
  c.trajectories = r.integer("trajectories", 1);
  if (c.trajectories < 1) schema_error("trajectories", "must be >= 1");
  if (r.has("device")) c.device = device_from_json(r.at("device"), "device");
  if (r.has("noise")) c.noise = noise_from_json(r.at("noise"), "noise");
  if (r.has("params")) {
    c.params = r.at("params");
    if (!c.params.is_object()) schema_error("params", "expected an object");
  }
  c.output_dir = r.string("output_dir", "");
  r.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Schema, "", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

Json to_json(const ExperimentConfig& c) {
  Json j = {{"pipeline", c.pipeline},
            {"seed", c.seed},
            {"trajectories", c.trajectories},
            {"device", to_json(c.device)},
            {"params", c.params}};
  if (c.noise) j["noise"] = to_json(*c.noise);
  return j;
}

std::string config_hash(const ExperimentConfig& c) { return sha256_hex(to_json(c).dump()); }

void check_config(const ExperimentConfig& c) {
  try {
    pipeline_fn(c.pipeline)(c, nullptr);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Schema) throw;
    fail(ErrorKind::Schema, e.context(), e.what());
  }
}

std::vector<std::string> validate_config_file(const std::string& path) {
  try {
    check_config(load_config(path));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Schema) throw;
    return {e.what()};
  }
  return {};
}

std::span<const PipelineInfo> list_pipelines() { return kPipelines; }

RunSummary run_pipeline(const ExperimentConfig& c, const std::string& out_dir) {
  check_config(c);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, out_dir, "cannot create output directory: " + ec.message());
  Sink sink(out_dir);
  pipeline_fn(c.pipeline)(c, &sink);

  RunSummary summary;
  summary.config_sha256 = config_hash(c);
  Json artifacts = Json::array();
  for (const auto& [name, digest] : sink.files()) {
    artifacts.push_back({{"file", name}, {"sha256", digest}});
    summary.artifacts.push_back(name);
  }
  const Json manifest = {
      {"pipeline", c.pipeline},
      {"config_sha256", summary.config_sha256},
      {"seed", c.seed},
      {"trajectories", c.trajectories},
      {"versions",
       {{"tlslab", TLSLAB_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"fftw", std::string(fftw_version)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
      {"config", to_json(c)},
      {"artifacts", artifacts},
  };
  write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  summary.artifacts.push_back("manifest.json");
  return summary;
}

}  // namespace tlslab
