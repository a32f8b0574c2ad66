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


#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tlslab/analysis.hpp"
#include "tlslab/experiments.hpp"
#include "tlslab/io.hpp"
#include "tlslab/protocols.hpp"
#include "tlslab/tomography.hpp"

using namespace tlslab;

namespace {

constexpr double kPi = std::numbers::pi;

DeviceParams quiet_device() {
  DeviceParams p;
  p.gamma1_q1 = p.gamma1_q2 = p.gamma1_c = p.gamma1_tls = 0.0;
  p.gamma_phi_q1 = p.gamma_phi_q2 = p.gamma_phi_c = p.gamma_phi_tls = 0.0;
  return p;
}

ProtocolContext quiet_context() {
  ProtocolContext ctx;
  ctx.device = quiet_device();
  return ctx;
}

std::vector<double> centered(const std::vector<double>& p) {
  std::vector<double> y(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) y[i] = 2.0 * p[i] - 1.0;
  return y;
}

// Single-excitation oracle for |10> with both qubits detuned from the TLS; returns the
// two-qubit purity after tracing out the TLS.
double single_excitation_purity(double g1, double g2, double d1, double d2, double t) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(0, 0) = d1;
  h(1, 1) = d2;
  h(0, 2) = h(2, 0) = g1;
  h(1, 2) = h(2, 1) = g2;
  h *= 2.0 * kPi;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
  Eigen::Vector3cd phase;
  for (int i = 0; i < 3; ++i) phase(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  const Eigen::Matrix3cd v = es.eigenvectors().cast<cplx>();
  const Eigen::Vector3cd psi = v * phase.asDiagonal() * v.adjoint() * Eigen::Vector3cd(1.0, 0.0, 0.0);
  const double q = std::norm(psi(0)) + std::norm(psi(1));
  const double tls = std::norm(psi(2));
  return q * q + tls * tls;
}

}  // namespace

TEST_SUITE("protocols") {

TEST_CASE("Rabi oscillation period and damping") {
  ProtocolContext ctx = quiet_context();
  const auto t = linspace(0.0, 2e-6, 401);
  const SimResult r = rabi(ctx, 1e6, t);
  const auto& p = r.observable("p_tls");
  const auto first = std::max_element(p.begin(), p.begin() + 200) - p.begin();
  CHECK(t[static_cast<std::size_t>(first)] == doctest::Approx(0.5e-6).epsilon(0.02));
  CHECK(p[static_cast<std::size_t>(first)] == doctest::Approx(1.0).epsilon(1e-6));

  const SimResult flat = rabi(ctx, 0.0, t);
  for (double v : flat.observable("p_tls")) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  ctx.device.gamma1_tls = 1.0 / 2e-6;
  const auto tl = linspace(0.0, 8e-6, 801);
  const SimResult d = rabi(ctx, 2e6, tl);
  const FitResult f = fit_damped_cosine(tl, d.observable("p_tls"));
  // Torrey envelope for a strong resonant drive with relaxation only: 3 Gamma_1 / 4.
  CHECK(f.value("gamma") == doctest::Approx(0.75 * ctx.device.gamma1_tls).epsilon(0.10));
  CHECK(f.value("freq") == doctest::Approx(2e6).epsilon(0.01));
}

TEST_CASE("T1 protocol recovers the relaxation time") {
  ProtocolContext ctx = quiet_context();
  ctx.device.gamma1_tls = 1.0 / 44.7e-6;
  const auto t = linspace(0.0, 150e-6, 31);
  const SimResult r = t1_protocol(ctx, t);
  const FitResult f = fit_exponential(t, r.observable("p_tls"));
  CHECK(f.value("tau") == doctest::Approx(44.7e-6).epsilon(1e-4));
}

TEST_CASE("Ramsey and echo under white dephasing decay at Gamma_phi") {
  ProtocolContext ctx = quiet_context();
  ctx.device.gamma_phi_tls = 1.0 / 1.1e-6;
  const auto t = linspace(0.0, 4e-6, 41);
  const SimResult ram = ramsey(ctx, t);
  const SimResult ech = echo(ctx, t);
  CHECK(ram.observable("p_tls").front() == doctest::Approx(1.0));
  const FitResult fr = fit_exponential(t, centered(ram.observable("p_tls")));
  const FitResult fe = fit_exponential(t, centered(ech.observable("p_tls")));
  CHECK(1.0 / fr.value("tau") == doctest::Approx(ctx.device.gamma_phi_tls).epsilon(0.05));
  CHECK(1.0 / fe.value("tau") == doctest::Approx(ctx.device.gamma_phi_tls).epsilon(0.05));
}

TEST_CASE("virtual detuning advances the final pulse phase") {
  ProtocolContext ctx = quiet_context();
  const std::vector<double> t{0.0, 0.1e-6, 0.2e-6};
  const SimResult r = ramsey(ctx, t, 5e6);
  CHECK(r.observable("p_tls")[0] == doctest::Approx(1.0));
  CHECK(r.observable("p_tls")[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(r.observable("p_tls")[2] == doctest::Approx(1.0));
}

TEST_CASE("quasi-static noise: Gaussian Ramsey decay, fully refocused by echo and CPMG") {
  ProtocolContext ctx = quiet_context();
  NoiseModel n;
  n.quasi_static_sigma_hz = 4e5;
  ctx.noise = n;
  ctx.n_trajectories = 2000;
  ctx.seed = 17;
  const auto t = linspace(0.0, 1.5e-6, 31);
  const SimResult ram = ramsey(ctx, t);
  const FitResult g = fit_gaussian_decay(t, centered(ram.observable("p_tls")));
  CHECK(g.value("tau") == doctest::Approx(std::sqrt(2.0) / (2.0 * kPi * n.quasi_static_sigma_hz)).epsilon(0.05));
  const FitResult e = fit_exponential(t, centered(ram.observable("p_tls")));
  CHECK(g.residual_norm < e.residual_norm);
  for (int pulses : {1, 4}) {
    const SimResult ech = cpmg(ctx, t, pulses);
    for (double v : ech.observable("p_tls")) CHECK(v > 0.99);
  }
}

TEST_CASE("CPMG rejects a zero pulse count") {
  ProtocolContext ctx = quiet_context();
  const std::vector<double> t{0.0, 1e-6};
  CHECK_THROWS_AS(cpmg(ctx, t, 0), Error);
  const std::vector<double> desc{1e-6, 0.0};
  CHECK_THROWS_AS(ramsey(ctx, desc), Error);
}

TEST_CASE("double swap transfers Q1 to Q2 through the TLS") {
  ProtocolContext ctx = quiet_context();
  const EffectiveParams ep = effective_coupling(ctx.device);
  const auto grid = linspace(0.0, 300e-9, 61);
  const SweepResult2D m = double_swap_map(ctx, grid, grid);
  CHECK_NOTHROW(m.validate());
  for (Eigen::Index j = 0; j < m.z.cols(); ++j) CHECK(m.z(0, j) < 1e-3);
  Eigen::Index bi = 0, bj = 0;
  const double peak = m.z.maxCoeff(&bi, &bj);
  CHECK(peak >= 0.95);
  const double step = grid[1] - grid[0];
  CHECK(std::abs(m.y[static_cast<std::size_t>(bi)] - 1.0 / (4.0 * ep.g_eff_1)) <= step);
  CHECK(std::abs(m.x[static_cast<std::size_t>(bj)] - 1.0 / (4.0 * ep.g_eff_2)) <= step);
}

TEST_CASE("relaxation chevron: decoupled rows, centre frequency, symmetry") {
  ProtocolContext ctx;
  ctx.device.gamma_phi_tls = 0.0;
  ctx.rise_fall = 0.0;
  const double g = effective_coupling(ctx.device).g_eff_1;
  ctx.couplings = EffectiveCouplings{g, 0.0, 0.0};
  const auto delays = linspace(0.0, 2e-6, 401);
  const std::vector<double> deltas{-300e-6 * 1e12, -3e6, 0.0, 3e6, 300e-6 * 1e12};
  const SweepResult2D c = relaxation_chevron(ctx, deltas, delays);
  for (Eigen::Index j = 0; j < c.z.cols(); ++j) {
    const double bare = std::exp(-ctx.device.gamma1_q1 * delays[static_cast<std::size_t>(j)]);
    CHECK(std::abs(c.z(0, j) - bare) < 2e-3);
    CHECK(std::abs(c.z(4, j) - bare) < 2e-3);
    CHECK(std::abs(c.z(1, j) - c.z(3, j)) < 1e-3);
  }
  std::vector<double> centre(delays.size());
  for (std::size_t j = 0; j < delays.size(); ++j) centre[j] = c.z(2, static_cast<Eigen::Index>(j));
  CHECK(oracle::dominant_frequency(delays, centre, 1e6, 10e6) == doctest::Approx(2.0 * g).epsilon(0.03));
}

TEST_CASE("interaction bandwidth scales with the effective coupling") {
  auto bandwidth = [](double delta_c) {
    ProtocolContext ctx = quiet_context();
    ctx.device.f_c = ctx.device.f_tls + delta_c;
    ctx.rise_fall = 0.0;
    const auto deltas = linspace(-40e6, 40e6, 161);
    const auto delays = linspace(0.0, 1e-6, 201);
    const SweepResult2D c = relaxation_chevron(ctx, deltas, delays);
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index i = 0; i < c.z.rows(); ++i) {
      if (1.0 - c.z.row(i).minCoeff() > 0.10) {
        lo = std::min(lo, deltas[static_cast<std::size_t>(i)]);
        hi = std::max(hi, deltas[static_cast<std::size_t>(i)]);
      }
    }
    return hi - lo;
  };
  const double wide = bandwidth(0.5e9);
  const double narrow = bandwidth(1e9);
  CHECK(wide / narrow == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("spin locking matches a direct Lindblad integration without noise") {
  ProtocolContext ctx = quiet_context();
  ctx.device.gamma1_tls = 1.0 / 10e-6;
  const auto t = linspace(0.0, 20e-6, 21);
  const std::vector<double> omegas{1e6};
  const SimResult r = spin_locking(ctx, omegas, t).front();
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd sx90;
  sx90 << s, cplx(0, -s), cplx(0, -s), s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    rho(0, 0) = 1.0;
    rho = sx90 * rho * sx90.adjoint();
    rho = oracle::lindblad_qubit(rho, 0.0, 1e6, 0.5 * kPi, ctx.device.gamma1_tls, 0.0, t[i], 4000 + 2000 * static_cast<int>(i));
    rho = sx90 * rho * sx90.adjoint();
    CHECK(r.observable("p_tls")[i] == doctest::Approx(rho(1, 1).real()).epsilon(1e-6));
  }
  const FitResult f = fit_exponential(t, r.observable("p_tls"), true);
  CHECK(1.0 / f.value("tau") == doctest::Approx(0.5 * ctx.device.gamma1_tls).epsilon(0.05));
}

TEST_CASE("spin locking is most sensitive to a fluctuator whose corner matches the drive") {
  const double omega = 1e6;
  const double corner = kPi * omega;  // 2 gamma = 2 pi Omega
  std::vector<double> rates;
  for (double gamma : {corner / 10.0, corner, corner * 10.0}) {
    ProtocolContext ctx = quiet_context();
    NoiseModel n;
    n.fluctuators.push_back({1.8e5, gamma, 0.5});
    ctx.noise = n;
    ctx.n_trajectories = 200;
    ctx.seed = 5;
    const auto t = linspace(0.0, 20e-6, 21);
    const std::vector<double> om{omega};
    const SimResult r = spin_locking(ctx, om, t).front();
    rates.push_back(1.0 / fit_exponential(t, r.observable("p_tls"), true).value("tau"));
  }
  CHECK(rates[1] > 1.5 * rates[0]);
  CHECK(rates[1] > 1.5 * rates[2]);
}

TEST_CASE("repeated Ramsey basics") {
  ProtocolContext ctx = quiet_context();
  RepeatedRamseyOptions o;
  o.ts = 1e-3;
  o.n_samples = 4096;
  o.shots_per_point = 100;
  const RepeatedRamseyResult r = repeated_ramsey(ctx, o);
  double mean = 0.0;
  for (double p : r.probabilities) mean += p;
  mean /= static_cast<double>(r.probabilities.size());
  CHECK(mean == doctest::Approx(0.5).epsilon(5.0 * 0.05 / std::sqrt(4096.0) / 0.5));
  CHECK(r.times[1] == doctest::Approx(1e-3));

  RepeatedRamseyOptions bad = o;
  bad.ts = 100e-9;
  CHECK_THROWS_AS(repeated_ramsey(ctx, bad), Error);
}

TEST_CASE("repeated Ramsey transduces an injected modulation") {
  ProtocolContext ctx = quiet_context();
  RepeatedRamseyOptions o;
  o.ts = 1e-3;
  o.n_samples = 4096;
  o.shots_per_point = 0;
  o.modulation = Modulation{50e3, 37.0, 0.0};
  const RepeatedRamseyResult r = repeated_ramsey(ctx, o);
  const TransduceResult tr = transduce(r.probabilities, o.tau, 1.0);
  const SpectrumEstimate s = welch_psd(tr.offsets_hz, o.ts, 1024);
  const auto peak = std::max_element(s.psd.begin(), s.psd.end()) - s.psd.begin();
  CHECK(std::abs(s.freqs[static_cast<std::size_t>(peak)] - 37.0) <= 1.0 / (1024 * o.ts));
  double power = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) power += s.psd[i] * (s.freqs[1] - s.freqs[0]);
  CHECK(power == doctest::Approx(0.5 * 50e3 * 50e3).epsilon(0.10));
}

TEST_CASE("repeated Ramsey noise is continuous across repetitions") {
  ProtocolContext ctx = quiet_context();
  NoiseModel n;
  n.fluctuators.push_back({2e5, 5.0, 0.5});
  ctx.noise = n;
  ctx.seed = 8;
  RepeatedRamseyOptions o;
  o.ts = 1e-3;
  o.n_samples = 8192;
  o.shots_per_point = 0;
  const RepeatedRamseyResult r = repeated_ramsey(ctx, o);
  const auto c = oracle::autocorrelation(r.probabilities, 20);
  // Telegraph correlation exp(-2 gamma k ts).
  CHECK(c[1] / c[0] == doctest::Approx(std::exp(-2.0 * 5.0 * 1e-3)).epsilon(0.05));
  CHECK(c[20] / c[0] == doctest::Approx(std::exp(-2.0 * 5.0 * 20e-3)).epsilon(0.10));
}

TEST_CASE("idle pair: dark ground state and single-excitation oracle") {
  ProtocolContext ctx = quiet_context();
  ctx.rise_fall = 0.0;
  ctx.couplings = EffectiveCouplings{2e6, 1.5e6, 0.0};
  const std::vector<double> deltas{-2e6, 0.0, 1.5e6};
  const auto delays = linspace(0.0, 1e-6, 21);
  const IdlePairResult ground = idle_pair_experiment(ctx, deltas, delays, "00", 1e6);
  for (const auto& row : ground.rho)
    for (const auto& rho : row) CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-10));

  const IdlePairResult one = idle_pair_experiment(ctx, deltas, delays, "10", 1e6);
  double lowest = 1.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    for (std::size_t j = 0; j < delays.size(); ++j) {
      const double ref = single_excitation_purity(2e6, 1.5e6, deltas[i], deltas[i] + 1e6, delays[j]);
      CHECK(purity(one.rho[i][j]) == doctest::Approx(ref).epsilon(1e-6));
      lowest = std::min(lowest, purity(one.rho[i][j]));
    }
  }
  CHECK(lowest < 0.7);
  CHECK_THROWS_AS(idle_pair_experiment(ctx, deltas, delays, "12"), Error);
}

TEST_CASE("idle pair |11> entangles at 1/(4 sqrt2 g)") {
  ProtocolContext ctx = quiet_context();
  ctx.rise_fall = 0.0;
  const double g = 2e6;
  ctx.couplings = EffectiveCouplings{g, g, 0.0};
  const double t_star = 1.0 / (4.0 * std::sqrt(2.0) * g);
  const std::vector<double> deltas{0.0};
  const std::vector<double> delays{0.0, t_star};
  const IdlePairResult r = idle_pair_experiment(ctx, deltas, delays, "11");
  CHECK(concurrence(r.rho[0][0]) < 1e-9);
  CHECK(concurrence(r.rho[0][1]) > 0.99);
}

TEST_CASE("iSWAP with a decoupled TLS is ideal") {
  GateSpec s;
  s.g_eff_hz = 0.0;
  s.gamma1_tls = 0.0;
  s.gamma_phi_tls = 0.0;
  s.delta_hz = 37e6;
  CHECK(iswap_gate_error(s) < 1e-9);
  const GateExperiment g = iswap_gate_experiment(s);
  CHECK((g.ideal - iswap_matrix()).norm() == 0.0);
}

TEST_CASE("iSWAP error ordering and monotonicity") {
  const auto deltas = linspace(-500e6, 500e6, 41);
  for (double g : {1e6, 3e6}) {
    for (double d : deltas) {
      GateSpec one;
      one.delta_hz = d;
      one.g_eff_hz = g;
      GateSpec both = one;
      both.both_qubits = true;
      CHECK(iswap_gate_error(both) >= iswap_gate_error(one));
    }
  }
  double previous = 1.0;
  for (double d : linspace(50e6, 500e6, 10)) {
    GateSpec s;
    s.delta_hz = d;
    s.g_eff_hz = 3e6;
    s.both_qubits = true;
    const double e = iswap_gate_error(s);
    CHECK(e < previous);
    previous = e;
  }
  for (double d : {-200e6, 100e6, 300e6}) {
    double last = 0.0;
    for (double g : {1e6, 3e6, 10e6}) {
      GateSpec s;
      s.delta_hz = d;
      s.g_eff_hz = g;
      const double e = iswap_gate_error(s);
      CHECK(e > last);
      last = e;
    }
  }
}

TEST_CASE("protocol schedules survive serialization") {
  GateSpec s;
  s.delta_hz = 12e6;
  s.g_eff_hz = 2e6;
  const GateExperiment g = iswap_gate_experiment(s);
  const PulseSchedule back = schedule_from_json(to_json(g.schedule));
  CHECK(to_json(back) == to_json(g.schedule));
  const ProcessMatrix a = channel_from_experiment(g);
  GateExperiment replay = g;
  replay.schedule = back;
  const ProcessMatrix b = channel_from_experiment(replay);
  CHECK((a.choi - b.choi).norm() < 1e-12);
}

}  // TEST_SUITE
