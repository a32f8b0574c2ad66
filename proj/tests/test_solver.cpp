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


#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tlslab/common.hpp"
#include "tlslab/solver.hpp"

using namespace tlslab;

namespace {

constexpr double kPi = std::numbers::pi;

DeviceParams quiet_device() {
  DeviceParams p;
  p.gamma1_q1 = p.gamma1_q2 = p.gamma1_c = p.gamma1_tls = 0.0;
  p.gamma_phi_q1 = p.gamma_phi_q2 = p.gamma_phi_c = p.gamma_phi_tls = 0.0;
  return p;
}

Segment park(double duration, Element e, double hz, double rise_fall = 0.0) {
  Segment s;
  s.duration = duration;
  s.freq_hz[static_cast<std::size_t>(element_index(e))] = hz;
  s.rise_fall = rise_fall;
  return s;
}

double total_excitation(const DensityMatrix& rho) {
  double n = 0.0;
  for (Element e : kAllElements) n += population(rho, e);
  return n;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("uncoupled qubit decays exponentially") {
  DeviceParams p = quiet_device();
  p.g1 = p.g2 = p.g_t = 0.0;
  p.gamma1_q1 = 1.0 / 20e-6;
  PulseSchedule s;
  s.idle(60e-6);
  const auto times = linspace(0.0, 60e-6, 31);
  const SimResult r = propagate(s, p, basis_state("1000"), times);
  const auto& pq = r.observable("p_q1");
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(pq[i] - std::exp(-times[i] * p.gamma1_q1)) < 1e-4);
}

TEST_CASE("resonant qubit-TLS exchange through the coupler completes at 1/(4 g_eff)") {
  DeviceParams p = quiet_device();
  const double g_eff = effective_coupling(p).g_eff_1;
  const CrossingGap c = avoided_crossing_gap(p, linspace(p.f_tls - 20e6, p.f_tls + 20e6, 81));
  PulseSchedule s;
  const double span = 0.5 / g_eff;
  s.add(park(span, Element::Q1, c.f_at_min_hz));
  const auto times = linspace(0.0, span, 2001);
  const SimResult r = propagate(s, p, basis_state("1000"), times);
  const auto& pt = r.observable("p_tls");
  const auto peak = std::max_element(pt.begin(), pt.end()) - pt.begin();
  CHECK(times[static_cast<std::size_t>(peak)] == doctest::Approx(1.0 / (4.0 * g_eff)).epsilon(0.02));
  CHECK(pt[static_cast<std::size_t>(peak)] > 0.99);
}

TEST_CASE("effective exchange follows the generalized Rabi formula") {
  DeviceParams p = quiet_device();
  const double g = 2e6;
  for (double delta : {0.0, 3e6, -5e6}) {
    CircuitModel m = CircuitModel::effective(p, {g, 0.0, 0.0});
    PulseSchedule s;
    s.add(park(1e-6, Element::Q1, p.f_tls + delta));
    const auto times = linspace(0.0, 1e-6, 401);
    const SimResult r = propagate(s, m, basis_state("1000"), times);
    const auto& pt = r.observable("p_tls");
    double peak = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(std::abs(pt[i] - oracle::exchange_transfer(g, delta, times[i])) < 1e-8);
      peak = std::max(peak, pt[i]);
    }
    CHECK(peak == doctest::Approx(4 * g * g / (4 * g * g + delta * delta)).epsilon(0.02));
  }
}

TEST_CASE("driven, damped TLS matches a direct Lindblad integration") {
  DeviceParams p = quiet_device();
  p.gamma1_tls = 1.0 / 3e-6;
  p.gamma_phi_tls = 1.0 / 1.1e-6;
  const CircuitModel m = CircuitModel::effective(p, {});
  for (double phase : {0.0, 0.7}) {
    for (double detuning : {0.0, 0.8e6}) {
      Segment seg;
      seg.duration = 2e-6;
      seg.drives.push_back({Element::Tls, 2.5e6, phase, detuning});
      PulseSchedule s;
      s.add(seg);
      PropagateOptions opt;
      opt.expectations = {{Element::Tls, Axis::X}, {Element::Tls, Axis::Y}};
      const std::vector<double> times{0.37e-6, 1.1e-6, 2e-6};
      const SimResult r = propagate(s, m, basis_state("0000"), times, opt);
      for (std::size_t i = 0; i < times.size(); ++i) {
        Eigen::Matrix2cd rho0 = Eigen::Matrix2cd::Zero();
        rho0(0, 0) = 1.0;
        // The drive detuning is the frame offset of the drive relative to the element.
        const Eigen::Matrix2cd ref =
            oracle::lindblad_qubit(rho0, -detuning, 2.5e6, phase, p.gamma1_tls, p.gamma_phi_tls, times[i], 20000);
        CHECK(r.observable("p_tls")[i] == doctest::Approx(ref(1, 1).real()).epsilon(1e-6));
        // Expectations are reported in the TLS frame, the oracle works in the drive frame.
        const cplx coh = ref(0, 1) * std::polar(1.0, 2.0 * kPi * detuning * times[i]);
        CHECK(r.observable("x_tls")[i] == doctest::Approx(2.0 * coh.real()).scale(1.0).epsilon(1e-6));
        CHECK(r.observable("y_tls")[i] == doctest::Approx(-2.0 * coh.imag()).scale(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("instant operations") {
  const DensityMatrix g = basis_state("0000");
  const DensityMatrix flipped = apply_instant_op(g, Rotation{Element::Tls, Axis::X, kPi, 0.0});
  CHECK(population(flipped, Element::Tls) == doctest::Approx(1.0).epsilon(1e-14));

  const Rotation half{Element::Q2, Axis::X, 0.5 * kPi, 0.3};
  const Rotation full{Element::Q2, Axis::X, kPi, 0.3};
  const DensityMatrix start = apply_instant_op(g, Rotation{Element::Q2, Axis::Y, 0.4, 0.0});
  const DensityMatrix twice = apply_instant_op(apply_instant_op(start, half), half);
  CHECK((twice - apply_instant_op(start, full)).norm() < 1e-12);

  DensityMatrix mixed = 0.5 * (basis_state("0000") + basis_state("0001"));
  const DensityMatrix reset = apply_instant_op(mixed, Reset{Element::Tls});
  CHECK((reset - basis_state("0000")).norm() < 1e-14);
  validate_density(reset);

  CHECK((apply_instant_op(flipped, Barrier{}) - flipped).norm() == 0.0);
  CHECK_THROWS_AS(parse_element("q3"), Error);
  CHECK_THROWS_AS(basis_state("0200"), Error);
}

TEST_CASE("shot sampling") {
  CHECK(sample_shots(0.0, 1000, 1) == 0);
  CHECK(sample_shots(1.0, 1000, 1) == 1000);
  const double n = 1e4;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double k = static_cast<double>(sample_shots(0.5, 10000, seed));
    CHECK(std::abs(k / n - 0.5) < 5.0 * 0.5 / std::sqrt(n));
  }
  CHECK(sample_shots(0.3, 777, 9) == sample_shots(0.3, 777, 9));
  CHECK_THROWS_AS(sample_shots(0.5, 0, 1), Error);
}

TEST_CASE("density invariants hold on random open-system runs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g(0.0, 5e6), rate(0.0, 2e6), det(-10e6, 10e6);
  for (int trial = 0; trial < 6; ++trial) {
    DeviceParams p;
    p.gamma1_tls = rate(rng);
    p.gamma_phi_tls = rate(rng);
    p.gamma1_q1 = rate(rng);
    p.gamma_phi_q2 = rate(rng);
    const CircuitModel m = CircuitModel::effective(p, {g(rng), g(rng), g(rng)});
    PulseSchedule s;
    Segment seg = park(1e-6, Element::Q1, p.f_tls + det(rng), 2e-9);
    seg.freq_hz[1] = p.f_tls + det(rng);
    s.add(seg);
    s.at(0.3e-6, Rotation{Element::Q2, Axis::X, 0.5 * kPi, 0.0});
    PropagateOptions opt;
    opt.keep_snapshots = true;
    const SimResult r = propagate(s, m, basis_state("1000"), linspace(0.0, 1e-6, 11), opt);
    for (const auto& rho : r.rho_snapshots) {
      CHECK_NOTHROW(validate_density(rho));
    }
    for (const auto& o : r.observables) {
      if (o.name.rfind("p_", 0) != 0) continue;
      for (double v : o.values) CHECK((v >= -1e-6 && v <= 1.0 + 1e-6));
    }
  }
}

TEST_CASE("closed full model conserves excitation number") {
  DeviceParams p = quiet_device();
  PulseSchedule s;
  s.add(park(200e-9, Element::Q1, p.f_tls + 1e6, 2e-9));
  s.add(park(200e-9, Element::Q2, p.f_tls - 2e6, 2e-9));
  DensityMatrix rho0 = apply_instant_op(basis_state("1000"), Rotation{Element::Q2, Axis::X, 0.5 * kPi, 0.0});
  PropagateOptions opt;
  opt.keep_snapshots = true;
  const SimResult r = propagate(s, p, rho0, linspace(0.0, 400e-9, 21), opt);
  const double n0 = total_excitation(rho0);
  for (const auto& rho : r.rho_snapshots) CHECK(std::abs(total_excitation(rho) - n0) < 1e-8);
}

TEST_CASE("halving the RK4 step leaves populations unchanged") {
  DeviceParams p = quiet_device();
  p.gamma1_tls = 1e5;
  p.gamma_phi_tls = 1e6;
  const CircuitModel m = CircuitModel::effective(p, {3e6, 0.0, 0.0});
  PulseSchedule s;
  s.add(park(60e-9, Element::Q1, p.f_tls + 2e6, 20e-9));
  const auto times = linspace(0.0, 60e-9, 13);
  PropagateOptions coarse;
  coarse.max_step_s = 2e-11;
  PropagateOptions fine = coarse;
  fine.max_step_s = 1e-11;
  const SimResult a = propagate(s, m, basis_state("1000"), times, coarse);
  const SimResult b = propagate(s, m, basis_state("1000"), times, fine);
  for (std::string_view name : {"p_q1", "p_tls"}) {
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(a.observable(name)[i] - b.observable(name)[i]) < 1e-6);
  }
}

TEST_CASE("trajectory averaging is deterministic and thread-count independent") {
  DeviceParams p = quiet_device();
  NoiseModel noise;
  noise.fluctuators = {{3e5, 1e6, 0.5}, {2e5, 3e4, 0.5}};
  noise.quasi_static_sigma_hz = 1e5;
  PulseSchedule s;
  s.at(0.0, Rotation{Element::Tls, Axis::X, 0.5 * kPi, 0.0});
  s.idle(1e-6);
  PropagateOptions opt;
  opt.noise = noise;
  opt.n_trajectories = 100;
  opt.seed = 99;
  const auto times = linspace(0.0, 1e-6, 11);
  opt.expectations = {{Element::Tls, Axis::Y}};
  set_thread_limit(1);
  const SimResult a = propagate(s, p, basis_state("0000"), times, opt);
  set_thread_limit(4);
  const SimResult b = propagate(s, p, basis_state("0000"), times, opt);
  set_thread_limit(0);
  CHECK(a.observable("y_tls") == b.observable("y_tls"));
  CHECK(a.n_trajectories == 100);
  CHECK(a.seed == 99);
  CHECK(std::abs(a.observable("y_tls").back()) < 0.9 * std::abs(a.observable("y_tls").front()));
}

TEST_CASE("precondition errors") {
  DeviceParams p;
  PulseSchedule s;
  s.idle(1e-6);
  PropagateOptions opt;
  opt.n_trajectories = 5;
  const std::vector<double> times{0.0, 0.5e-6};
  CHECK_THROWS_AS(propagate(s, p, basis_state("0000"), times, opt), Error);
  const std::vector<double> late{2e-6};
  CHECK_THROWS_AS(propagate(s, p, basis_state("0000"), late), Error);
  PulseSchedule bad;
  bad.add(park(1e-9, Element::Q1, 3e9, 1e-9));
  CHECK_THROWS_AS(bad.validate(), Error);
  PulseSchedule tiny;
  tiny.add(park(1e-3, Element::Q1, 3.5e9, 0.4e-3));
  PropagateOptions limited;
  limited.max_steps = 1000;
  try {
    propagate(tiny, p, basis_state("1000"), std::vector<double>{1e-3}, limited);
    FAIL("expected step-size underflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
  const SimResult r = propagate(s, p, basis_state("0000"), times);
  CHECK_THROWS_AS(r.observable("nope"), Error);
}

}  // TEST_SUITE
