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
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tlslab/analysis.hpp"
#include "tlslab/common.hpp"
#include "tlslab/model.hpp"
#include "tlslab/noise.hpp"
#include "tlslab/protocols.hpp"

using namespace tlslab;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> gaussian_series(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

double band_mean(const SpectrumEstimate& s, double lo, double hi) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.freqs[k] >= lo && s.freqs[k] <= hi) {
      sum += s.psd[k];
      ++n;
    }
  }
  return sum / n;
}

double db(double a, double b) { return 10.0 * std::log10(a / b); }

double fitted_spinlock_rate(const ProtocolContext& ctx, double omega, std::span<const double> t) {
  const std::vector<double> om{omega};
  const SimResult r = spin_locking(ctx, om, t).front();
  return fit_exponential(t, r.observable("p_tls"), true).value("rate");
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("exponential fit recovers tau exactly") {
  const auto t = linspace(0.0, 100e-6, 60);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = std::exp(-t[i] / 23e-6);
  const FitResult f = fit_exponential(t, y);
  CHECK(f.converged);
  CHECK(f.value("tau") == doctest::Approx(23e-6).epsilon(1e-6));
  for (const auto& p : f.params) CHECK(p.sigma >= 0.0);
}

TEST_CASE("Gaussian decay fit beats exponential on Gaussian data") {
  const auto t = linspace(0.0, 2e-6, 40);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = std::exp(-std::pow(t[i] / 0.7e-6, 2));
  const FitResult g = fit_gaussian_decay(t, y);
  const FitResult e = fit_exponential(t, y);
  CHECK(g.value("tau") == doctest::Approx(0.7e-6).epsilon(1e-6));
  CHECK(g.residual_norm < 0.01 * e.residual_norm);
}

TEST_CASE("noisy damped cosine frequency within 0.5%") {
  const auto t = linspace(0.0, 4e-6, 400);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto noise = gaussian_series(t.size(), 0.01, seed);
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      y[i] = 0.5 * std::exp(-4e5 * t[i]) * std::cos(kTwoPi * 3.1e6 * t[i] + 0.3) + 0.5 + noise[i];
    }
    const FitResult f = fit_damped_cosine(t, y);
    CHECK(f.value("freq") == doctest::Approx(3.1e6).epsilon(0.005));
    CHECK(f.value("gamma") == doctest::Approx(4e5).epsilon(0.10));
  }
}

TEST_CASE("fits reject malformed input") {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 0.5, 0.25, 0.125};
  CHECK_THROWS_AS(fit_exponential(t, y), Error);
  const std::vector<double> t5{0.0, 2.0, 1.0, 3.0, 4.0};
  const std::vector<double> y5{1.0, 0.5, 0.25, 0.125, 0.06};
  CHECK_THROWS_AS(fit_exponential(t5, y5), Error);
}

TEST_CASE("extract_osc_avg on synthetic two-timescale traces") {
  const auto t = linspace(0.0, 20e-6, 2001);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    y[i] = 0.4 * std::exp(-2e6 * t[i]) * std::cos(kTwoPi * 5e6 * t[i]) + 0.6 * std::exp(-2e5 * t[i]);
  }
  const OscAvgResult r = extract_osc_avg(t, y);
  REQUIRE(r.gamma_osc.has_value());
  CHECK(*r.gamma_osc == doctest::Approx(2e6).epsilon(0.05));
  CHECK(*r.f_osc == doctest::Approx(5e6).epsilon(0.05));
  CHECK(r.gamma_avg == doctest::Approx(2e5).epsilon(0.05));

  std::vector<double> plain(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) plain[i] = std::exp(-1e5 * t[i]);
  const OscAvgResult p = extract_osc_avg(t, plain);
  CHECK_FALSE(p.gamma_osc.has_value());
  CHECK(std::find(p.flags.begin(), p.flags.end(), "oscillation_absent") != p.flags.end());
  CHECK(p.gamma_avg == doctest::Approx(1e5).epsilon(1e-6));
}

TEST_CASE("extract_osc_avg on Markovian solver output") {
  ProtocolContext ctx;
  ctx.rise_fall = 0.0;
  ctx.device.gamma1_q1 = 1.0 / 20e-6;
  ctx.device.gamma1_tls = 1.0 / 4e-6;
  ctx.device.gamma_phi_q1 = ctx.device.gamma_phi_tls = 0.0;
  const double g = 3e6;
  ctx.couplings = EffectiveCouplings{g, 0.0, 0.0};
  const auto delays = linspace(0.0, 15e-6, 1501);

  const SimResult centre = relaxation_trace(ctx, 0.0, delays);
  const OscAvgResult rc = extract_osc_avg(delays, centre.observable("p_q1"));
  const double theory = gamma_avg_theory(ctx.device.gamma1_q1, ctx.device.gamma1_tls, g, 0.0,
                                         MixingConvention::EigenvectorWeights);
  REQUIRE(rc.gamma_osc.has_value());
  CHECK(rc.gamma_avg == doctest::Approx(theory).epsilon(0.10));
  CHECK(*rc.f_osc == doctest::Approx(2.0 * g).epsilon(0.02));

  const auto long_delays = linspace(0.0, 60e-6, 601);
  const SimResult far = relaxation_trace(ctx, 400e6, long_delays);
  const OscAvgResult rf = extract_osc_avg(long_delays, far.observable("p_q1"));
  CHECK(rf.gamma_avg == doctest::Approx(ctx.device.gamma1_q1).epsilon(0.05));
}

TEST_CASE("Welch normalization for white noise") {
  const double sigma = 1.3, ts = 1e-3;
  const auto x = gaussian_series(1 << 16, sigma, 11);
  const SpectrumEstimate s = welch_psd(x, ts, 1024);
  CHECK_NOTHROW(s.validate());
  CHECK(s.source == SpectrumSource::Welch);
  CHECK(band_mean(s, 0.0, 1e9) == doctest::Approx(2.0 * sigma * sigma * ts).epsilon(0.10));
  double var = 0.0;
  for (double v : x) var += v * v;
  var /= static_cast<double>(x.size());
  double integral = 0.0;
  const double df = s.freqs[1] - s.freqs[0];
  for (double p : s.psd) integral += p * df;
  CHECK(integral == doctest::Approx(var).epsilon(0.05));
  CHECK_THROWS_AS(welch_psd(std::span<const double>(x.data(), 1500), ts, 1024), Error);
}

TEST_CASE("Welch recovers sine power") {
  const double ts = 1e-3, f0 = 125.0, amp = 0.7;
  std::vector<double> x(1 << 15);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = amp * std::sin(kTwoPi * f0 * ts * static_cast<double>(i));
  const SpectrumEstimate s = welch_psd(x, ts, 1024);
  const double df = s.freqs[1] - s.freqs[0];
  double power = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (std::abs(s.freqs[k] - f0) < 5.0 * df) power += s.psd[k] * df;
  }
  CHECK(power == doctest::Approx(0.5 * amp * amp).epsilon(0.10));
}

TEST_CASE("Welch of a telegraph trajectory matches tlf_psd in band") {
  const TelegraphFluctuator tlf{1e4, 50.0, 0.5};
  const double dt = 1e-4;
  const NoiseTrajectory traj = rtn_trajectory(tlf, dt * (1 << 18), dt, 3);
  const SpectrumEstimate s = welch_psd(traj.offsets, dt, 4096);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.freqs[k] < 2.0 || s.freqs[k] > 1000.0) continue;
    CHECK(std::abs(db(s.psd[k], tlf_psd(tlf, s.freqs[k]))) < 3.0);
  }
}

TEST_CASE("cross spectrum: degenerate and independent inputs") {
  const double ts = 1e-3;
  const auto a = gaussian_series(1 << 16, 1.0, 21);
  const auto b = gaussian_series(1 << 16, 1.0, 22);
  const SpectrumEstimate same = cross_psd(a, a, ts, 1024);
  const SpectrumEstimate w = welch_psd(a, ts, 1024);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(same.psd[k] == doctest::Approx(w.psd[k]).epsilon(1e-12));

  const SpectrumEstimate ind = cross_psd(a, b, ts, 1024);
  CHECK(ind.source == SpectrumSource::Cross);
  double mean = 0.0, var = 0.0;
  for (std::size_t k = 0; k < ind.size(); ++k) {
    mean += ind.psd[k];
    var += ind.variance[k];
  }
  const double n = static_cast<double>(ind.size());
  CHECK(std::abs(mean / n) < 4.0 * std::sqrt(var) / n);
  CHECK(std::abs(mean / n) < 0.05 * band_mean(w, 0.0, 1e9));
  CHECK_THROWS_AS(cross_psd(a, std::span<const double>(b.data(), 1000), ts, 256), Error);
}

TEST_CASE("cross spectrum recovers a common signal below the shot-noise floor") {
  const double ts = 1e-3;
  const std::size_t n = 1 << 19;
  const TelegraphFluctuator tlf{2.0, 20.0, 0.5};
  const NoiseTrajectory sig = rtn_trajectory(tlf, ts * static_cast<double>(n), ts, 5);
  auto a = gaussian_series(n, 1.0, 31);
  auto b = gaussian_series(n, 1.0, 32);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] += sig.offsets[i];
    b[i] += sig.offsets[i];
  }
  const SpectrumEstimate c = cross_psd(a, b, ts, 2048);
  const SpectrumEstimate w = welch_psd(a, ts, 2048);
  const double lo = 150.0, hi = 400.0;
  double truth = 0.0;
  int count = 0;
  for (double f : c.freqs) {
    if (f >= lo && f <= hi) {
      truth += tlf_psd(tlf, f);
      ++count;
    }
  }
  truth /= count;
  CHECK(truth < 0.25 * 2.0 * ts);
  CHECK(band_mean(w, lo, hi) > 4.0 * truth);
  CHECK(std::abs(db(band_mean(c, lo, hi), truth)) < 1.0);
  // Floor suppression: residual scatter of the cross estimate relative to the single-series floor.
  double scatter = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c.freqs[k] >= lo && c.freqs[k] <= hi) scatter += std::pow(c.psd[k] - tlf_psd(tlf, c.freqs[k]), 2);
  }
  scatter = std::sqrt(scatter / count);
  CHECK(db(2.0 * ts, scatter) >= 10.0);
}

TEST_CASE("transduce conventions") {
  const double tau = 200e-9;
  const std::vector<double> half{0.5};
  CHECK(transduce(half, tau, 1.0).offsets_hz[0] == 0.0);
  const double eps = 1e-6, contrast = 0.8;
  const std::vector<double> p{0.5 + eps};
  CHECK(transduce(p, tau, contrast).offsets_hz[0] / eps == doctest::Approx(1.0 / (kPi * tau * contrast)).epsilon(1e-6));
  const std::vector<double> wrap{0.95, 0.02, 0.6};
  const TransduceResult r = transduce(wrap, tau, contrast);
  CHECK(r.clipped == 2);
  CHECK(r.offsets_hz[0] == doctest::Approx(1.0 / (4.0 * tau)));
  CHECK(std::find(r.flags.begin(), r.flags.end(), "fringe_wrap") != r.flags.end());
  CHECK_THROWS_AS(transduce(half, 0.0, 1.0), Error);
}

TEST_CASE("stitching identical and overlapping analytic spectra") {
  NoiseModel m;
  m.fluctuators.push_back({1e3, 30.0, 0.5});
  m.white_level = 1e-2;
  const SpectrumEstimate a = ensemble_psd(m, logspace(0.1, 100.0, 40));
  const SpectrumEstimate same[] = {a, a};
  const StitchResult id = stitch_spectra(same);
  CHECK(id.spectrum.freqs == a.freqs);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(id.spectrum.psd[k] == doctest::Approx(a.psd[k]));
  CHECK(id.consistency_db == doctest::Approx(0.0));

  const SpectrumEstimate lo = ensemble_psd(m, linspace(0.05, 20.0, 400));
  const SpectrumEstimate hi = ensemble_psd(m, linspace(5.0, 2000.0, 400));
  const SpectrumEstimate parts[] = {lo, hi};
  const StitchResult st = stitch_spectra(parts);
  CHECK(st.spectrum.source == SpectrumSource::Stitched);
  CHECK(st.spectrum.freqs.front() < 0.1);
  CHECK(st.spectrum.freqs.back() > 1000.0);
  for (std::size_t k = 0; k < st.spectrum.size(); ++k) {
    const auto single = ensemble_psd(m, std::vector<double>{st.spectrum.freqs[k]});
    CHECK(std::abs(db(st.spectrum.psd[k], single.psd[0])) < 3.0);
  }
}

TEST_CASE("stitching guards") {
  NoiseModel m;
  m.white_level = 1.0;
  const SpectrumEstimate lo = ensemble_psd(m, linspace(1.0, 10.0, 50));
  SpectrumEstimate hi = ensemble_psd(m, linspace(5.0, 50.0, 50));
  for (auto& p : hi.psd) p *= 10.0;
  const SpectrumEstimate bad[] = {lo, hi};
  CHECK_THROWS_AS(stitch_spectra(bad), Error);
  const SpectrumEstimate far = ensemble_psd(m, linspace(100.0, 200.0, 50));
  const SpectrumEstimate disjoint[] = {lo, far};
  CHECK_THROWS_AS(stitch_spectra(disjoint), Error);
}

TEST_CASE("power-law fits") {
  const auto f = logspace(1e-3, 1e3, 200);
  SpectrumEstimate s;
  s.freqs = f;
  for (double v : f) s.psd.push_back(3e4 / v);
  s.variance.assign(f.size(), 0.0);
  const FitResult p = fit_power_law(s, 1e-3, 1e3);
  CHECK(p.value("alpha") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(p.value("A") == doctest::Approx(3e4).epsilon(1e-6));

  const auto x = gaussian_series(1 << 16, 1.0, 41);
  const SpectrumEstimate w = welch_psd(x, 1e-3, 2048);
  CHECK(std::abs(fit_power_law(w, 1.0, 400.0).value("alpha")) < 0.05);
}

TEST_CASE("Lorentzian-sum fits") {
  const auto f = logspace(1e-2, 1e5, 300);
  auto build = [&](const std::vector<TelegraphFluctuator>& tlfs) {
    NoiseModel m;
    m.fluctuators = tlfs;
    return ensemble_psd(m, f);
  };
  const FitResult one = fit_lorentzian_sum(build({{150.0, 40.0, 0.5}}), 1);
  CHECK(one.value("a_0") == doctest::Approx(150.0).epsilon(0.05));
  CHECK(one.value("gamma_0") == doctest::Approx(40.0).epsilon(0.05));

  const FitResult two = fit_lorentzian_sum(build({{300.0, 0.5, 0.5}, {40.0, 200.0, 0.5}}), 2);
  CHECK(two.value("a_0") == doctest::Approx(300.0).epsilon(0.10));
  CHECK(two.value("gamma_0") == doctest::Approx(0.5).epsilon(0.10));
  CHECK(two.value("a_1") == doctest::Approx(40.0).epsilon(0.10));
  CHECK(two.value("gamma_1") == doctest::Approx(200.0).epsilon(0.10));

  const FitResult over = fit_lorentzian_sum(build({{150.0, 40.0, 0.5}}), 2);
  const bool flagged = std::any_of(over.flags.begin(), over.flags.end(),
                                   [](const std::string& s) { return s.find("negligible") != std::string::npos; });
  CHECK(flagged);
  double total_a2 = over.value("a_0") * over.value("a_0") + over.value("a_1") * over.value("a_1");
  CHECK(std::sqrt(total_a2) == doctest::Approx(150.0).epsilon(0.05));
  CHECK_THROWS_AS(fit_lorentzian_sum(build({{150.0, 40.0, 0.5}}), 0), Error);
}

TEST_CASE("spin-locking rate conversion: drop flags and the noiseless limit") {
  const std::vector<double> omegas{1e5, 2e5, 5e5};
  const std::vector<double> rates{0.4e5, 0.6e5, 0.5e5};
  const SpectrumEstimate s = spinlock_to_psd(omegas, rates, 1e5);
  CHECK(s.size() == 1);
  CHECK(s.freqs[0] == 2e5);
  CHECK(s.psd[0] == doctest::Approx(1e4 / (kPi * kPi)));
  CHECK(s.flags.size() == 2);
  CHECK(s.source == SpectrumSource::SpinLocking);

  ProtocolContext ctx;
  ctx.device.gamma1_tls = 1.0 / 10e-6;
  ctx.device.gamma_phi_tls = 0.0;
  const auto t = linspace(0.0, 30e-6, 31);
  std::vector<double> measured;
  for (double om : omegas) measured.push_back(fitted_spinlock_rate(ctx, om, t));
  const SpectrumEstimate zero = spinlock_to_psd(omegas, measured, ctx.device.gamma1_tls);
  for (double p : zero.psd) CHECK(kPi * kPi * p < 1e-3 * ctx.device.gamma1_tls);
}

TEST_CASE("spin-locking round trip for white and Lorentzian noise") {
  const auto t = linspace(0.0, 40e-6, 41);
  const std::vector<double> omegas{0.3e6, 0.6e6, 1.2e6};

  ProtocolContext white;
  white.device.gamma1_tls = 1.0 / 20e-6;
  white.device.gamma_phi_tls = 0.0;
  NoiseModel w;
  w.white_level = 2e4 / (kPi * kPi);
  white.noise = w;
  std::vector<double> rw;
  for (double om : omegas) rw.push_back(fitted_spinlock_rate(white, om, t));
  const SpectrumEstimate sw = spinlock_to_psd(omegas, rw, white.device.gamma1_tls);
  REQUIRE(sw.size() == omegas.size());
  for (double p : sw.psd) CHECK(std::abs(db(p, w.white_level)) < 3.0);

  ProtocolContext lor = white;
  const TelegraphFluctuator tlf{1e5, 2e6, 0.5};
  NoiseModel l;
  l.fluctuators.push_back(tlf);
  lor.noise = l;
  lor.n_trajectories = 400;
  lor.seed = 13;
  std::vector<double> rl;
  for (double om : omegas) rl.push_back(fitted_spinlock_rate(lor, om, t));
  const SpectrumEstimate sl = spinlock_to_psd(omegas, rl, lor.device.gamma1_tls);
  REQUIRE(sl.size() == omegas.size());
  for (std::size_t k = 0; k < sl.size(); ++k) CHECK(std::abs(db(sl.psd[k], tlf_psd(tlf, sl.freqs[k]))) < 3.0);
}

}  // TEST_SUITE
