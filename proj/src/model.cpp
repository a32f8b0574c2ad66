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

#include "tlslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tlslab {

double DeviceParams::frequency(Element e) const {
  switch (e) {
    case Element::Q1: return f_q1;
    case Element::Q2: return f_q2;
    case Element::Coupler: return f_c;
    case Element::Tls: return f_tls;
  }
  return 0.0;
}

void DeviceParams::set_frequency(Element e, double hz) {
  switch (e) {
    case Element::Q1: f_q1 = hz; break;
    case Element::Q2: f_q2 = hz; break;
    case Element::Coupler: f_c = hz; break;
    case Element::Tls: f_tls = hz; break;
  }
}

double DeviceParams::gamma1(Element e) const {
  switch (e) {
    case Element::Q1: return gamma1_q1;
    case Element::Q2: return gamma1_q2;
    case Element::Coupler: return gamma1_c;
    case Element::Tls: return gamma1_tls;
  }
  return 0.0;
}

double DeviceParams::gamma_phi(Element e) const {
  switch (e) {
    case Element::Q1: return gamma_phi_q1;
    case Element::Q2: return gamma_phi_q2;
    case Element::Coupler: return gamma_phi_c;
    case Element::Tls: return gamma_phi_tls;
  }
  return 0.0;
}

bool DeviceParams::dispersive_ok() const {
  return std::abs(f_c - f_tls) >= 5.0 * std::max({g1, g2, g_t});
}

std::vector<std::string> DeviceParams::violations() const {
  std::vector<std::string> out;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be > 0");
  };
  auto nonneg = [&](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be >= 0");
  };
  positive("f_q1", f_q1);
  positive("f_q2", f_q2);
  positive("f_c", f_c);
  positive("f_tls", f_tls);
  nonneg("g1", g1);
  nonneg("g2", g2);
  nonneg("g_t", g_t);
  nonneg("gamma1_q1", gamma1_q1);
  nonneg("gamma1_q2", gamma1_q2);
  nonneg("gamma1_c", gamma1_c);
  nonneg("gamma1_tls", gamma1_tls);
  nonneg("gamma_phi_q1", gamma_phi_q1);
  nonneg("gamma_phi_q2", gamma_phi_q2);
  nonneg("gamma_phi_c", gamma_phi_c);
  nonneg("gamma_phi_tls", gamma_phi_tls);
  return out;
}

void DeviceParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  for (std::size_t i = 0; i < v.size(); ++i) msg << (i ? "; " : "") << v[i];
  fail(ErrorKind::InvalidArgument, "DeviceParams", msg.str());
}

CircuitModel CircuitModel::full(const DeviceParams& p) {
  CircuitModel m;
  for (Element e : kAllElements) {
    m.freq_hz[element_index(e)] = p.frequency(e);
    m.gamma1[element_index(e)] = p.gamma1(e);
    m.gamma_phi[element_index(e)] = p.gamma_phi(e);
  }
  m.couplings = {{Element::Q1, Element::Coupler, p.g1},
                 {Element::Q2, Element::Coupler, p.g2},
                 {Element::Tls, Element::Coupler, p.g_t}};
  m.frame_hz = p.f_tls;
  return m;
}

CircuitModel CircuitModel::effective(const DeviceParams& p, const EffectiveCouplings& c) {
  CircuitModel m = full(p);
  m.couplings = {{Element::Q1, Element::Tls, c.q1_tls_hz},
                 {Element::Q2, Element::Tls, c.q2_tls_hz},
                 {Element::Q1, Element::Q2, c.q1_q2_hz}};
  return m;
}

namespace {

void add_exchange(Matrix16c& h, Element a, Element b, double g_rad) {
  const int ba = element_bit(a);
  const int bb = element_bit(b);
  for (int i = 0; i < kDim; ++i) {
    // |..1_a..0_b..> <-> |..0_a..1_b..>
    if ((i & ba) && !(i & bb)) {
      const int j = (i ^ ba) | bb;
      h(i, j) += g_rad;
      h(j, i) += g_rad;
    }
  }
}

}  // namespace

Hamiltonian build_hamiltonian(const CircuitModel& model, std::span<const DriveTerm> drives) {
  Hamiltonian out;
  Matrix16c& h = out.matrix;
  for (int i = 0; i < kDim; ++i) {
    double w = 0.0;
    for (Element e : kAllElements) {
      if (i & element_bit(e)) w += kTwoPi * (model.freq_hz[element_index(e)] - model.frame_hz);
    }
    h(i, i) = w;
  }
  for (const Coupling& c : model.couplings) {
    require(c.a != c.b, "build_hamiltonian", "coupling must join two distinct elements");
    if (c.g_hz != 0.0) add_exchange(h, c.a, c.b, kTwoPi * c.g_hz);
  }
  for (const DriveTerm& d : drives) {
    const int b = element_bit(d.element);
    const cplx up = std::polar(std::numbers::pi * d.rabi_hz, d.phase_rad);  // <1|H|0>
    for (int i = 0; i < kDim; ++i) {
      if (i & b) continue;
      h(i | b, i) += up;
      h(i, i | b) += std::conj(up);
    }
  }
  return out;
}

Hamiltonian build_hamiltonian(const DeviceParams& params, std::span<const DriveTerm> drives) {
  return build_hamiltonian(CircuitModel::full(params), drives);
}

double mixing_angle(double g_eff_hz, double delta_hz) {
  return std::atan2(2.0 * g_eff_hz, delta_hz);
}

EffectiveParams effective_coupling(const DeviceParams& params, std::optional<double> target_qubit_hz,
                                   Element qubit) {
  require(qubit == Element::Q1 || qubit == Element::Q2, "effective_coupling",
          "target element must be a qubit");
  EffectiveParams out;
  out.delta_c = params.f_c - params.f_tls;
  if (out.delta_c == 0.0) {
    fail(ErrorKind::Numerical, "effective_coupling",
         "coupler resonant with TLS; effective coupling undefined");
  }
  const double abs_delta = std::abs(out.delta_c);
  out.g_eff_1 = params.g1 * params.g_t / abs_delta;
  out.g_eff_2 = params.g2 * params.g_t / abs_delta;
  out.dispersive_ok = params.dispersive_ok();
  if (!out.dispersive_ok) out.flags.push_back("dispersive_regime_violated");
  if (target_qubit_hz) {
    out.delta = *target_qubit_hz - params.f_tls;
    const double g = qubit == Element::Q1 ? out.g_eff_1 : out.g_eff_2;
    out.theta = mixing_angle(g, *out.delta);
  }
  return out;
}

Eigen::Matrix4d single_excitation_block(const DeviceParams& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = p.f_q1;
  m(1, 1) = p.f_q2;
  m(2, 2) = p.f_c;
  m(3, 3) = p.f_tls;
  m(0, 2) = m(2, 0) = p.g1;
  m(1, 2) = m(2, 1) = p.g2;
  m(3, 2) = m(2, 3) = p.g_t;
  return m;
}

namespace {

double smallest_adjacent_gap(const DeviceParams& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(single_excitation_block(p),
                                                    Eigen::EigenvaluesOnly);
  const Eigen::Vector4d ev = es.eigenvalues();  // ascending
  double gap = ev(1) - ev(0);
  for (int i = 2; i < 4; ++i) gap = std::min(gap, ev(i) - ev(i - 1));
  return gap;
}

}  // namespace

CrossingGap avoided_crossing_gap(const DeviceParams& params, std::span<const double> f_sweep,
                                 Element swept) {
  require(f_sweep.size() >= 3, "avoided_crossing_gap", "sweep needs at least 3 points");
  DeviceParams p = params;
  auto gap_at = [&](double f) {
    p.set_frequency(swept, f);
    return smallest_adjacent_gap(p);
  };
  std::size_t best = 0;
  double best_gap = gap_at(f_sweep[0]);
  for (std::size_t i = 1; i < f_sweep.size(); ++i) {
    const double g = gap_at(f_sweep[i]);
    if (g < best_gap) {
      best_gap = g;
      best = i;
    }
  }
  if (best == 0 || best + 1 == f_sweep.size()) {
    fail(ErrorKind::InvalidArgument, "avoided_crossing_gap",
         "sweep does not bracket a minimum of the eigen-gap");
  }
  // Golden-section refinement between the neighbouring grid points.
  double lo = f_sweep[best - 1];
  double hi = f_sweep[best + 1];
  if (lo > hi) std::swap(lo, hi);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double g1 = gap_at(x1);
  double g2 = gap_at(x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * std::max(1.0, std::abs(hi)); ++it) {
    if (g1 < g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - invphi * (hi - lo);
      g1 = gap_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + invphi * (hi - lo);
      g2 = gap_at(x2);
    }
  }
  CrossingGap out{best_gap, f_sweep[best]};
  const double xm = 0.5 * (lo + hi);
  const double gm = gap_at(xm);
  if (gm < out.min_gap_hz) out = {gm, xm};
  return out;
}

double gamma_avg_theory(double gamma1_q, double gamma1_tls, double g_eff_hz, double delta_hz,
                        MixingConvention convention) {
  const double angle = convention == MixingConvention::AsPublished
                           ? mixing_angle(g_eff_hz, delta_hz)
                           : 0.5 * mixing_angle(g_eff_hz, std::abs(delta_hz));
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return gamma1_q * c * c + gamma1_tls * s * s;
}

}  // namespace tlslab
