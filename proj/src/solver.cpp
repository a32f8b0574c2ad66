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

#include "tlslab/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

#include "tlslab/parallel.hpp"

namespace tlslab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

DensityMatrix basis_state(int index) {
  require(index >= 0 && index < kDim, "basis_state", "index out of range");
  DensityMatrix rho = DensityMatrix::Zero();
  rho(index, index) = 1.0;
  return rho;
}

DensityMatrix basis_state(std::string_view label) {
  require(label.size() == kNumElements, "basis_state", "label needs one digit per element");
  int index = 0;
  for (int e = 0; e < kNumElements; ++e) {
    require(label[e] == '0' || label[e] == '1', "basis_state", "label digits must be 0 or 1");
    if (label[e] == '1') index |= element_bit(kAllElements[e]);
  }
  return basis_state(index);
}

void validate_density(const DensityMatrix& rho, std::string_view context) {
  const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale, context, "not Hermitian");
  require(std::abs(rho.trace() - 1.0) <= 1e-9, context, "trace differs from 1");
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-8, context, "negative eigenvalue");
}

double population(const DensityMatrix& rho, Element e) {
  const int b = element_bit(e);
  double p = 0.0;
  for (int i = 0; i < kDim; ++i) {
    if (i & b) p += rho(i, i).real();
  }
  return p;
}

double expectation(const DensityMatrix& rho, Element e, Axis axis) {
  const int b = element_bit(e);
  if (axis == Axis::Z) return 1.0 - 2.0 * population(rho, e);
  cplx acc = 0.0;
  for (int i = 0; i < kDim; ++i) {
    if (i & b) continue;
    acc += rho(i | b, i);
  }
  return axis == Axis::X ? 2.0 * acc.real() : 2.0 * acc.imag();
}

Eigen::Matrix4cd reduce_to_qubits(const DensityMatrix& rho) {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      if ((i & 3) != (j & 3)) continue;
      out(i >> 2, j >> 2) += rho(i, j);
    }
  }
  return out;
}

double PulseSchedule::span() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

void PulseSchedule::validate() const {
  constexpr std::string_view ctx = "PulseSchedule";
  for (const auto& s : segments) {
    require(s.duration >= 0.0 && std::isfinite(s.duration), ctx, "segment durations must be >= 0");
    require(s.rise_fall >= 0.0, ctx, "rise_fall must be >= 0");
    require(s.rise_fall <= 0.5 * s.duration + 1e-18, ctx, "rise_fall exceeds half the segment");
    for (const auto& d : s.drives) {
      require(element_index(d.element) >= 0 && element_index(d.element) < kNumElements, ctx,
              "unknown drive element");
      require(d.rabi_hz >= 0.0, ctx, "drive rabi_hz must be >= 0");
    }
    for (const auto& f : s.freq_hz) {
      if (f) require(*f > 0.0, ctx, "frequency overrides must be > 0");
    }
  }
  const double total = span();
  for (const auto& op : instant_ops) {
    require(op.time >= 0.0 && op.time <= total, ctx, "instant op outside the schedule span");
  }
}

PulseSchedule& PulseSchedule::idle(double duration) {
  Segment s;
  s.duration = duration;
  segments.push_back(std::move(s));
  return *this;
}

PulseSchedule& PulseSchedule::add(Segment segment) {
  segments.push_back(std::move(segment));
  return *this;
}

PulseSchedule& PulseSchedule::at(double time, Operation op) {
  instant_ops.push_back({time, std::move(op)});
  return *this;
}

namespace {

Eigen::Matrix2cd rotation_matrix(const Rotation& r) {
  double nx = 0, ny = 0, nz = 0;
  if (r.axis == Axis::Z) {
    nz = 1.0;
  } else {
    const double phi = r.phase_rad + (r.axis == Axis::Y ? 0.5 * std::numbers::pi : 0.0);
    nx = std::cos(phi);
    ny = std::sin(phi);
  }
  const double c = std::cos(0.5 * r.angle_rad);
  const cplx mis = cplx(0.0, -std::sin(0.5 * r.angle_rad));
  Eigen::Matrix2cd u;
  u(0, 0) = c + mis * nz;
  u(0, 1) = mis * cplx(nx, -ny);
  u(1, 0) = mis * cplx(nx, ny);
  u(1, 1) = c - mis * nz;
  return u;
}

template <typename M>
void apply_local_unitary(M& rho, int bit, const Eigen::Matrix2cd& u) {
  const auto n = static_cast<int>(rho.rows());
  for (int c = 0; c < n; ++c) {
    for (int r0 = 0; r0 < n; ++r0) {
      if (r0 & bit) continue;
      const cplx a0 = rho(r0, c), a1 = rho(r0 | bit, c);
      rho(r0, c) = u(0, 0) * a0 + u(0, 1) * a1;
      rho(r0 | bit, c) = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int c0 = 0; c0 < n; ++c0) {
      if (c0 & bit) continue;
      const cplx b0 = rho(r, c0), b1 = rho(r, c0 | bit);
      rho(r, c0) = b0 * std::conj(u(0, 0)) + b1 * std::conj(u(0, 1));
      rho(r, c0 | bit) = b0 * std::conj(u(1, 0)) + b1 * std::conj(u(1, 1));
    }
  }
}

template <typename M>
void apply_reset(M& rho, int bit) {
  const auto n = static_cast<int>(rho.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if ((i & bit) || (j & bit)) continue;
      rho(i, j) += rho(i | bit, j | bit);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if ((i & bit) || (j & bit)) rho(i, j) = 0.0;
    }
  }
}

void check_element(Element e) {
  require(element_index(e) >= 0 && element_index(e) < kNumElements, "apply_instant_op",
          "unknown element");
}

}  // namespace

DensityMatrix apply_instant_op(const DensityMatrix& rho, const Operation& op) {
  DensityMatrix out = rho;
  if (const auto* r = std::get_if<Rotation>(&op)) {
    check_element(r->element);
    apply_local_unitary(out, element_bit(r->element), rotation_matrix(*r));
  } else if (const auto* z = std::get_if<Reset>(&op)) {
    check_element(z->element);
    apply_reset(out, element_bit(z->element));
  }
  return out;
}

const std::vector<double>& SimResult::observable(std::string_view name) const {
  for (const auto& o : observables) {
    if (o.name == name) return o.values;
  }
  fail(ErrorKind::InvalidArgument, "SimResult", "no observable named '" + std::string(name) + "'");
}

namespace {

struct ActiveSpace {
  std::vector<int> elems;       // active element indices, Q1 first
  std::array<int, kNumElements> bit{};  // reduced-index bit per element, 0 when inactive
  int n = 1;
  std::vector<int> full_index;  // reduced index -> full index
};

bool rotates(const Operation& op, int& element) {
  if (const auto* r = std::get_if<Rotation>(&op)) {
    element = element_index(r->element);
    return r->axis != Axis::Z && r->angle_rad != 0.0;
  }
  return false;
}

ActiveSpace find_active(const PulseSchedule& schedule, const CircuitModel& model, const MatrixXcd& rho0) {
  std::array<bool, kNumElements> act{};
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      if (rho0(i, j) == cplx(0.0)) continue;
      for (Element e : kAllElements) {
        if ((i | j) & element_bit(e)) act[element_index(e)] = true;
      }
    }
  }
  for (const auto& s : schedule.segments) {
    for (const auto& d : s.drives) {
      if (d.rabi_hz != 0.0) act[element_index(d.element)] = true;
    }
  }
  for (const auto& op : schedule.instant_ops) {
    int e = 0;
    if (rotates(op.op, e)) act[e] = true;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : model.couplings) {
      if (c.g_hz == 0.0) continue;
      const int a = element_index(c.a), b = element_index(c.b);
      if (act[a] != act[b]) {
        act[a] = act[b] = true;
        changed = true;
      }
    }
  }
  ActiveSpace sp;
  for (int e = 0; e < kNumElements; ++e) {
    if (act[e]) sp.elems.push_back(e);
  }
  const int k = static_cast<int>(sp.elems.size());
  sp.n = 1 << k;
  for (int p = 0; p < k; ++p) sp.bit[sp.elems[p]] = 1 << (k - 1 - p);
  sp.full_index.resize(sp.n);
  for (int r = 0; r < sp.n; ++r) {
    int full = 0;
    for (int p = 0; p < k; ++p) {
      if (r & sp.bit[sp.elems[p]]) full |= element_bit(kAllElements[sp.elems[p]]);
    }
    sp.full_index[r] = full;
  }
  return sp;
}

struct SegmentInfo {
  double start = 0.0;
  double end = 0.0;
  double ramp_end = 0.0;
  std::array<double, kNumElements> prev{};
  std::array<double, kNumElements> target{};
};

struct Rates {
  std::vector<double> g1;
  std::vector<double> gphi;
  bool any() const {
    for (double g : g1) if (g != 0.0) return true;
    for (double g : gphi) if (g != 0.0) return true;
    return false;
  }
};

class Engine {
 public:
  Engine(const PulseSchedule& schedule, const CircuitModel& model, const MatrixXcd& rho0,
         const OffsetPath* path, const EvolveOptions& options)
      : schedule_(schedule), model_(model), path_(path), options_(options) {
    sp_ = find_active(schedule, model, rho0);
    double t = 0.0;
    std::array<double, kNumElements> level = model.freq_hz;
    for (const auto& s : schedule.segments) {
      SegmentInfo info;
      info.start = t;
      info.end = t + s.duration;
      info.prev = level;
      for (int e = 0; e < kNumElements; ++e) info.target[e] = s.freq_hz[e].value_or(model.freq_hz[e]);
      info.ramp_end = info.start;
      if (s.rise_fall > 0.0) {
        for (int e : sp_.elems) {
          if (info.prev[e] != info.target[e]) info.ramp_end = info.start + s.rise_fall;
        }
      }
      level = info.target;
      segs_.push_back(info);
      t = info.end;
    }
    rates_.g1.resize(sp_.elems.size());
    rates_.gphi.resize(sp_.elems.size());
    for (std::size_t p = 0; p < sp_.elems.size(); ++p) {
      rates_.g1[p] = model.gamma1[sp_.elems[p]];
      rates_.gphi[p] = model.gamma_phi[sp_.elems[p]];
    }
    for (const auto& c : model.couplings) {
      if (c.g_hz != 0.0 && sp_.bit[element_index(c.a)] && sp_.bit[element_index(c.b)]) couples_ = true;
    }
    noise_bit_ = sp_.bit[element_index(options.noise_element)];
  }

  std::vector<MatrixXcd> run(const MatrixXcd& rho0_full, std::span<const double> sample_times) {
    MatrixXcd rho(sp_.n, sp_.n);
    for (int i = 0; i < sp_.n; ++i) {
      for (int j = 0; j < sp_.n; ++j) rho(i, j) = rho0_full(sp_.full_index[i], sp_.full_index[j]);
    }
    const cplx trace0 = rho.trace();
    const double total = schedule_.span();

    std::vector<InstantOp> ops = schedule_.instant_ops;
    std::stable_sort(ops.begin(), ops.end(),
                     [](const InstantOp& a, const InstantOp& b) { return a.time < b.time; });

    std::vector<double> bp{0.0, total};
    for (const auto& s : segs_) {
      bp.push_back(s.start);
      bp.push_back(s.ramp_end);
    }
    for (double t : sample_times) bp.push_back(t);
    for (const auto& op : ops) bp.push_back(op.time);
    if (path_ && noise_bit_) {
      for (double t : path_->times) {
        if (t > 0.0 && t < total) bp.push_back(t);
      }
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    std::vector<MatrixXcd> out;
    out.reserve(sample_times.size());
    std::size_t next_op = 0, next_sample = 0;
    for (std::size_t b = 0; b < bp.size(); ++b) {
      const double t = bp[b];
      while (next_op < ops.size() && ops[next_op].time <= t) apply_op(rho, ops[next_op++].op);
      while (next_sample < sample_times.size() && sample_times[next_sample] <= t) {
        if (std::abs(rho.trace() - trace0) > 1e-6) {
          fail(ErrorKind::Numerical, "solver.propagate",
               "trace drift above 1e-6 at t = " + std::to_string(t) + " s");
        }
        out.push_back(embed(rho));
        ++next_sample;
      }
      if (b + 1 < bp.size() && next_sample < sample_times.size()) advance(rho, t, bp[b + 1]);
    }
    return out;
  }

 private:
  double freq_at(const SegmentInfo& s, int e, double t) const {
    if (t >= s.ramp_end || s.ramp_end <= s.start) return s.target[e];
    const double w = (t - s.start) / (s.ramp_end - s.start);
    return s.prev[e] + (s.target[e] - s.prev[e]) * w;
  }

  double drive_freq(const SegmentInfo& s, const DriveTerm& d) const {
    return s.target[element_index(d.element)] + d.detuning_hz;
  }

  bool drive_active(const DriveTerm& d) const {
    return d.rabi_hz != 0.0 && sp_.bit[element_index(d.element)] != 0;
  }

  MatrixXcd hamiltonian(std::size_t seg, double t, double offset) const {
    const auto& s = segs_[seg];
    const int n = sp_.n;
    MatrixXcd h = MatrixXcd::Zero(n, n);
    std::array<double, kNumElements> w{};
    for (int e : sp_.elems) {
      w[e] = kTwoPi * (freq_at(s, e, t) - model_.frame_hz);
      if (sp_.bit[e] == noise_bit_) w[e] += kTwoPi * offset;
    }
    for (int r = 0; r < n; ++r) {
      double d = 0.0;
      for (int e : sp_.elems) {
        if (r & sp_.bit[e]) d += w[e];
      }
      h(r, r) = d;
    }
    for (const auto& c : model_.couplings) {
      const int ba = sp_.bit[element_index(c.a)], bb = sp_.bit[element_index(c.b)];
      if (c.g_hz == 0.0 || !ba || !bb) continue;
      for (int r = 0; r < n; ++r) {
        if ((r & ba) && !(r & bb)) {
          const int r2 = (r & ~ba) | bb;
          h(r2, r) += kTwoPi * c.g_hz;
          h(r, r2) += kTwoPi * c.g_hz;
        }
      }
    }
    for (const auto& d : schedule_.segments[seg].drives) {
      if (!drive_active(d)) continue;
      const int bd = sp_.bit[element_index(d.element)];
      const double phase = d.phase_rad - kTwoPi * (drive_freq(s, d) - model_.frame_hz) * t;
      const cplx amp = std::numbers::pi * d.rabi_hz * std::polar(1.0, phase);
      for (int r = 0; r < n; ++r) {
        if (r & bd) continue;
        h(r | bd, r) += amp;
        h(r, r | bd) += std::conj(amp);
      }
    }
    return h;
  }

  MatrixXcd rhs(const MatrixXcd& h, const MatrixXcd& rho) const {
    MatrixXcd d = cplx(0.0, -1.0) * (h * rho - rho * h);
    const int n = sp_.n;
    for (std::size_t p = 0; p < sp_.elems.size(); ++p) {
      const double g1 = rates_.g1[p], gp = rates_.gphi[p];
      if (g1 == 0.0 && gp == 0.0) continue;
      const int b = sp_.bit[sp_.elems[p]];
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const int bi = (i & b) ? 1 : 0, bj = (j & b) ? 1 : 0;
          cplx v = -0.5 * g1 * (bi + bj) * rho(i, j);
          if (!bi && !bj) v += g1 * rho(i | b, j | b);
          if (bi != bj) v -= gp * rho(i, j);
          d(i, j) += v;
        }
      }
    }
    return d;
  }

  struct CacheEntry {
    std::vector<double> key;
    bool unitary = false;
    MatrixXcd m;
  };

  const CacheEntry& propagator(const MatrixXcd& h, double dt) {
    std::vector<double> key;
    key.reserve(2 * h.size() + 2 * rates_.g1.size() + 2);
    key.push_back(static_cast<double>(sp_.n));
    key.push_back(dt);
    for (double g : rates_.g1) key.push_back(g);
    for (double g : rates_.gphi) key.push_back(g);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      key.push_back(h.data()[i].real());
      key.push_back(h.data()[i].imag());
    }
    thread_local std::deque<CacheEntry> cache;
    for (const auto& c : cache) {
      if (c.key == key) return c;
    }
    CacheEntry entry;
    entry.key = std::move(key);
    if (!rates_.any()) {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
      VectorXcd ph(sp_.n);
      for (int i = 0; i < sp_.n; ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * dt);
      entry.unitary = true;
      entry.m = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    } else {
      const int n = sp_.n, n2 = n * n;
      MatrixXcd L(n2, n2);
      MatrixXcd unit = MatrixXcd::Zero(n, n);
      for (int c = 0; c < n2; ++c) {
        unit(c % n, c / n) = 1.0;
        const MatrixXcd col = rhs(h, unit);
        L.col(c) = Eigen::Map<const VectorXcd>(col.data(), n2);
        unit(c % n, c / n) = 0.0;
      }
      entry.m = (L * dt).exp();
    }
    if (cache.size() >= 48) cache.pop_front();
    cache.push_back(std::move(entry));
    return cache.back();
  }

  void apply_op(MatrixXcd& rho, const Operation& op) const {
    if (const auto* r = std::get_if<Rotation>(&op)) {
      check_element(r->element);
      const int b = sp_.bit[element_index(r->element)];
      if (b) apply_local_unitary(rho, b, rotation_matrix(*r));
    } else if (const auto* z = std::get_if<Reset>(&op)) {
      check_element(z->element);
      const int b = sp_.bit[element_index(z->element)];
      if (b) apply_reset(rho, b);
    }
  }

  MatrixXcd embed(const MatrixXcd& rho) const {
    MatrixXcd full = MatrixXcd::Zero(kDim, kDim);
    for (int i = 0; i < sp_.n; ++i) {
      for (int j = 0; j < sp_.n; ++j) full(sp_.full_index[i], sp_.full_index[j]) = rho(i, j);
    }
    return full;
  }

  // Uncoupled, undriven stretch: each element is an independent phase-covariant channel.
  void advance_diagonal(MatrixXcd& rho, const SegmentInfo& s, double t0, double t1, double offset) const {
    const double dt = t1 - t0;
    const int n = sp_.n;
    for (std::size_t p = 0; p < sp_.elems.size(); ++p) {
      const int e = sp_.elems[p];
      const int b = sp_.bit[e];
      double mean_f = 0.5 * (freq_at(s, e, t0) + freq_at(s, e, t1)) - model_.frame_hz;
      if (b == noise_bit_) mean_f += offset;
      const double keep = std::exp(-rates_.g1[p] * dt);
      const cplx coh = std::polar(std::exp(-(0.5 * rates_.g1[p] + rates_.gphi[p]) * dt), kTwoPi * mean_f * dt);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const bool bi = i & b, bj = j & b;
          if (!bi && !bj) {
            rho(i, j) += (1.0 - keep) * rho(i | b, j | b);
          } else if (bi && bj) {
            rho(i, j) *= keep;
          } else if (!bi) {
            rho(i, j) *= coh;
          } else {
            rho(i, j) *= std::conj(coh);
          }
        }
      }
    }
  }

  void advance_rk4(MatrixXcd& rho, std::size_t seg, double t0, double t1, double offset) {
    const auto& s = segs_[seg];
    double scale = std::abs(offset);
    for (int e : sp_.elems) {
      scale = std::max({scale, std::abs(freq_at(s, e, t0) - model_.frame_hz),
                        std::abs(freq_at(s, e, t1) - model_.frame_hz)});
    }
    for (const auto& c : model_.couplings) scale = std::max(scale, std::abs(c.g_hz));
    for (const auto& d : schedule_.segments[seg].drives) {
      if (!drive_active(d)) continue;
      scale = std::max({scale, d.rabi_hz, std::abs(drive_freq(s, d) - model_.frame_hz)});
    }
    for (std::size_t p = 0; p < rates_.g1.size(); ++p) {
      scale = std::max(scale, (rates_.g1[p] + rates_.gphi[p]) / kTwoPi);
    }
    double hmax = options_.max_step_s > 0.0 ? options_.max_step_s
                                            : (scale > 0.0 ? 1.0 / (400.0 * scale) : t1 - t0);
    const auto steps = static_cast<std::uint64_t>(std::ceil((t1 - t0) / hmax - 1e-9));
    steps_ += std::max<std::uint64_t>(steps, 1);
    if (steps_ > options_.max_steps) {
      fail(ErrorKind::Numerical, "solver.propagate",
           "step-size underflow: more than " + std::to_string(options_.max_steps) +
               " RK4 steps needed; use coarser sampling, shorter ramps or a larger max_step_s");
    }
    const double h = (t1 - t0) / static_cast<double>(std::max<std::uint64_t>(steps, 1));
    for (std::uint64_t k = 0; k < std::max<std::uint64_t>(steps, 1); ++k) {
      const double t = t0 + static_cast<double>(k) * h;
      const MatrixXcd ha = hamiltonian(seg, t, offset);
      const MatrixXcd hm = hamiltonian(seg, t + 0.5 * h, offset);
      const MatrixXcd hb = hamiltonian(seg, t + h, offset);
      const MatrixXcd k1 = rhs(ha, rho);
      const MatrixXcd k2 = rhs(hm, rho + 0.5 * h * k1);
      const MatrixXcd k3 = rhs(hm, rho + 0.5 * h * k2);
      const MatrixXcd k4 = rhs(hb, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  void advance(MatrixXcd& rho, double t0, double t1) {
    if (!(t1 > t0)) return;
    const double mid = 0.5 * (t0 + t1);
    std::size_t seg = 0;
    while (seg + 1 < segs_.size() && segs_[seg].end <= mid) ++seg;
    if (segs_.empty()) return;
    const auto& s = segs_[seg];
    const double offset = (path_ && noise_bit_) ? path_->at(mid) : 0.0;
    bool driven = false, static_drive = true;
    for (const auto& d : schedule_.segments[seg].drives) {
      if (!drive_active(d)) continue;
      driven = true;
      if (std::abs(drive_freq(s, d) - model_.frame_hz) > 1e-9) static_drive = false;
    }
    if (!driven && !couples_) {
      advance_diagonal(rho, s, t0, t1, offset);
      return;
    }
    const bool ramping = t0 < s.ramp_end;
    if (ramping || !static_drive) {
      advance_rk4(rho, seg, t0, t1, offset);
      return;
    }
    const MatrixXcd h = hamiltonian(seg, mid, offset);
    const CacheEntry& p = propagator(h, t1 - t0);
    if (p.unitary) {
      rho = p.m * rho * p.m.adjoint();
    } else {
      const int n2 = sp_.n * sp_.n;
      VectorXcd v = p.m * Eigen::Map<const VectorXcd>(rho.data(), n2);
      rho = Eigen::Map<const MatrixXcd>(v.data(), sp_.n, sp_.n);
    }
  }

  const PulseSchedule& schedule_;
  const CircuitModel& model_;
  const OffsetPath* path_;
  EvolveOptions options_;
  ActiveSpace sp_;
  std::vector<SegmentInfo> segs_;
  Rates rates_;
  bool couples_ = false;
  int noise_bit_ = 0;
  std::uint64_t steps_ = 0;
};

void check_samples(std::span<const double> sample_times, double span) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    require(sample_times[i] >= 0.0 && sample_times[i] <= span * (1.0 + 1e-12), "solver.propagate",
            "sample time outside the schedule span");
    if (i > 0) require(sample_times[i] >= sample_times[i - 1], "solver.propagate",
                       "sample times must be ascending");
  }
}

}  // namespace

std::vector<DensityMatrix> evolve(const PulseSchedule& schedule, const CircuitModel& model,
                                  const DensityMatrix& rho0, std::span<const double> sample_times,
                                  const OffsetPath* path, const EvolveOptions& options) {
  schedule.validate();
  check_samples(sample_times, schedule.span());
  const MatrixXcd start = rho0;
  Engine engine(schedule, model, start, path, options);
  const auto states = engine.run(start, sample_times);
  std::vector<DensityMatrix> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = states[i];
  return out;
}

SimResult propagate(const PulseSchedule& schedule, const CircuitModel& model, const DensityMatrix& rho0,
                    std::span<const double> sample_times, const PropagateOptions& options) {
  validate_density(rho0, "solver.propagate: rho0");
  require(options.n_trajectories >= 1, "solver.propagate", "n_trajectories must be >= 1");
  const bool stochastic = options.noise && (!options.noise->fluctuators.empty() ||
                                            options.noise->quasi_static_sigma_hz > 0.0);
  require(stochastic || options.n_trajectories == 1, "solver.propagate",
          "n_trajectories must be 1 without stochastic noise");
  CircuitModel m = model;
  if (options.noise) {
    options.noise->validate();
    m.gamma_phi[element_index(options.noise_element)] += options.noise->markovian_dephasing_rate();
  }
  EvolveOptions eo;
  eo.noise_element = options.noise_element;
  eo.max_step_s = options.max_step_s;
  eo.max_steps = options.max_steps;

  std::vector<DensityMatrix> mean;
  if (!stochastic) {
    mean = evolve(schedule, m, rho0, sample_times, nullptr, eo);
  } else {
    schedule.validate();
    check_samples(sample_times, schedule.span());
    constexpr int kBlock = 64;
    const int n = options.n_trajectories;
    const int blocks = (n + kBlock - 1) / kBlock;
    const double span = schedule.span();
    std::vector<std::vector<DensityMatrix>> sums(static_cast<std::size_t>(blocks));
    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
      std::vector<DensityMatrix> acc(sample_times.size(), DensityMatrix::Zero());
      const int first = static_cast<int>(b) * kBlock;
      const int last = std::min(n, first + kBlock);
      for (int k = first; k < last; ++k) {
        Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(k));
        const OffsetPath path = sample_offset_path(*options.noise, span, rng);
        const auto states = evolve(schedule, m, rho0, sample_times, &path, eo);
        for (std::size_t i = 0; i < states.size(); ++i) acc[i] += states[i];
      }
      sums[b] = std::move(acc);
    });
    mean.resize(sample_times.size());
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
      std::vector<DensityMatrix> parts(static_cast<std::size_t>(blocks));
      for (int b = 0; b < blocks; ++b) parts[b] = sums[b][i];
      mean[i] = pairwise_sum(parts, 0, parts.size()) / static_cast<double>(n);
    }
  }

  SimResult out;
  out.times.assign(sample_times.begin(), sample_times.end());
  out.seed = options.seed;
  out.n_trajectories = options.n_trajectories;
  for (Element e : kAllElements) {
    Observable o{"p_" + std::string(element_name(e)), {}};
    for (const auto& rho : mean) o.values.push_back(population(rho, e));
    out.observables.push_back(std::move(o));
  }
  for (const auto& [e, axis] : options.expectations) {
    std::string name(axis_name(axis));
    for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    Observable o{name + "_" + std::string(element_name(e)), {}};
    for (const auto& rho : mean) o.values.push_back(expectation(rho, e, axis));
    out.observables.push_back(std::move(o));
  }
  if (options.keep_snapshots) out.rho_snapshots = std::move(mean);
  return out;
}

SimResult propagate(const PulseSchedule& schedule, const DeviceParams& params, const DensityMatrix& rho0,
                    std::span<const double> sample_times, const PropagateOptions& options) {
  params.validate();
  return propagate(schedule, CircuitModel::full(params), rho0, sample_times, options);
}

std::uint64_t sample_shots(double prob, std::uint64_t n_shots, std::uint64_t seed) {
  require(n_shots >= 1, "sample_shots", "n_shots must be >= 1");
  require(prob >= -1e-9 && prob <= 1.0 + 1e-9, "sample_shots", "probability outside [0, 1]");
  Rng rng = make_rng(seed);
  std::binomial_distribution<std::uint64_t> draw(n_shots, std::clamp(prob, 0.0, 1.0));
  return draw(rng);
}

}  // namespace tlslab
