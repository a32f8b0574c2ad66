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
#include <map>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include "tlslab/analysis.hpp"
#include "tlslab/common.hpp"

namespace tlslab {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-segment one-sided periodogram terms X_k (k = 1 .. L/2) of mean-removed,
// Hann-windowed segments.
class SegmentTransform {
 public:
  explicit SegmentTransform(std::size_t len) : len_(len), window_(len) {
    in_ = fftw_alloc_real(len);
    out_ = fftw_alloc_complex(len / 2 + 1);
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(len), in_, out_, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < len; ++k) {
      window_[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(len)));
      power_ += window_[k] * window_[k];
    }
  }
  ~SegmentTransform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  SegmentTransform(const SegmentTransform&) = delete;
  SegmentTransform& operator=(const SegmentTransform&) = delete;

  std::vector<cplx> operator()(std::span<const double> seg) {
    const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(len_);
    for (std::size_t k = 0; k < len_; ++k) in_[k] = (seg[k] - mean) * window_[k];
    fftw_execute(plan_);
    std::vector<cplx> x(len_ / 2);
    for (std::size_t k = 1; k <= len_ / 2; ++k) x[k - 1] = cplx(out_[k][0], out_[k][1]);
    return x;
  }
  double window_power() const { return power_; }

 private:
  std::size_t len_;
  std::vector<double> window_;
  double power_ = 0.0;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

std::vector<std::size_t> segment_starts(std::size_t n, std::size_t len, double overlap, std::string_view ctx) {
  require(len >= 4, ctx, "segment_len must be >= 4");
  require(len <= n, ctx, "segment_len exceeds the series length");
  require(overlap >= 0.0 && overlap < 1.0, ctx, "overlap must lie in [0, 1)");
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - overlap))));
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= n; s += step) starts.push_back(s);
  if (starts.size() < 2) fail(ErrorKind::InvalidArgument, std::string(ctx), "fewer than 2 segments");
  return starts;
}

SpectrumEstimate averaged(std::span<const double> a, std::span<const double> b, double ts, std::size_t len,
                          double overlap, double lag, bool cross, std::string_view ctx) {
  require(ts > 0.0, ctx, "ts must be > 0");
  const auto starts = segment_starts(a.size(), len, overlap, ctx);
  SegmentTransform fft(len);
  const std::size_t nb = len / 2;
  const double norm = 2.0 * ts / fft.window_power();
  std::vector<std::vector<double>> per_seg(starts.size(), std::vector<double>(nb));
  SpectrumEstimate out;
  out.freqs.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) out.freqs[k] = static_cast<double>(k + 1) / (static_cast<double>(len) * ts);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto xa = fft(a.subspan(starts[s], len));
    const auto xb = cross ? fft(b.subspan(starts[s], len)) : xa;
    for (std::size_t k = 0; k < nb; ++k) {
      const double nyq = (k + 1 == nb && len % 2 == 0) ? 0.5 : 1.0;
      const cplx c = std::conj(xa[k]) * xb[k] * std::polar(1.0, -kTwoPi * out.freqs[k] * lag);
      per_seg[s][k] = nyq * norm * c.real();
    }
  }
  const double m = static_cast<double>(starts.size());
  out.psd.assign(nb, 0.0);
  out.variance.assign(nb, 0.0);
  for (std::size_t k = 0; k < nb; ++k) {
    double sum = 0.0;
    for (const auto& seg : per_seg) sum += seg[k];
    const double mean = sum / m;
    double ss = 0.0;
    for (const auto& seg : per_seg) ss += (seg[k] - mean) * (seg[k] - mean);
    out.psd[k] = mean;
    out.variance[k] = ss / (m * (m - 1.0));
  }
  return out;
}

}  // namespace

SpectrumEstimate welch_psd(std::span<const double> series, double ts, std::size_t segment_len, double overlap) {
  SpectrumEstimate out = averaged(series, series, ts, segment_len, overlap, 0.0, false, "analysis.welch_psd");
  out.source = SpectrumSource::Welch;
  return out;
}

SpectrumEstimate cross_psd(std::span<const double> a, std::span<const double> b, double ts, std::size_t segment_len,
                           double overlap, double lag_s) {
  require(a.size() == b.size(), "analysis.cross_psd", "series lengths differ");
  SpectrumEstimate out = averaged(a, b, ts, segment_len, overlap, lag_s, true, "analysis.cross_psd");
  out.source = SpectrumSource::Cross;
  if (std::any_of(out.psd.begin(), out.psd.end(), [](double v) { return v < 0.0; })) {
    out.flags.push_back("negative_bins");
  }
  return out;
}

TransduceResult transduce(std::span<const double> probabilities, double tau, double contrast) {
  require(tau > 0.0, "analysis.transduce", "tau must be > 0");
  require(contrast > 0.0 && contrast <= 1.0, "analysis.transduce", "contrast must lie in (0, 1]");
  TransduceResult out;
  out.offsets_hz.resize(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    double x = (2.0 * probabilities[i] - 1.0) / contrast;
    if (std::abs(x) > 1.0) {
      x = std::copysign(1.0, x);
      ++out.clipped;
    }
    out.offsets_hz[i] = std::asin(x) / (kTwoPi * tau);
  }
  if (out.clipped) out.flags.push_back("fringe_wrap");
  return out;
}

double ramsey_contrast(const NoiseModel& model, double tau, double gamma1, double gamma_phi) {
  require(tau > 0.0, "analysis.ramsey_contrast", "tau must be > 0");
  NoiseModel fast = model;
  fast.quasi_static_sigma_hz = 0.0;
  RamseyOptions opt;
  opt.experiment_duration_s = tau;
  const double c = fast.empty() ? 1.0 : ramsey_prediction(fast, tau, opt).coherence;
  return c * std::exp(-(0.5 * gamma1 + gamma_phi) * tau);
}

StitchResult stitch_spectra(std::span<const SpectrumEstimate> inputs, const StitchOptions& options) {
  constexpr std::string_view ctx = "analysis.stitch_spectra";
  require(!inputs.empty(), ctx, "no spectra to stitch");
  require(options.bins_per_decade >= 1, ctx, "bins_per_decade must be >= 1");
  for (const auto& s : inputs) {
    s.validate();
    require(s.size() >= 1, ctx, "empty spectrum");
  }
  StitchResult out;
  out.spectrum.source = SpectrumSource::Stitched;

  // Band connectivity: sorted by lower edge, each band must start before the union ends.
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inputs[a].freqs.front() < inputs[b].freqs.front();
  });
  double reach = inputs[order[0]].freqs.back();
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (inputs[order[i]].freqs.front() > reach) {
      fail(ErrorKind::InvalidArgument, std::string(ctx), "disjoint bands cannot be stitched");
    }
    reach = std::max(reach, inputs[order[i]].freqs.back());
  }

  const bool same_grid = std::all_of(inputs.begin(), inputs.end(), [&](const SpectrumEstimate& s) {
    return s.freqs == inputs.front().freqs;
  });

  // binned[i][bin] = (mean psd, variance) of input i.
  std::vector<std::map<long, std::pair<double, double>>> binned(inputs.size());
  std::vector<double> grid_f;
  if (same_grid) {
    grid_f = inputs.front().freqs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (std::size_t k = 0; k < grid_f.size(); ++k) binned[i][static_cast<long>(k)] = {inputs[i].psd[k], inputs[i].variance[k]};
    }
  } else {
    const double bpd = options.bins_per_decade;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::map<long, std::tuple<double, double, int>> acc;
      for (std::size_t k = 0; k < inputs[i].size(); ++k) {
        const long bin = std::lround(std::floor(std::log10(inputs[i].freqs[k]) * bpd));
        auto& [s, v, c] = acc[bin];
        s += inputs[i].psd[k];
        v += inputs[i].variance[k];
        ++c;
      }
      for (const auto& [bin, t] : acc) {
        const auto& [s, v, c] = t;
        binned[i][bin] = {s / c, v / (static_cast<double>(c) * c)};
      }
    }
  }

  // Overlap consistency.
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = i + 1; j < inputs.size(); ++j) {
      std::vector<double> ratios;
      for (const auto& [bin, pv] : binned[i]) {
        auto it = binned[j].find(bin);
        if (it == binned[j].end() || !(pv.first > 0.0) || !(it->second.first > 0.0)) continue;
        ratios.push_back(10.0 * std::log10(pv.first / it->second.first));
      }
      if (ratios.empty()) continue;
      std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
      out.consistency_db = std::max(out.consistency_db, std::abs(ratios[ratios.size() / 2]));
    }
  }
  if (out.consistency_db > options.max_discrepancy_db) {
    fail(ErrorKind::Numerical, std::string(ctx),
         "overlap discrepancy " + std::to_string(out.consistency_db) + " dB exceeds " +
             std::to_string(options.max_discrepancy_db) + " dB; merge rejected");
  }

  std::map<long, std::vector<std::pair<double, double>>> merged;
  for (const auto& b : binned) {
    for (const auto& [bin, pv] : b) merged[bin].push_back(pv);
  }
  for (const auto& [bin, list] : merged) {
    const bool weights = std::all_of(list.begin(), list.end(), [](const auto& pv) { return pv.second > 0.0; });
    double num = 0.0, den = 0.0;
    for (const auto& [p, v] : list) {
      const double w = weights ? 1.0 / v : 1.0;
      num += w * p;
      den += w;
    }
    double var = 0.0;
    if (weights) {
      var = 1.0 / den;
    } else {
      for (const auto& pv : list) var += pv.second;
      var /= static_cast<double>(list.size() * list.size());
    }
    const double f = same_grid ? grid_f[static_cast<std::size_t>(bin)]
                               : std::pow(10.0, (static_cast<double>(bin) + 0.5) / options.bins_per_decade);
    out.spectrum.freqs.push_back(f);
    out.spectrum.psd.push_back(num / den);
    out.spectrum.variance.push_back(var);
  }
  if (std::any_of(out.spectrum.psd.begin(), out.spectrum.psd.end(), [](double v) { return v < 0.0; })) {
    out.spectrum.flags.push_back("negative_bins");
  }
  return out;
}

SpectrumEstimate spinlock_to_psd(std::span<const double> omega_hz, std::span<const double> gamma_1rho, double gamma1,
                                 std::span<const double> gamma_1rho_sigma) {
  constexpr std::string_view ctx = "analysis.spinlock_to_psd";
  require(omega_hz.size() == gamma_1rho.size(), ctx, "length mismatch");
  require(gamma_1rho_sigma.empty() || gamma_1rho_sigma.size() == gamma_1rho.size(), ctx, "sigma length mismatch");
  require(gamma1 >= 0.0, ctx, "gamma1 must be >= 0");
  std::vector<std::size_t> order(omega_hz.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return omega_hz[a] < omega_hz[b]; });
  SpectrumEstimate out;
  out.source = SpectrumSource::SpinLocking;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (std::size_t i : order) {
    require(omega_hz[i] > 0.0, ctx, "Rabi frequencies must be > 0");
    const double excess = gamma_1rho[i] - 0.5 * gamma1;
    if (!(excess > 0.0)) {
      out.flags.push_back("dropped_omega_" + std::to_string(omega_hz[i]));
      continue;
    }
    if (!out.freqs.empty() && omega_hz[i] == out.freqs.back()) continue;
    out.freqs.push_back(omega_hz[i]);
    out.psd.push_back(excess / pi2);
    const double sig = gamma_1rho_sigma.empty() ? 0.0 : gamma_1rho_sigma[i] / pi2;
    out.variance.push_back(sig * sig);
  }
  return out;
}

}  // namespace tlslab
