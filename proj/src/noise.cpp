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

#include "tlslab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tlslab/common.hpp"

namespace tlslab {

std::string_view source_name(SpectrumSource s) {
  switch (s) {
    case SpectrumSource::Analytic: return "analytic";
    case SpectrumSource::Welch: return "welch";
    case SpectrumSource::Cross: return "cross";
    case SpectrumSource::SpinLocking: return "spin-locking";
    case SpectrumSource::Stitched: return "stitched";
  }
  return "?";
}

SpectrumSource parse_source(std::string_view name) {
  for (auto s : {SpectrumSource::Analytic, SpectrumSource::Welch, SpectrumSource::Cross,
                 SpectrumSource::SpinLocking, SpectrumSource::Stitched}) {
    if (source_name(s) == name) return s;
  }
  fail(ErrorKind::InvalidArgument, "parse_source", "unknown spectrum source '" + std::string(name) + "'");
}

void SpectrumEstimate::validate() const {
  constexpr std::string_view ctx = "SpectrumEstimate";
  require(convention == kOneSidedConvention, ctx, "unsupported convention '" + convention + "'");
  require(psd.size() == freqs.size() && variance.size() == freqs.size(), ctx, "length mismatch");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    require(freqs[i] > 0.0, ctx, "frequencies must be positive");
    if (i > 0) require(freqs[i] > freqs[i - 1], ctx, "frequencies must be ascending");
    require(std::isfinite(psd[i]), ctx, "psd must be finite");
    if (source != SpectrumSource::Cross && source != SpectrumSource::Stitched) {
      require(psd[i] >= 0.0, ctx, "negative psd only allowed for cross spectra");
    }
    require(variance[i] >= 0.0, ctx, "variance must be >= 0");
  }
}

void TelegraphFluctuator::validate() const {
  constexpr std::string_view ctx = "TelegraphFluctuator";
  require(amplitude_hz >= 0.0 && std::isfinite(amplitude_hz), ctx, "amplitude must be >= 0");
  require(switch_rate > 0.0 && std::isfinite(switch_rate), ctx, "switch rate must be > 0");
  require(p_up >= 0.0 && p_up <= 1.0, ctx, "p_up must lie in [0, 1]");
}

void NoiseModel::validate() const {
  for (const auto& f : fluctuators) f.validate();
  require(white_level >= 0.0, "NoiseModel", "white_level must be >= 0");
  require(quasi_static_sigma_hz >= 0.0, "NoiseModel", "quasi_static_sigma_hz must be >= 0");
}

double NoiseModel::markovian_dephasing_rate() const {
  return std::numbers::pi * std::numbers::pi * white_level;
}

double NoiseModel::total_variance() const {
  double v = quasi_static_sigma_hz * quasi_static_sigma_hz;
  for (const auto& f : fluctuators) v += f.variance();
  return v;
}

double OffsetPath::at(double t) const {
  if (times.empty()) return 0.0;
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  return values[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
}

OffsetPath OffsetPath::from_trajectory(const NoiseTrajectory& traj) {
  return {traj.times, traj.offsets};
}

TelegraphProcess::TelegraphProcess(const TelegraphFluctuator& tlf, Rng& rng) : tlf_(tlf) {
  std::bernoulli_distribution initial(tlf.p_up);
  up_ = initial(rng);
}

void TelegraphProcess::run_until(double t_end, Rng& rng, std::vector<double>* switch_times) {
  for (;;) {
    const double rate = up_ ? tlf_.rate_to_down() : tlf_.rate_to_up();
    if (rate <= 0.0) break;
    std::exponential_distribution<double> wait(rate);
    const double next = t_ + wait(rng);
    if (next > t_end) break;
    t_ = next;
    up_ = !up_;
    if (switch_times) switch_times->push_back(t_);
  }
  t_ = std::max(t_, t_end);
}

void TelegraphProcess::jump_to(double t_end, Rng& rng) {
  const double dt = t_end - t_;
  if (dt <= 0.0) return;
  const double relax = std::exp(-2.0 * tlf_.switch_rate * dt);
  const double p = tlf_.p_up;
  const double p_up_after = up_ ? p + (1.0 - p) * relax : p * (1.0 - relax);
  std::bernoulli_distribution draw(p_up_after);
  up_ = draw(rng);
  t_ = t_end;
}

OffsetPath sample_offset_path(const NoiseModel& model, double duration, Rng& rng) {
  double static_offset = 0.0;
  if (model.quasi_static_sigma_hz > 0.0) {
    std::normal_distribution<double> gauss(0.0, model.quasi_static_sigma_hz);
    static_offset = gauss(rng);
  }
  struct Event {
    double t;
    std::size_t which;
  };
  std::vector<Event> events;
  std::vector<TelegraphProcess> procs;
  procs.reserve(model.fluctuators.size());
  std::vector<double> initial(model.fluctuators.size());
  std::vector<double> switches;
  for (std::size_t k = 0; k < model.fluctuators.size(); ++k) {
    procs.emplace_back(model.fluctuators[k], rng);
    initial[k] = procs.back().offset();
    switches.clear();
    procs.back().run_until(duration, rng, &switches);
    for (double t : switches) events.push_back({t, k});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t < b.t || (a.t == b.t && a.which < b.which);
  });
  OffsetPath path;
  path.times.reserve(events.size() + 1);
  path.values.reserve(events.size() + 1);
  std::vector<double> current = initial;
  double sum = static_offset;
  for (double v : current) sum += v;
  path.times.push_back(0.0);
  path.values.push_back(sum);
  for (const Event& e : events) {
    current[e.which] = -current[e.which];
    sum = static_offset;
    for (double v : current) sum += v;
    if (e.t == path.times.back()) {
      path.values.back() = sum;
    } else {
      path.times.push_back(e.t);
      path.values.push_back(sum);
    }
  }
  return path;
}

NoiseTrajectory rtn_trajectory(const TelegraphFluctuator& tlf, double duration, double dt,
                               std::uint64_t seed) {
  tlf.validate();
  require(duration > 0.0 && dt > 0.0, "rtn_trajectory", "duration and dt must be positive");
  NoiseTrajectory out;
  if (dt > 1.0 / tlf.switch_rate) out.flags.push_back("dt_exceeds_switch_time");
  Rng rng = make_rng(seed);
  TelegraphProcess proc(tlf, rng);
  const auto n = static_cast<std::size_t>(std::ceil(duration / dt - 1e-12));
  out.times.resize(n);
  out.offsets.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    proc.run_until(t, rng, nullptr);
    out.times[k] = t;
    out.offsets[k] = proc.offset();
  }
  return out;
}

double tlf_psd(const TelegraphFluctuator& tlf, double f) {
  require(f >= 0.0, "tlf_psd", "frequency must be >= 0");
  const double lambda = 2.0 * tlf.switch_rate;
  const double w = kTwoPi * f;
  return 4.0 * tlf.variance() * lambda / (lambda * lambda + w * w);
}

namespace {

double model_psd(const NoiseModel& model, double f) {
  double s = model.white_level;
  for (const auto& tlf : model.fluctuators) s += tlf_psd(tlf, f);
  return s;
}

}  // namespace

SpectrumEstimate ensemble_psd(const NoiseModel& model, std::span<const double> f_grid) {
  SpectrumEstimate out;
  out.source = SpectrumSource::Analytic;
  out.freqs.assign(f_grid.begin(), f_grid.end());
  out.psd.resize(f_grid.size());
  out.variance.assign(f_grid.size(), 0.0);
  for (std::size_t i = 0; i < f_grid.size(); ++i) {
    require(f_grid[i] > 0.0 && (i == 0 || f_grid[i] > f_grid[i - 1]), "ensemble_psd",
            "frequency grid must be ascending and positive");
    out.psd[i] = model_psd(model, f_grid[i]);
  }
  return out;
}

OneOverFSynthesis synthesize_one_over_f(double level_at_1hz, double alpha, double rate_min,
                                        double rate_max, int count) {
  constexpr std::string_view ctx = "synthesize_one_over_f";
  require(count >= 1, ctx, "count must be >= 1");
  require(rate_min > 0.0 && rate_min < rate_max, ctx, "need 0 < rate_min < rate_max");
  require(level_at_1hz > 0.0, ctx, "level must be positive");
  OneOverFSynthesis out;
  if (count < 3) out.flags.push_back("too_few_fluctuators_for_slope");
  const double decades = std::log10(rate_max / rate_min);
  if (count < 2 || decades / (count - 1) > 2.0) out.flags.push_back("sparse_band_coverage");
  std::vector<double> rates =
      count == 1 ? std::vector<double>{std::sqrt(rate_min * rate_max)} : logspace(rate_min, rate_max, count);
  NoiseModel& m = out.model;
  for (double r : rates) {
    m.fluctuators.push_back({std::sqrt(std::pow(r, 1.0 - alpha)), r, 0.5});
  }
  const double unscaled = model_psd(m, 1.0);
  const double scale = std::sqrt(level_at_1hz / unscaled);
  for (auto& f : m.fluctuators) f.amplitude_hz *= scale;
  return out;
}

double ensemble_log_slope(const NoiseModel& model, double f_lo, double f_hi, int points) {
  const auto f = logspace(f_lo, f_hi, static_cast<std::size_t>(points));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double fi : f) {
    const double x = std::log10(fi);
    const double y = std::log10(model_psd(model, fi));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points);
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double quasi_static_sample(const NoiseModel& model, std::uint64_t seed) {
  if (model.quasi_static_sigma_hz == 0.0) return 0.0;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, model.quasi_static_sigma_hz);
  return gauss(rng);
}

namespace {

double sinc2(double x) {
  if (std::abs(x) < 1e-8) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

// Simpson on [a, b] in the variable u = ln f.
double simpson_log(const std::function<double(double)>& g, double a, double b, int per_decade) {
  if (!(b > a)) return 0.0;
  int n = std::max(4, static_cast<int>(std::ceil(std::log10(b / a) * per_decade)));
  if (n % 2) ++n;
  const double la = std::log(a);
  const double h = (std::log(b) - la) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double f = std::exp(la + i * h);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * g(f) * f;
  }
  return acc * h / 3.0;
}

double simpson_lin(const std::function<double(double)>& g, double a, double b, int n) {
  if (!(b > a)) return 0.0;
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * g(a + i * h);
  }
  return acc * h / 3.0;
}

// int_{f_lo}^{f_top} S(f) sinc^2(pi f t) df, split into a smooth low band, an
// oscillating middle band resolved linearly, and a high band where sinc^2 is replaced
// by its average 1/(2 (pi f t)^2).
double filtered_integral(const std::function<double(double)>& S, double t, double f_lo,
                         double f_top) {
  const double fb = 0.05 / t;
  const double fc = 40.0 / t;
  auto low = [&](double f) { return S(f) * sinc2(std::numbers::pi * f * t); };
  auto high = [&](double f) {
    const double x = std::numbers::pi * f * t;
    return S(f) / (2.0 * x * x);
  };
  double acc = 0.0;
  acc += simpson_log(low, f_lo, std::min(fb, f_top), 100);
  acc += simpson_lin(low, std::max(f_lo, fb), std::min(fc, f_top), 8000);
  acc += simpson_log(high, std::max(f_lo, fc), f_top, 40);
  return acc;
}

double find_t2(const std::function<double(double)>& chi_of_t) {
  double lo = 1e-12;
  if (chi_of_t(lo) >= 1.0) return lo;
  double hi = 1e-9;
  while (chi_of_t(hi) < 1.0) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e6) return std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = std::sqrt(lo * hi);
    (chi_of_t(mid) < 1.0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

RamseyPrediction finish_prediction(const std::function<double(double)>& chi_of_t, double t) {
  RamseyPrediction out;
  out.chi = chi_of_t(t);
  out.coherence = std::exp(-out.chi);
  out.t2_s = find_t2(chi_of_t);
  return out;
}

}  // namespace

RamseyPrediction ramsey_prediction(const NoiseModel& model, double t, const RamseyOptions& options) {
  model.validate();
  require(t > 0.0, "ramsey_prediction", "t must be > 0");
  require(options.experiment_duration_s > 0.0, "ramsey_prediction",
          "experiment_duration_s must be > 0");
  const double f_cut = 1.0 / options.experiment_duration_s;  // 0 for an infinite experiment
  double slowest_corner = std::numeric_limits<double>::infinity();
  double fastest_corner = 0.0;
  for (const auto& tlf : model.fluctuators) {
    slowest_corner = std::min(slowest_corner, tlf.switch_rate / std::numbers::pi);
    fastest_corner = std::max(fastest_corner, tlf.switch_rate / std::numbers::pi);
  }
  auto S = [&](double f) { return model_psd(model, f); };
  const double sigma = model.quasi_static_sigma_hz;
  auto chi_of_t = [&](double tt) {
    double f_lo = f_cut;
    double below = 0.0;
    if (f_lo <= 0.0) {
      // Lorentzians are flat below their corner; take [0, f_lo] as S(0) * f_lo.
      f_lo = 1e-4 * std::min(slowest_corner, 1.0 / tt);
      below = S(0.0) * f_lo;
    }
    const double f_top = std::max({1e6 * 40.0 / tt, 1e3 * fastest_corner, 10.0 * f_lo});
    const double integral = below + filtered_integral(S, tt, f_lo, f_top);
    return 2.0 * std::numbers::pi * std::numbers::pi * tt * tt * (integral + sigma * sigma);
  };
  if (model.empty() || (model.total_variance() == 0.0 && model.white_level == 0.0)) {
    return RamseyPrediction{};
  }
  return finish_prediction(chi_of_t, t);
}

RamseyPrediction ramsey_prediction(const SpectrumEstimate& spectrum, double t,
                                   const RamseyOptions& options) {
  spectrum.validate();
  constexpr std::string_view ctx = "ramsey_prediction";
  require(t > 0.0, ctx, "t must be > 0");
  require(spectrum.size() >= 2, ctx, "spectrum needs at least two bins");
  std::vector<double> lf, lp;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (spectrum.psd[i] > 0.0) {
      lf.push_back(std::log(spectrum.freqs[i]));
      lp.push_back(std::log(spectrum.psd[i]));
    }
  }
  require(lf.size() >= 2, ctx, "spectrum needs at least two positive bins");
  // Extrapolation exponent from the lowest decade of positive bins.
  std::size_t m = 1;
  while (m + 1 < lf.size() && lf[m] - lf[0] < std::log(10.0)) ++m;
  ++m;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += lf[i];
    sy += lp[i];
    sxx += lf[i] * lf[i];
    sxy += lf[i] * lp[i];
  }
  const double dm = static_cast<double>(m);
  const double slope = (dm * sxy - sx * sy) / (dm * sxx - sx * sx);  // S ~ f^slope
  const double f_cut = 1.0 / options.experiment_duration_s;
  if (f_cut <= 0.0 && slope <= -1.0) {
    fail(ErrorKind::Numerical, std::string(ctx),
         "integral diverges at low frequency; set a finite experiment_duration_s (low-frequency cutoff)");
  }
  const double f_first = std::exp(lf.front());
  const double f_last = std::exp(lf.back());
  auto S = [&](double f) {
    if (f > f_last) return 0.0;
    const double x = std::log(f);
    if (x <= lf.front()) return std::exp(lp.front() + slope * (x - lf.front()));
    auto it = std::upper_bound(lf.begin(), lf.end(), x);
    const std::size_t j = static_cast<std::size_t>(std::distance(lf.begin(), it));
    const double w = (x - lf[j - 1]) / (lf[j] - lf[j - 1]);
    return std::exp(lp[j - 1] + w * (lp[j] - lp[j - 1]));
  };
  auto chi_of_t = [&](double tt) {
    double f_lo = f_cut;
    double below = 0.0;
    if (f_lo <= 0.0) {
      // Integrable power law below the band: int_0^{f0} S = S(f0) f0 / (1 + slope).
      f_lo = std::min(f_first, 1e-3 / tt);
      below = S(f_lo) * f_lo / (1.0 + slope);
    }
    const double integral = below + filtered_integral(S, tt, f_lo, f_last);
    return 2.0 * std::numbers::pi * std::numbers::pi * tt * tt * integral;
  };
  return finish_prediction(chi_of_t, t);
}

}  // namespace tlslab
