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
#include <functional>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "tlslab/analysis.hpp"
#include "tlslab/common.hpp"

namespace tlslab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const FitParam& FitResult::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  fail(ErrorKind::InvalidArgument, "FitResult", "no parameter named '" + std::string(name) + "'");
}

namespace {

using ModelFn = std::function<double(double, const VectorXd&)>;

struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = VectorXd;
  using ValueType = VectorXd;
  using JacobianType = MatrixXd;

  const std::vector<double>* x;
  const std::vector<double>* y;
  const ModelFn* model;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x->size()); }
  int operator()(const VectorXd& p, VectorXd& r) const {
    for (std::size_t i = 0; i < x->size(); ++i) r(static_cast<Eigen::Index>(i)) = (*model)((*x)[i], p) - (*y)[i];
    return 0;
  }
};

struct CoreFit {
  VectorXd p;
  VectorXd sigma;
  double rss = 0.0;
  bool ok = false;
};

CoreFit least_squares(const std::vector<double>& x, const std::vector<double>& y, const ModelFn& model,
                      VectorXd p0) {
  Residuals fn{&x, &y, &model, static_cast<int>(p0.size())};
  Eigen::NumericalDiff<Residuals> diff(fn);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(diff);
  lm.parameters.maxfev = 400 * static_cast<int>(p0.size() + 1);
  lm.parameters.xtol = 1e-13;
  lm.parameters.ftol = 1e-13;
  const auto status = lm.minimize(p0);
  CoreFit out;
  out.p = p0;
  out.ok = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
           status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation && p0.allFinite();
  VectorXd r(static_cast<Eigen::Index>(x.size()));
  fn(p0, r);
  out.rss = r.squaredNorm();
  MatrixXd jac(static_cast<Eigen::Index>(x.size()), p0.size());
  diff.df(p0, jac);
  const auto dof = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(x.size()) - p0.size());
  const double s2 = out.rss / static_cast<double>(dof);
  const MatrixXd cov = (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse() * s2;
  out.sigma = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

void check_input(std::span<const double> t, std::span<const double> y, std::string_view ctx) {
  require(t.size() == y.size(), ctx, "t and y lengths differ");
  require(t.size() >= 5, ctx, "need at least 5 points");
  for (std::size_t i = 1; i < t.size(); ++i) require(t[i] > t[i - 1], ctx, "t must be ascending");
  for (std::size_t i = 0; i < t.size(); ++i) require(std::isfinite(t[i]) && std::isfinite(y[i]), ctx, "non-finite data");
}

std::string describe(const std::vector<std::string>& names, const VectorXd& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i] << "=" << p(static_cast<Eigen::Index>(i));
  return os.str();
}

// Linear regression of log(y - c) against g(t); returns (intercept, slope) or nothing.
std::optional<std::pair<double, double>> log_regression(std::span<const double> t, std::span<const double> y,
                                                        double c, double (*g)(double)) {
  double top = 0.0;
  for (double v : y) top = std::max(top, v - c);
  if (!(top > 0.0)) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = y[i] - c;
    if (v <= 0.05 * top) continue;
    const double xv = g(t[i]), yv = std::log(v);
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
    n += 1;
  }
  if (n < 2 || n * sxx - sx * sx <= 0.0) return std::nullopt;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::make_pair((sy - slope * sx) / n, slope);
}

double identity(double t) { return t; }
double square(double t) { return t * t; }

FitResult decay_fit(std::span<const double> t, std::span<const double> y, bool with_offset, bool gaussian) {
  const std::string ctx = gaussian ? "analysis.fit_gaussian_decay" : "analysis.fit_exponential";
  check_input(t, y, ctx);
  const double tscale = std::max(std::abs(t.front()), std::abs(t.back()));
  double yscale = 0.0;
  for (double v : y) yscale = std::max(yscale, std::abs(v));
  require(tscale > 0.0 && yscale > 0.0, ctx, "data are identically zero");
  std::vector<double> x(t.size()), z(y.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    x[i] = t[i] / tscale;
    z[i] = y[i] / yscale;
  }
  const double c0 = with_offset ? z.back() : 0.0;
  VectorXd p0(with_offset ? 3 : 2);
  const auto reg = log_regression(x, z, c0, gaussian ? square : identity);
  if (reg && reg->second < 0.0) {
    p0(0) = std::exp(reg->first);
    p0(1) = gaussian ? 1.0 / std::sqrt(-reg->second) : -1.0 / reg->second;
  } else {
    p0(0) = z.front() - c0;
    p0(1) = 0.5;
  }
  if (with_offset) p0(2) = c0;
  const ModelFn model = [gaussian, with_offset](double s, const VectorXd& p) {
    const double u = s / p(1);
    return p(0) * std::exp(gaussian ? -u * u : -u) + (with_offset ? p(2) : 0.0);
  };
  const std::vector<std::string> names = with_offset ? std::vector<std::string>{"amplitude", "tau", "offset"}
                                                     : std::vector<std::string>{"amplitude", "tau"};
  const CoreFit f = least_squares(x, z, model, p0);
  if (!f.ok || !(f.p(1) != 0.0)) {
    fail(ErrorKind::Numerical, ctx, "did not converge from initial guess " + describe(names, p0));
  }
  FitResult out;
  out.model = gaussian ? "gaussian_decay" : "exponential";
  out.converged = true;
  out.residual_norm = std::sqrt(f.rss) * yscale;
  const double tau = std::abs(f.p(1)) * tscale;
  const double tau_sigma = f.sigma(1) * tscale;
  out.params.push_back({"amplitude", "", f.p(0) * yscale, f.sigma(0) * yscale});
  out.params.push_back({"tau", "s", tau, tau_sigma});
  out.params.push_back({"rate", "1/s", 1.0 / tau, tau_sigma / (tau * tau)});
  if (with_offset) out.params.push_back({"offset", "", f.p(2) * yscale, f.sigma(2) * yscale});
  return out;
}

// Largest |sum (y - mean) exp(-2 pi i f t)| over a dense frequency scan.
struct Peak {
  double freq = 0.0;
  double amplitude = 0.0;  // estimated cosine amplitude
  double phase = 0.0;
  double median_amplitude = 0.0;
};

Peak dft_peak(const std::vector<double>& x, const std::vector<double>& r) {
  const std::size_t n = x.size();
  const double span = x.back() - x.front();
  std::vector<double> gaps(n - 1);
  for (std::size_t i = 1; i < n; ++i) gaps[i - 1] = x[i] - x[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  const double nyquist = 0.5 / gaps[gaps.size() / 2];
  const double df = 0.25 / span;
  Peak best;
  std::vector<double> amps;
  for (double f = df; f <= nyquist; f += df) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += r[i] * std::polar(1.0, -kTwoPi * f * x[i]);
    const double a = 2.0 * std::abs(acc) / static_cast<double>(n);
    amps.push_back(a);
    if (a > best.amplitude) {
      best.amplitude = a;
      best.freq = f;
      best.phase = std::arg(acc);
    }
  }
  if (!amps.empty()) {
    std::nth_element(amps.begin(), amps.begin() + static_cast<std::ptrdiff_t>(amps.size() / 2), amps.end());
    best.median_amplitude = amps[amps.size() / 2];
  }
  return best;
}

}  // namespace

FitResult fit_exponential(std::span<const double> t, std::span<const double> y, bool with_offset) {
  return decay_fit(t, y, with_offset, false);
}

FitResult fit_gaussian_decay(std::span<const double> t, std::span<const double> y, bool with_offset) {
  return decay_fit(t, y, with_offset, true);
}

FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y) {
  constexpr std::string_view ctx = "analysis.fit_damped_cosine";
  check_input(t, y, ctx);
  const double t0 = t.front();
  const double tscale = t.back() - t0;
  std::vector<double> x(t.size()), z(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double yscale = 0.0;
  for (double v : y) yscale = std::max(yscale, std::abs(v - mean));
  require(yscale > 0.0, ctx, "data are constant");
  for (std::size_t i = 0; i < t.size(); ++i) {
    x[i] = (t[i] - t0) / tscale;
    z[i] = (y[i] - mean) / yscale;
  }
  const Peak pk = dft_peak(x, z);
  // Envelope decay from the peak amplitude in each half of the trace.
  std::vector<double> xa, za, xb, zb;
  for (std::size_t i = 0; i < x.size(); ++i) {
    (x[i] < 0.5 ? xa : xb).push_back(x[i]);
    (x[i] < 0.5 ? za : zb).push_back(z[i]);
  }
  auto amp_at = [&](const std::vector<double>& xs, const std::vector<double>& zs) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += zs[i] * std::polar(1.0, -kTwoPi * pk.freq * xs[i]);
    return xs.empty() ? 0.0 : 2.0 * std::abs(acc) / static_cast<double>(xs.size());
  };
  const double a1 = amp_at(xa, za), a2 = amp_at(xb, zb);
  const double g0 = (a1 > 0.0 && a2 > 0.0 && a2 < a1) ? 2.0 * std::log(a1 / a2) : 0.1;
  VectorXd p0(5);
  p0 << pk.amplitude * std::exp(0.25 * g0), g0, pk.freq, pk.phase, 0.0;
  const ModelFn model = [](double s, const VectorXd& p) {
    return p(0) * std::exp(-p(1) * s) * std::cos(kTwoPi * p(2) * s + p(3)) + p(4);
  };
  const CoreFit f = least_squares(x, z, model, p0);
  const std::vector<std::string> names{"amplitude", "gamma", "freq", "phase", "offset"};
  if (!f.ok) fail(ErrorKind::Numerical, std::string(ctx), "did not converge from initial guess " + describe(names, p0));
  FitResult out;
  out.model = "damped_cosine";
  out.converged = true;
  out.residual_norm = std::sqrt(f.rss) * yscale;
  double amp = f.p(0), phase = f.p(3), freq = f.p(2);
  if (freq < 0.0) {
    freq = -freq;
    phase = -phase;
  }
  if (amp < 0.0) {
    amp = -amp;
    phase += std::numbers::pi;
  }
  // Re-reference the phase to t = 0.
  phase = std::remainder(phase - kTwoPi * freq * t0 / tscale, kTwoPi);
  out.params.push_back({"amplitude", "", amp * yscale * std::exp(f.p(1) * t0 / tscale), f.sigma(0) * yscale});
  out.params.push_back({"gamma", "1/s", f.p(1) / tscale, f.sigma(1) / tscale});
  out.params.push_back({"freq", "Hz", freq / tscale, f.sigma(2) / tscale});
  out.params.push_back({"phase", "rad", phase, f.sigma(3)});
  out.params.push_back({"offset", "", f.p(4) * yscale + mean, f.sigma(4) * yscale});
  return out;
}

OscAvgResult extract_osc_avg(std::span<const double> t, std::span<const double> y) {
  constexpr std::string_view ctx = "analysis.extract_osc_avg";
  check_input(t, y, ctx);
  OscAvgResult out;
  const FitResult base = fit_exponential(t, y, true);
  std::vector<double> x(t.begin(), t.end()), r(y.size());
  double range = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    r[i] = y[i] - (base.value("amplitude") * std::exp(-t[i] / base.value("tau")) + base.value("offset"));
  }
  {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    range = *hi - *lo;
  }
  const double span = t.back() - t.front();
  // Peak search over progressively shorter leading windows, each linearly detrended.
  bool oscillating = false;
  std::size_t window = t.size();
  std::vector<double> detrended;
  for (std::size_t w = t.size(); w >= 48; w /= 4) {
    std::vector<double> xw(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(w));
    std::vector<double> rw(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(w));
    const double mx = std::accumulate(xw.begin(), xw.end(), 0.0) / static_cast<double>(w);
    const double mr = std::accumulate(rw.begin(), rw.end(), 0.0) / static_cast<double>(w);
    double sxx = 0.0, sxr = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      sxx += (xw[i] - mx) * (xw[i] - mx);
      sxr += (xw[i] - mx) * (rw[i] - mr);
    }
    const double slope = sxx > 0.0 ? sxr / sxx : 0.0;
    for (std::size_t i = 0; i < w; ++i) rw[i] -= mr + slope * (xw[i] - mx);
    const Peak pk = dft_peak(xw, rw);
    const double wspan = xw.back() - xw.front();
    if (pk.amplitude > 5.0 * pk.median_amplitude && pk.amplitude > 1e-3 * range && pk.freq * wspan >= 3.0) {
      oscillating = true;
      window = w;
      detrended = std::move(rw);
      break;
    }
  }
  const auto absent = [&] {
    out.flags.push_back("oscillation_absent");
    out.gamma_avg = base.value("rate");
    out.full = base;
    out.tail = base;
    return out;
  };
  if (!oscillating) return absent();
  FitResult osc;
  try {
    osc = fit_damped_cosine(std::span<const double>(t.data(), window), detrended);
  } catch (const Error&) {
    return absent();
  }
  VectorXd p0(7);
  const double tscale = span;
  // Scaled parameters: A, gamma_osc, f, phi, B, gamma_avg, C with time in units of span.
  const double tref = t.front();
  p0 << osc.value("amplitude") * std::exp(-osc.value("gamma") * tref), osc.value("gamma") * tscale,
      osc.value("freq") * tscale, osc.value("phase") + kTwoPi * osc.value("freq") * tref,
      base.value("amplitude") * std::exp(-tref * base.value("rate")), base.value("rate") * tscale,
      base.value("offset");
  std::vector<double> xs(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) xs[i] = (t[i] - tref) / tscale;
  std::vector<double> ys(y.begin(), y.end());
  const ModelFn model = [](double s, const VectorXd& p) {
    return p(0) * std::exp(-p(1) * s) * std::cos(kTwoPi * p(2) * s + p(3)) + p(4) * std::exp(-p(5) * s) + p(6);
  };
  const CoreFit f = least_squares(xs, ys, model, p0);
  FitResult full;
  full.model = "oscillation_plus_decay";
  full.converged = f.ok;
  full.residual_norm = std::sqrt(f.rss);
  const char* names[] = {"amplitude", "gamma_osc", "freq", "phase", "amplitude_avg", "gamma_avg", "offset"};
  const char* units[] = {"", "1/s", "Hz", "rad", "", "1/s", ""};
  const double scale[] = {1.0, 1.0 / tscale, 1.0 / tscale, 1.0, 1.0, 1.0 / tscale, 1.0};
  for (int i = 0; i < 7; ++i) full.params.push_back({names[i], units[i], f.p(i) * scale[i], f.sigma(i) * scale[i]});
  if (!f.ok) full.flags.push_back("not_converged");
  out.full = full;
  out.gamma_osc = std::abs(full.value("gamma_osc"));
  out.f_osc = std::abs(full.value("freq"));
  out.gamma_avg = full.value("gamma_avg");

  const double t_tail = t.front() + 3.0 / *out.gamma_osc;
  std::vector<double> tt, yt;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > t_tail) {
      tt.push_back(t[i]);
      yt.push_back(y[i] - full.value("offset"));
    }
  }
  if (tt.size() >= 5) {
    try {
      out.tail = fit_exponential(tt, yt, false);
      out.gamma_avg = out.tail.value("rate");
    } catch (const Error&) {
      out.flags.push_back("tail_fit_failed");
    }
  } else {
    out.flags.push_back("tail_too_short");
  }
  return out;
}

FitResult fit_power_law(const SpectrumEstimate& spec, double f_lo, double f_hi) {
  constexpr std::string_view ctx = "analysis.fit_power_law";
  spec.validate();
  require(f_lo > 0.0 && f_hi >= 10.0 * f_lo, ctx, "band must span at least one decade");
  std::vector<double> x, yv, w;
  bool weighted = true;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.freqs[i] < f_lo || spec.freqs[i] > f_hi || !(spec.psd[i] > 0.0)) continue;
    x.push_back(std::log10(spec.freqs[i]));
    yv.push_back(std::log10(spec.psd[i]));
    const double var_log = spec.variance[i] / std::pow(spec.psd[i] * std::log(10.0), 2);
    if (!(var_log > 0.0)) weighted = false;
    w.push_back(var_log > 0.0 ? 1.0 / var_log : 1.0);
  }
  require(x.size() >= 2, ctx, "fewer than two positive bins in band");
  if (!weighted) std::fill(w.begin(), w.end(), 1.0);
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(0, 0) += w[i];
    a(0, 1) += w[i] * x[i];
    a(1, 1) += w[i] * x[i] * x[i];
    b(0) += w[i] * yv[i];
    b(1) += w[i] * x[i] * yv[i];
  }
  a(1, 0) = a(0, 1);
  const Eigen::Vector2d c = a.ldlt().solve(b);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) chi2 += w[i] * std::pow(yv[i] - c(0) - c(1) * x[i], 2);
  const double s2 = x.size() > 2 ? chi2 / static_cast<double>(x.size() - 2) : 0.0;
  const Eigen::Matrix2d cov = a.inverse() * s2;
  FitResult out;
  out.model = "power_law";
  out.converged = true;
  out.residual_norm = std::sqrt(chi2);
  const double amp = std::pow(10.0, c(0));
  out.params.push_back({"A", "Hz^2/Hz", amp, amp * std::log(10.0) * std::sqrt(std::max(0.0, cov(0, 0)))});
  out.params.push_back({"alpha", "", -c(1), std::sqrt(std::max(0.0, cov(1, 1)))});
  return out;
}

namespace {

double lorentzian(double f, double a2, double gamma) {
  const double lambda = 2.0 * gamma;
  const double w = kTwoPi * f;
  return 4.0 * a2 * lambda / (lambda * lambda + w * w);
}

}  // namespace

FitResult fit_lorentzian_sum(const SpectrumEstimate& spec, int n_components, const LorentzianFitOptions& options) {
  constexpr std::string_view ctx = "analysis.fit_lorentzian_sum";
  spec.validate();
  require(n_components >= 1, ctx, "n_components must be >= 1");
  std::vector<double> f, s;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.freqs[i] < options.f_lo || spec.freqs[i] > options.f_hi || !(spec.psd[i] > 0.0)) continue;
    f.push_back(spec.freqs[i]);
    s.push_back(spec.psd[i]);
  }
  const int nb = options.power_law_background ? 2 : 0;
  const int np = 2 * n_components + nb;
  require(static_cast<int>(f.size()) > np, ctx, "more parameters than positive bins");

  // Greedy peeling on f * S after removing the background.
  VectorXd p0(np);
  std::vector<double> resid = s;
  if (options.power_law_background) {
    SpectrumEstimate sub;
    sub.freqs = f;
    sub.psd = s;
    sub.variance.assign(f.size(), 0.0);
    const FitResult bg = fit_power_law(sub, f.front(), std::max(f.back(), 10.0 * f.front()));
    // Start the background below the data so the bumps stand out.
    const double amp = 0.5 * bg.value("A");
    p0(2 * n_components) = std::log(amp);
    p0(2 * n_components + 1) = bg.value("alpha");
    for (std::size_t i = 0; i < f.size(); ++i) resid[i] -= amp * std::pow(f[i], -bg.value("alpha"));
  }
  std::vector<double> sorted = s;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (int k = 0; k < n_components; ++k) {
    std::size_t best = f.size();
    double best_v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (resid[i] > 0.0 && f[i] * resid[i] > best_v) {
        best_v = f[i] * resid[i];
        best = i;
      }
    }
    double gamma, a2;
    if (best < f.size()) {
      gamma = std::numbers::pi * f[best];
      a2 = gamma * resid[best];
    } else {
      gamma = std::numbers::pi * std::sqrt(f.front() * f.back());
      a2 = 1e-6 * gamma * median;
    }
    for (std::size_t i = 0; i < f.size(); ++i) resid[i] -= lorentzian(f[i], a2, gamma);
    p0(2 * k) = 0.5 * std::log(a2);
    p0(2 * k + 1) = std::log(gamma);
  }
  std::vector<double> ls(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) ls[i] = std::log(s[i]);
  const ModelFn model = [n_components, nb](double fv, const VectorXd& p) {
    double acc = 0.0;
    for (int k = 0; k < n_components; ++k) acc += lorentzian(fv, std::exp(2.0 * p(2 * k)), std::exp(p(2 * k + 1)));
    if (nb) acc += std::exp(p(2 * n_components)) * std::pow(fv, -p(2 * n_components + 1));
    return std::log(std::max(acc, 1e-300));
  };
  const CoreFit fit = least_squares(f, ls, model, p0);
  FitResult out;
  out.model = options.power_law_background ? "lorentzian_sum_plus_power_law" : "lorentzian_sum";
  out.converged = fit.ok;
  out.residual_norm = std::sqrt(fit.rss);
  if (!fit.ok) out.flags.push_back("not_converged");
  std::vector<int> order(static_cast<std::size_t>(n_components));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return fit.p(2 * a + 1) < fit.p(2 * b + 1); });
  for (int idx = 0; idx < n_components; ++idx) {
    const int k = order[static_cast<std::size_t>(idx)];
    const double a = std::exp(fit.p(2 * k));
    const double g = std::exp(fit.p(2 * k + 1));
    out.params.push_back({"a_" + std::to_string(idx), "Hz", a, a * fit.sigma(2 * k)});
    out.params.push_back({"gamma_" + std::to_string(idx), "1/s", g, g * fit.sigma(2 * k + 1)});
    double share = 0.0;
    for (double fv : f) share = std::max(share, lorentzian(fv, a * a, g) / std::exp(model(fv, fit.p)));
    if (share < 0.05) out.flags.push_back("component_" + std::to_string(idx) + "_negligible");
  }
  if (nb) {
    const double amp = std::exp(fit.p(2 * n_components));
    out.params.push_back({"A", "Hz^2/Hz", amp, amp * fit.sigma(2 * n_components)});
    out.params.push_back({"alpha", "", fit.p(2 * n_components + 1), fit.sigma(2 * n_components + 1)});
  }
  return out;
}

}  // namespace tlslab
