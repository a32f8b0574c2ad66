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

#include "tlslab/tomography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "tlslab/parallel.hpp"
#include "tlslab/solver.hpp"

namespace tlslab {

namespace {

using Matrix2c = Eigen::Matrix2cd;

std::array<Matrix2c, 4> paulis() {
  Matrix2c i = Matrix2c::Identity(), x, y, z;
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  return {i, x, y, z};
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

// Rotation taking the +1 eigenstate of Pauli `axis` (1=X, 2=Y, 3=Z) to |0>.
Matrix2c to_z(int axis) {
  const double c = std::cos(std::numbers::pi / 4), s = std::sin(std::numbers::pi / 4);
  Matrix2c r;
  if (axis == 1) {
    r << c, s, -s, c;  // rotation about y by -pi/2
  } else if (axis == 2) {
    r << c, cplx(0, -s), cplx(0, -s), c;  // rotation about x by +pi/2
  } else {
    r = Matrix2c::Identity();
  }
  return r;
}

void require_density(const Matrix4c& rho, std::string_view ctx) {
  const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale, ctx, "rho is not Hermitian");
  require(std::abs(rho.trace() - 1.0) <= 1e-9, ctx, "rho trace differs from 1");
}

}  // namespace

Matrix4c project_to_density(const Matrix4c& m) {
  const Matrix4c h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h);
  Eigen::Vector4d v = es.eigenvalues();
  // Euclidean projection of the spectrum onto the probability simplex.
  std::array<double, 4> u{v(0), v(1), v(2), v(3)};
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (int k = 0; k < 4; ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / (k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (int k = 0; k < 4; ++k) v(k) = std::max(v(k) - theta, 0.0);
  return es.eigenvectors() * v.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

TomoResult simulate_tomography(const Matrix4c& rho_true, std::uint64_t shots_per_basis, std::uint64_t seed) {
  require_density(rho_true, "tomography.simulate_tomography");
  const auto p = paulis();
  // counts[a][b][outcome] for settings a, b in {X, Y, Z}
  std::array<std::array<std::array<double, 4>, 3>, 3> freq{};
  Rng rng = make_rng(seed);
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 3; ++b) {
      const Matrix4c r = kron(to_z(a), to_z(b));
      const Matrix4c rot = r * rho_true * r.adjoint();
      std::array<double, 4> probs{};
      for (int k = 0; k < 4; ++k) probs[k] = std::clamp(rot(k, k).real(), 0.0, 1.0);
      auto& f = freq[a - 1][b - 1];
      if (shots_per_basis == 0) {
        f = probs;
      } else {
        // Multinomial as a chain of binomials.
        std::uint64_t left = shots_per_basis;
        double mass = 1.0;
        for (int k = 0; k < 4; ++k) {
          std::uint64_t c = left;
          if (k < 3) {
            const double q = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 0.0;
            std::binomial_distribution<std::uint64_t> draw(left, q);
            c = draw(rng);
          }
          f[k] = static_cast<double>(c) / static_cast<double>(shots_per_basis);
          left -= c;
          mass -= probs[k];
        }
      }
    }
  }
  auto sign = [](int outcome, bool first, bool second) {
    int s = 1;
    if (first && (outcome & 2)) s = -s;
    if (second && (outcome & 1)) s = -s;
    return static_cast<double>(s);
  };
  Matrix4c est = Matrix4c::Zero();
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      double e = 0.0;
      if (mu == 0 && nu == 0) {
        e = 1.0;
      } else {
        // Average over every setting that measures the needed axes.
        int count = 0;
        for (int a = 1; a <= 3; ++a) {
          for (int b = 1; b <= 3; ++b) {
            if ((mu && a != mu) || (nu && b != nu)) continue;
            const auto& f = freq[a - 1][b - 1];
            for (int k = 0; k < 4; ++k) e += sign(k, mu != 0, nu != 0) * f[k];
            ++count;
          }
        }
        e /= count;
      }
      est += 0.25 * e * kron(p[mu], p[nu]);
    }
  }
  TomoResult out;
  out.shots_per_basis = shots_per_basis;
  out.rho_est = project_to_density(est);
  out.purity = purity(out.rho_est);
  out.concurrence = concurrence(out.rho_est);
  return out;
}

double purity(const Matrix4c& rho) {
  require_density(rho, "tomography.purity");
  return rho.cwiseAbs2().sum();
}

double concurrence(const Matrix4c& rho) {
  require_density(rho, "tomography.concurrence");
  const auto p = paulis();
  const Matrix4c yy = kron(p[2], p[2]);
  const Matrix4c r = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Matrix4c> es(r, false);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

void ProcessMatrix::validate() const {
  constexpr std::string_view ctx = "ProcessMatrix";
  const Matrix16c2 h = 0.5 * (choi + choi.adjoint());
  require((choi - choi.adjoint()).cwiseAbs().maxCoeff() <= 1e-8, ctx, "Choi matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix16c2> es(h, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-8, ctx, "Choi matrix is not positive");
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      cplx t = 0.0;
      for (int a = 0; a < 4; ++a) t += choi(4 * i + a, 4 * j + a);
      require(std::abs(t - (i == j ? 0.25 : 0.0)) <= 1e-8, ctx, "channel is not trace preserving");
    }
  }
}

ProcessMatrix choi_from_map(const std::function<Matrix4c(const Matrix4c&)>& channel) {
  ProcessMatrix out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Matrix4c e = Matrix4c::Zero();
      e(i, j) = 1.0;
      out.choi.block<4, 4>(4 * i, 4 * j) = channel(e) / 4.0;
    }
  }
  return out;
}

ProcessMatrix choi_from_unitary(const Matrix4c& u) {
  return choi_from_map([&](const Matrix4c& x) -> Matrix4c { return u * x * u.adjoint(); });
}

ProcessMatrix channel_from_experiment(const GateExperiment& gate) {
  constexpr std::string_view ctx = "tomography.channel_from_experiment";
  const double t[] = {gate.schedule.span()};
  std::array<Matrix4c, 16> outputs;
  parallel_for(16, [&](std::size_t k) {
    const int i = static_cast<int>(k) / 4, j = static_cast<int>(k) % 4;
    DensityMatrix in = DensityMatrix::Zero();
    in(i << 2, j << 2) = 1.0;
    const auto states = evolve(gate.schedule, gate.model, in, t);
    outputs[k] = reduce_to_qubits(states.front());
  });
  ProcessMatrix out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Matrix4c& e = outputs[static_cast<std::size_t>(4 * i + j)];
      if (std::abs(e.trace() - (i == j ? 1.0 : 0.0)) > 1e-6) {
        fail(ErrorKind::Numerical, std::string(ctx), "trace preservation violated by more than 1e-6");
      }
      out.choi.block<4, 4>(4 * i, 4 * j) = e / 4.0;
    }
  }
  return out;
}

double process_fidelity(const ProcessMatrix& chan, const Matrix4c& ideal) {
  const ProcessMatrix target = choi_from_unitary(ideal);
  return (chan.choi * target.choi).trace().real();
}

double average_gate_fidelity(const ProcessMatrix& chan, const Matrix4c& ideal) {
  constexpr double d = 4.0;
  return (d * process_fidelity(chan, ideal) + 1.0) / (d + 1.0);
}

}  // namespace tlslab
