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

#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "tlslab/protocols.hpp"

namespace tlslab {

using Matrix4c = Eigen::Matrix4cd;
using Matrix16c2 = Eigen::Matrix<cplx, 16, 16>;

struct TomoResult {
  Matrix4c rho_est = Matrix4c::Identity() / 4.0;
  double purity = 0.25;
  double concurrence = 0.0;
  std::uint64_t shots_per_basis = 0;  // 0 means exact probabilities
};

// Choi matrix J = sum_ij |i><j| (x) E(|i><j|) / 4, so Tr J = 1.
struct ProcessMatrix {
  Matrix16c2 choi = Matrix16c2::Zero();

  // PSD to 1e-8 and Tr_out J = I/4 to 1e-8.
  void validate() const;
};

// Nine local Pauli settings with multinomial shot sampling, linear inversion, then the
// closest unit-trace PSD matrix in Frobenius norm.
TomoResult simulate_tomography(const Matrix4c& rho_true, std::uint64_t shots_per_basis, std::uint64_t seed);
Matrix4c project_to_density(const Matrix4c& m);

double purity(const Matrix4c& rho);
double concurrence(const Matrix4c& rho);

ProcessMatrix choi_from_map(const std::function<Matrix4c(const Matrix4c&)>& channel);
ProcessMatrix choi_from_unitary(const Matrix4c& u);

// Propagates |i><j| (x) |0><0| (coupler, TLS) through the gate and traces out the rest.
// Throws Error(Numerical) when trace preservation fails by more than 1e-6.
ProcessMatrix channel_from_experiment(const GateExperiment& gate);

double process_fidelity(const ProcessMatrix& chan, const Matrix4c& ideal);
double average_gate_fidelity(const ProcessMatrix& chan, const Matrix4c& ideal);

}  // namespace tlslab
