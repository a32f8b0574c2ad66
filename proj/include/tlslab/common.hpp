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

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tlslab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;

// Failure categories map one-to-one onto C API status codes and CLI exit codes.
enum class ErrorKind {
  InvalidArgument,
  Schema,
  Numerical,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string context, const std::string& message)
      : std::runtime_error(context.empty() ? message : context + ": " + message),
        kind_(kind),
        context_(std::move(context)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Module/op (or JSON field path for schema errors) where the failure arose.
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorKind kind_;
  std::string context_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string context, const std::string& message) {
  throw Error(kind, std::move(context), message);
}

inline void require(bool condition, std::string_view context, const std::string& message) {
  if (!condition) fail(ErrorKind::InvalidArgument, std::string(context), message);
}

// Circuit elements; the joint Hilbert space is ordered Q1 (x) Q2 (x) C (x) TLS with
// Q1 the most significant bit of a basis index.
enum class Element : int { Q1 = 0, Q2 = 1, Coupler = 2, Tls = 3 };

inline constexpr int kNumElements = 4;
inline constexpr int kDim = 16;
inline constexpr Element kAllElements[kNumElements] = {Element::Q1, Element::Q2, Element::Coupler,
                                                       Element::Tls};

constexpr int element_index(Element e) { return static_cast<int>(e); }
constexpr int element_bit(Element e) { return 1 << (kNumElements - 1 - element_index(e)); }

std::string_view element_name(Element e);
Element parse_element(std::string_view name);

enum class Axis { X, Y, Z };

std::string_view axis_name(Axis a);
Axis parse_axis(std::string_view name);

// Log- and linearly-spaced grids are used all over the protocols and tests.
std::vector<double> linspace(double first, double last, std::size_t count);
std::vector<double> logspace(double first, double last, std::size_t count);

}  // namespace tlslab
