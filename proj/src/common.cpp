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

#include "tlslab/common.hpp"

#include <cmath>

namespace tlslab {

std::string_view element_name(Element e) {
  switch (e) {
    case Element::Q1: return "q1";
    case Element::Q2: return "q2";
    case Element::Coupler: return "c";
    case Element::Tls: return "tls";
  }
  return "?";
}

Element parse_element(std::string_view name) {
  for (Element e : kAllElements) {
    if (element_name(e) == name) return e;
  }
  fail(ErrorKind::InvalidArgument, "parse_element", "unknown element '" + std::string(name) + "'");
}

std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

Axis parse_axis(std::string_view name) {
  if (name == "x" || name == "X") return Axis::X;
  if (name == "y" || name == "Y") return Axis::Y;
  if (name == "z" || name == "Z") return Axis::Z;
  fail(ErrorKind::InvalidArgument, "parse_axis", "unknown axis '" + std::string(name) + "'");
}

std::vector<double> linspace(double first, double last, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = first;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = first + (last - first) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

std::vector<double> logspace(double first, double last, std::size_t count) {
  require(first > 0 && last > 0, "logspace", "bounds must be positive");
  std::vector<double> out = linspace(std::log(first), std::log(last), count);
  for (double& v : out) v = std::exp(v);
  if (count > 0) out.front() = first;
  if (count > 1) out.back() = last;
  return out;
}

}  // namespace tlslab
