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

#include <string>
#include <string_view>
#include <vector>

namespace tlslab {

// Every spectrum in the library is one-sided in frequency-offset units:
// integral_0^inf S(f) df equals the variance of the offset (Hz^2).
inline constexpr std::string_view kOneSidedConvention = "one-sided Hz^2/Hz";

enum class SpectrumSource { Analytic, Welch, Cross, SpinLocking, Stitched };

std::string_view source_name(SpectrumSource s);
SpectrumSource parse_source(std::string_view name);

struct SpectrumEstimate {
  std::vector<double> freqs;     // Hz, ascending, > 0
  std::vector<double> psd;       // Hz^2/Hz
  std::vector<double> variance;  // variance of each psd value (0 for analytic)
  SpectrumSource source = SpectrumSource::Analytic;
  std::string convention{kOneSidedConvention};
  std::vector<std::string> flags;

  std::size_t size() const { return freqs.size(); }
  // Ascending positive frequencies, matching lengths, negative bins only for cross
  // spectra, and the library convention. Throws Error(InvalidArgument).
  void validate() const;
};

}  // namespace tlslab
