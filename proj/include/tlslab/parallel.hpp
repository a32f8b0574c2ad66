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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace tlslab {

// Upper bound on worker threads. Defaults to TLSLAB_THREADS when set, otherwise the
// hardware concurrency. Results never depend on this value.
int thread_limit();
void set_thread_limit(int threads);  // <= 0 restores the default

// Runs body(i) for i in [0, n). Each index must write only its own output slot;
// the first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

using Rng = std::mt19937_64;

// Independent stream for (master seed, index); used for per-trajectory and
// per-sweep-point randomness so results do not depend on scheduling.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);
inline Rng make_rng(std::uint64_t master, std::uint64_t index = 0) {
  return Rng(stream_seed(master, index));
}

// Order-fixed pairwise summation.
template <typename T>
T pairwise_sum(const std::vector<T>& items, std::size_t begin, std::size_t end) {
  if (end - begin == 1) return items[begin];
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(items, begin, mid) + pairwise_sum(items, mid, end);
}

}  // namespace tlslab
