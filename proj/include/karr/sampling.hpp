// Copyright 2026 The karr-assess Authors.
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

#ifndef KARR_SAMPLING_HPP_
#define KARR_SAMPLING_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace karr {

struct Fact;

// Stable across platforms and runs (unlike std::hash).
std::uint64_t stable_hash(std::string_view text);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);
// Per-fact stream seed, independent of which worker handles the fact.
std::uint64_t fact_seed(std::uint64_t seed, const Fact& fact,
                        std::string_view stream);

// mt19937_64 with a portable bounded draw; std distributions are
// implementation-defined and would make reports differ between stdlibs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [0, 1).
  double unit();

 private:
  std::mt19937_64 engine_;
};

// Partial Fisher-Yates: k distinct indices in [0, n), in draw order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng);

template <typename T>
std::vector<T> sample_without_replacement(std::span<const T> pool,
                                          std::size_t k, Rng& rng) {
  std::vector<T> out;
  for (std::size_t i : sample_indices(pool.size(), k, rng)) {
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace karr

#endif  // KARR_SAMPLING_HPP_
