/*
 * Copyright (c) 2026, The STRIDE Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/*
 * Counter-based random numbers.
 *
 * Every draw is a pure function of (stream seed, element index):
 *
 *   bits(seed, i)   = splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15)
 *   uniform(seed,i) = (bits >> 11) * 2^-53                       in [0, 1)
 *   normal(seed, 2k), normal(seed, 2k+1)
 *                   = Box-Muller on u1 = 1 - uniform(seed, 2k)    in (0, 1]
 *                                   u2 = uniform(seed, 2k+1)
 *                     -> r cos(2 pi u2), r sin(2 pi u2),  r = sqrt(-2 ln u1)
 *
 * Streams are derived from an experiment seed with derive_seed(), which folds
 * each coordinate (channel, image id, block, step, ...) through splitmix64.
 * Nothing depends on draw order, so parallel and sequential fills agree.
 */

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>

namespace stride::rng {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Folds coordinates into a base seed. Order of coordinates matters.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(base ^ 0x5354524944450000ULL);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + kGolden));
  return h;
}

constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + (index + 1) * kGolden);
}

constexpr double uniform(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(bits(seed, index) >> 11) * 0x1.0p-53;
}

/// Standard normal draw number `index` of stream `seed`.
inline double normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t pair = index >> 1;
  const double u1 = 1.0 - uniform(seed, 2 * pair);
  const double u2 = uniform(seed, 2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return (index & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

/// Fills `out[i] = normal(seed, offset + i)`.
inline void fill_normal(std::uint64_t seed, std::span<double> out, std::uint64_t offset = 0) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = normal(seed, offset + i);
}

}  // namespace stride::rng
