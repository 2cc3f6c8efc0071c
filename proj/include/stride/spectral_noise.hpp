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

#include "stride/common.hpp"
#include "stride/rng.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace stride::noise {

enum class NoiseKind { White, Pink };

/**
 * @brief `channels` independent 2D noise planes over a height x width grid.
 *
 * Data is stored channel-major, (c, y, x) C order. `f_alpha` is meaningful
 * only for Pink fields.
 */
struct NoiseField {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;
  NoiseKind kind = NoiseKind::White;
  double f_alpha = 0.0;

  std::size_t plane_size() const { return height * width; }

  std::span<double> channel(std::size_t c) {
    return {data.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> channel(std::size_t c) const {
    return {data.data() + c * plane_size(), plane_size()};
  }

  double& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * height + y) * width + x]; }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
  }
};

/// Radial frequency |f| of every bin of an FFT over a height x width grid.
struct RadialFrequencyGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> magnitudes;

  double at(std::size_t y, std::size_t x) const { return magnitudes[y * width + x]; }
};

/// Frequency of bin k on an n-point axis, in cycles per sample.
inline double fft_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return (2 * k <= n) ? kk / nn : (kk - nn) / nn;
}

/**
 * i.i.d. N(0, 1) entries. Channel c draws from stream
 * rng::derive_seed(seed, {c}), element index y * width + x.
 */
inline NoiseField sample_white(std::size_t channels, std::size_t height, std::size_t width,
                               std::uint64_t seed) {
  detail::require(channels >= 1 && height >= 1 && width >= 1,
                  "sample_white: all dimensions must be >= 1");
  NoiseField field{channels, height, width, std::vector<double>(channels * height * width),
                   NoiseKind::White, 0.0};
  for (std::size_t c = 0; c < channels; ++c) {
    rng::fill_normal(rng::derive_seed(seed, {c}), field.channel(c));
  }
  return field;
}

inline RadialFrequencyGrid radial_frequency_grid(std::size_t height, std::size_t width) {
  detail::require(height >= 1 && width >= 1, "radial_frequency_grid: dimensions must be >= 1");
  RadialFrequencyGrid grid{height, width, std::vector<double>(height * width)};
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = fft_frequency(y, height);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = fft_frequency(x, width);
      grid.magnitudes[y * width + x] = std::sqrt(fy * fy + fx * fx);
    }
  }
  return grid;
}

namespace detail {

using Complex = std::complex<double>;

// In-place 2D transform of a row-major height x width plane. The inverse is
// scaled by 1 / (height * width).
inline void fft2_inplace(std::vector<Complex>& plane, std::size_t height, std::size_t width,
                         bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in, out;

  in.resize(width);
  for (std::size_t y = 0; y < height; ++y) {
    std::copy_n(plane.begin() + static_cast<std::ptrdiff_t>(y * width), width, in.begin());
    if (inverse) fft.inv(out, in); else fft.fwd(out, in);
    std::copy(out.begin(), out.end(), plane.begin() + static_cast<std::ptrdiff_t>(y * width));
  }

  in.resize(height);
  for (std::size_t x = 0; x < width; ++x) {
    for (std::size_t y = 0; y < height; ++y) in[y] = plane[y * width + x];
    if (inverse) fft.inv(out, in); else fft.fwd(out, in);
    for (std::size_t y = 0; y < height; ++y) plane[y * width + x] = out[y];
  }
}

}  // namespace detail

/// Forward 2D DFT of a real plane (unnormalized).
inline std::vector<std::complex<double>> fft2(std::span<const double> plane, std::size_t height,
                                              std::size_t width) {
  stride::detail::require(plane.size() == height * width, "fft2: plane size mismatch");
  std::vector<std::complex<double>> spectrum(plane.begin(), plane.end());
  detail::fft2_inplace(spectrum, height, width, false);
  return spectrum;
}

/// Inverse 2D DFT, real part only; inverse of fft2.
inline std::vector<double> ifft2_real(std::vector<std::complex<double>> spectrum, std::size_t height,
                                      std::size_t width) {
  stride::detail::require(spectrum.size() == height * width, "ifft2_real: spectrum size mismatch");
  detail::fft2_inplace(spectrum, height, width, true);
  std::vector<double> plane(spectrum.size());
  std::transform(spectrum.begin(), spectrum.end(), plane.begin(),
                 [](const std::complex<double>& v) { return v.real(); });
  return plane;
}

/**
 * @brief Shapes white noise with the radial amplitude filter 1 / (1 + |f|)^f_alpha.
 *
 * Each channel goes through FFT, pointwise filter, inverse FFT (real part).
 * The DC gain is exactly 1; f_alpha = 0 is the identity up to round trip error.
 */
inline NoiseField pink_filter(const NoiseField& white, double f_alpha) {
  stride::detail::require(white.kind == NoiseKind::White, "pink_filter: input must be white noise");
  stride::detail::require(f_alpha >= 0.0 && std::isfinite(f_alpha), "pink_filter: f_alpha must be >= 0");

  const RadialFrequencyGrid freq = radial_frequency_grid(white.height, white.width);
  std::vector<double> gain(freq.magnitudes.size());
  std::transform(freq.magnitudes.begin(), freq.magnitudes.end(), gain.begin(),
                 [f_alpha](double f) { return 1.0 / std::pow(1.0 + f, f_alpha); });

  NoiseField out{white.channels, white.height, white.width, std::vector<double>(white.data.size()),
                 NoiseKind::Pink, f_alpha};
  for (std::size_t c = 0; c < white.channels; ++c) {
    auto spectrum = fft2(white.channel(c), white.height, white.width);
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= gain[i];
    const auto plane = ifft2_real(std::move(spectrum), white.height, white.width);
    std::copy(plane.begin(), plane.end(), out.channel(c).begin());
  }
  return out;
}

/// Zero mean, unit population variance per channel. Constant channels become zeros.
inline NoiseField normalize_field(const NoiseField& field) {
  NoiseField out = field;
  for (std::size_t c = 0; c < out.channels; ++c) {
    auto plane = out.channel(c);
    const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
    if (*lo == *hi) {
      std::fill(plane.begin(), plane.end(), 0.0);
      continue;
    }
    const auto n = static_cast<double>(plane.size());
    double mean = 0.0;
    for (double v : plane) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : plane) var += (v - mean) * (v - mean);
    var /= n;
    if (var == 0.0) {
      std::fill(plane.begin(), plane.end(), 0.0);
      continue;
    }
    const double inv_sd = 1.0 / std::sqrt(var);
    for (double& v : plane) v = (v - mean) * inv_sd;
  }
  return out;
}

/// sample_white -> pink_filter -> normalize_field.
inline NoiseField pink_noise(std::size_t channels, std::size_t height, std::size_t width,
                             double f_alpha, std::uint64_t seed) {
  return normalize_field(pink_filter(sample_white(channels, height, width, seed), f_alpha));
}

/// Lays channel c of the field out as channel c of an H x W x D grid.
inline Grid to_grid(const NoiseField& field) {
  Grid grid(field.height, field.width, field.channels);
  for (std::size_t c = 0; c < field.channels; ++c)
    for (std::size_t y = 0; y < field.height; ++y)
      for (std::size_t x = 0; x < field.width; ++x) grid.at(y, x, c) = field.at(c, y, x);
  return grid;
}

}  // namespace stride::noise
