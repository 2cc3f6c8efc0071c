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

// Independent oracles shared by the unit and acceptance suites. Nothing here
// calls the randomized SVD, the patch code or the metric implementations.

#include "stride/common.hpp"
#include "stride/rng.hpp"
#include "stride/spectral_noise.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

namespace stride::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
  return m;
}

inline Eigen::MatrixXd random_orthonormal(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(gen, rows, cols));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

/// U diag(s) V^T with random orthonormal U (rows x r) and V (cols x r).
inline Eigen::MatrixXd matrix_with_spectrum(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                                            const Eigen::VectorXd& singular_values) {
  const Eigen::Index r = singular_values.size();
  return random_orthonormal(gen, rows, r) * singular_values.asDiagonal() * random_orthonormal(gen, cols, r).transpose();
}

/// Largest principal angle (radians) between the column spans of two orthonormal bases of equal rank.
inline double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  // sin of the largest angle = largest singular value of (I - A A^T) B; better
  // conditioned than acos of the smallest cosine for tiny angles.
  const Eigen::MatrixXd residual = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return std::asin(std::min(1.0, svd.singularValues().maxCoeff()));
}

/// Exact top-k right singular vectors / values of the centered matrix via a full dense SVD.
struct ExactPca {
  Eigen::MatrixXd directions;
  Eigen::VectorXd singular_values;
};

inline ExactPca exact_pca(const Eigen::MatrixXd& data, Eigen::Index k) {
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  return {svd.matrixV().leftCols(k), svd.singularValues().head(k)};
}

inline bool bit_identical(const Grid& a, const Grid& b) {
  return a.same_shape(b) && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline double relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  const double denom = want.norm();
  return denom > 0 ? (got - want).norm() / denom : (got - want).norm();
}

/**
 * Least-squares slope of radially averaged log-power against log(1 + |f|).
 *
 * Bins with 0 < |f| <= 0.5 are grouped into `bins` equal-width rings; each ring
 * contributes (mean log(1+|f|), mean log |X|^2).
 */
inline double radial_log_power_slope(std::span<const double> plane, std::size_t height, std::size_t width,
                                     std::size_t bins = 48) {
  const auto spectrum = noise::fft2(plane, height, width);
  std::vector<double> sum_x(bins, 0.0), sum_y(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = noise::fft_frequency(y, height);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = noise::fft_frequency(x, width);
      const double f = std::sqrt(fy * fy + fx * fx);
      if (f <= 0.0 || f > 0.5) continue;
      const auto b = std::min(bins - 1, static_cast<std::size_t>(f / 0.5 * static_cast<double>(bins)));
      sum_x[b] += std::log1p(f);
      sum_y[b] += std::log(std::norm(spectrum[y * width + x]));
      ++count[b];
    }
  }
  double mx = 0, my = 0;
  std::size_t used = 0;
  std::vector<double> xs, ys;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    xs.push_back(sum_x[b] / static_cast<double>(count[b]));
    ys.push_back(sum_y[b] / static_cast<double>(count[b]));
    mx += xs.back();
    my += ys.back();
    ++used;
  }
  mx /= static_cast<double>(used);
  my /= static_cast<double>(used);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

/// Mean power of bins with |f| > 0.25 divided by mean power of bins with 0 < |f| < 0.1.
inline double high_to_low_band_ratio(std::span<const double> plane, std::size_t height, std::size_t width) {
  const auto spectrum = noise::fft2(plane, height, width);
  double hi = 0, lo = 0;
  std::size_t n_hi = 0, n_lo = 0;
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double fy = noise::fft_frequency(y, height), fx = noise::fft_frequency(x, width);
      const double f = std::sqrt(fy * fy + fx * fx);
      const double p = std::norm(spectrum[y * width + x]);
      if (f > 0.25) { hi += p; ++n_hi; }
      else if (f > 0.0 && f < 0.1) { lo += p; ++n_lo; }
    }
  return (hi / static_cast<double>(n_hi)) / (lo / static_cast<double>(n_lo));
}

/// Cosine similarity by explicit loops; zero vectors give 0.
inline double cosine_loop(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Unbiased MMD^2 with the (x.y/d + 1)^3 kernel by explicit double loops.
inline double mmd2_double_loop(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const auto d = static_cast<double>(x.cols());
  const auto k = [d](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    double dot = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) dot += a(i) * b(i);
    const double base = dot / d + 1.0;
    return base * base * base;
  };
  const Eigen::Index m = x.rows(), n = y.rows();
  double sxx = 0, syy = 0, sxy = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) sxx += k(x.row(i), x.row(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) syy += k(y.row(i), y.row(j));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) sxy += k(x.row(i), y.row(j));
  return sxx / static_cast<double>(m * (m - 1)) + syy / static_cast<double>(n * (n - 1)) -
         2.0 * sxy / static_cast<double>(m * n);
}

}  // namespace stride::testing
