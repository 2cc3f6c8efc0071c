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

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <limits>

namespace stride::pca {

/// Geometry of a P x P, stride S patch decomposition of an H x W x D grid.
struct PatchLayout {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t patch = 1;
  std::size_t stride = 1;

  std::size_t patches_y() const { return (height - patch) / stride + 1; }
  std::size_t patches_x() const { return (width - patch) / stride + 1; }
  std::size_t rows() const { return patches_y() * patches_x(); }
  std::size_t cols() const { return patch * patch * channels; }

  void validate() const {
    detail::require(patch >= 1, "patch size must be >= 1");
    detail::require(stride >= 1, "stride must be >= 1");
    detail::require(channels >= 1, "channel count must be >= 1");
    detail::require(patch <= height && patch <= width, "patch size exceeds grid height or width");
  }
};

/**
 * @brief M x (P*P*D) matrix of flattened patches plus the layout needed to invert.
 *
 * Row m = py * patches_x + px holds the patch whose top-left token is
 * (py*S, px*S). Within a row, entry ((dy*P + dx)*D + c) is token
 * (py*S + dy, px*S + dx), channel c.
 */
struct PatchMatrix {
  Eigen::MatrixXd values;
  PatchLayout layout;
};

inline PatchMatrix patchify(const Grid& grid, std::size_t patch, std::size_t stride) {
  PatchLayout layout{grid.height(), grid.width(), grid.channels(), patch, stride};
  layout.validate();
  const std::size_t d = layout.channels;
  PatchMatrix out{Eigen::MatrixXd(layout.rows(), layout.cols()), layout};
  for (std::size_t py = 0; py < layout.patches_y(); ++py) {
    for (std::size_t px = 0; px < layout.patches_x(); ++px) {
      const auto row = static_cast<Eigen::Index>(py * layout.patches_x() + px);
      for (std::size_t dy = 0; dy < patch; ++dy)
        for (std::size_t dx = 0; dx < patch; ++dx)
          for (std::size_t c = 0; c < d; ++c)
            out.values(row, static_cast<Eigen::Index>((dy * patch + dx) * d + c)) =
                grid.at(py * stride + dy, px * stride + dx, c);
    }
  }
  return out;
}

/// Overlap-averaging inverse of patchify. Cells no patch covers are 0.
inline Grid unpatchify(const PatchMatrix& patches) {
  const PatchLayout& layout = patches.layout;
  layout.validate();
  detail::require(static_cast<std::size_t>(patches.values.rows()) == layout.rows() &&
                      static_cast<std::size_t>(patches.values.cols()) == layout.cols(),
                  "unpatchify: layout metadata does not match matrix shape");

  const std::size_t p = layout.patch, s = layout.stride, d = layout.channels;
  Grid sum(layout.height, layout.width, d);
  std::vector<double> count(layout.height * layout.width, 0.0);
  for (std::size_t py = 0; py < layout.patches_y(); ++py) {
    for (std::size_t px = 0; px < layout.patches_x(); ++px) {
      const auto row = static_cast<Eigen::Index>(py * layout.patches_x() + px);
      for (std::size_t dy = 0; dy < p; ++dy) {
        for (std::size_t dx = 0; dx < p; ++dx) {
          const std::size_t y = py * s + dy, x = px * s + dx;
          count[y * layout.width + x] += 1.0;
          for (std::size_t c = 0; c < d; ++c)
            sum.at(y, x, c) += patches.values(row, static_cast<Eigen::Index>((dy * p + dx) * d + c));
        }
      }
    }
  }
  for (std::size_t y = 0; y < layout.height; ++y)
    for (std::size_t x = 0; x < layout.width; ++x) {
      const double n = count[y * layout.width + x];
      if (n > 0.0)
        for (std::size_t c = 0; c < d; ++c) sum.at(y, x, c) /= n;
    }
  return sum;
}

/**
 * @brief Top principal directions of a set of patch rows.
 *
 * `directions` is (P*P*D) x k_effective with orthonormal columns, each column's
 * largest-magnitude entry positive. `singular_values` are non-increasing. The
 * left singular vectors are not kept.
 */
struct PcaBasis {
  Eigen::MatrixXd directions;
  Eigen::VectorXd singular_values;
  Eigen::VectorXd mean;
  std::size_t k_effective = 0;
};

namespace detail {

inline Eigen::MatrixXd thin_q(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

inline void fix_signs(Eigen::MatrixXd& directions) {
  for (Eigen::Index j = 0; j < directions.cols(); ++j) {
    Eigen::Index arg = 0;
    directions.col(j).cwiseAbs().maxCoeff(&arg);
    if (directions(arg, j) < 0.0) directions.col(j) *= -1.0;
  }
}

}  // namespace detail

/**
 * @brief Randomized truncated SVD of the centered rows of `data`.
 *
 * Range finder with rank parameter q = k_effective and no oversampling:
 *   Q = qr(A G); repeat power_iterations times { Q = qr(A^T Q); Q = qr(A Q) }
 *   B = Q^T A,  B = U' S V^T
 * where A is `data` minus its column mean and G is an n x q Gaussian sketch
 * drawn from `seed`. k_effective = min(K, rows, cols).
 *
 * Singular values at the level of floating-point centering residue
 * (eps * max|data| * M * sqrt(M * n)) are set to exactly zero.
 */
inline PcaBasis fit_pca(const Eigen::MatrixXd& data, std::size_t k, std::size_t power_iterations,
                        std::uint64_t seed) {
  const auto m = static_cast<std::size_t>(data.rows());
  const auto n = static_cast<std::size_t>(data.cols());
  stride::detail::require(m >= 2, "fit_pca: need at least 2 patches");
  stride::detail::require(n >= 1, "fit_pca: need at least one feature column");
  stride::detail::require(k >= 1, "fit_pca: K must be >= 1");
  stride::detail::require(data.allFinite(), "fit_pca: non-finite patch features");

  PcaBasis basis;
  basis.k_effective = std::min({k, m, n});
  const auto q = static_cast<Eigen::Index>(basis.k_effective);

  basis.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - basis.mean.transpose();

  Eigen::MatrixXd sketch(static_cast<Eigen::Index>(n), q);
  rng::fill_normal(seed, std::span<double>(sketch.data(), static_cast<std::size_t>(sketch.size())));

  Eigen::MatrixXd range = detail::thin_q(centered * sketch);
  for (std::size_t it = 0; it < power_iterations; ++it) {
    const Eigen::MatrixXd co_range = detail::thin_q(centered.transpose() * range);
    range = detail::thin_q(centered * co_range);
  }

  const Eigen::MatrixXd projected = range.transpose() * centered;  // q x n
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(projected, Eigen::ComputeThinV);
  basis.directions = svd.matrixV().leftCols(q);
  basis.singular_values = svd.singularValues().head(q);

  const double scale = data.cwiseAbs().maxCoeff();
  const double tol = std::numeric_limits<double>::epsilon() * scale * static_cast<double>(m) *
                     std::sqrt(static_cast<double>(m * n));
  for (Eigen::Index i = 0; i < q; ++i)
    if (basis.singular_values(i) <= tol) basis.singular_values(i) = 0.0;

  detail::fix_signs(basis.directions);
  return basis;
}

inline PcaBasis fit_pca(const PatchMatrix& patches, std::size_t k, std::size_t power_iterations,
                        std::uint64_t seed) {
  return fit_pca(patches.values, k, power_iterations, seed);
}

/**
 * @brief Singular-value-weighted projection of noise patches onto a basis.
 *
 *   c = E V,   c_scaled = c * diag(s / mean(s)),   result = c_scaled V^T
 *
 * The noise is not centered. If mean(s) is 0 the result is all zeros.
 */
inline PatchMatrix project_and_scale(const PatchMatrix& noise_patches, const PcaBasis& basis) {
  stride::detail::require(noise_patches.values.cols() == basis.directions.rows(),
                          "project_and_scale: noise patch width does not match basis dimension");
  PatchMatrix out{Eigen::MatrixXd::Zero(noise_patches.values.rows(), noise_patches.values.cols()),
                  noise_patches.layout};
  if (basis.k_effective == 0) return out;
  const double mean_s = basis.singular_values.mean();
  if (mean_s == 0.0) return out;

  const Eigen::VectorXd weights = basis.singular_values / mean_s;
  const Eigen::MatrixXd coords = (noise_patches.values * basis.directions) * weights.asDiagonal();
  out.values = coords * basis.directions.transpose();
  return out;
}

}  // namespace stride::pca
