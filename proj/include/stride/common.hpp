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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace stride {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when a file cannot be read or written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace detail

/**
 * @brief A single image's hidden states on an H x W token grid with D channels.
 *
 * Storage is a row-major (H*W) x D matrix: token (y, x) is row y*W + x, so the
 * flat buffer is in (y, x, c) C order with the channel index fastest.
 */
class Grid {
 public:
  Grid() = default;

  Grid(std::size_t height, std::size_t width, std::size_t channels)
      : height_(height), width_(width),
        values_(RowMatrix::Zero(static_cast<Eigen::Index>(height * width),
                                static_cast<Eigen::Index>(channels))) {}

  Grid(std::size_t height, std::size_t width, RowMatrix values)
      : height_(height), width_(width), values_(std::move(values)) {
    detail::require(static_cast<std::size_t>(values_.rows()) == height * width,
                    "Grid: token matrix rows must equal height * width");
  }

  static Grid constant(std::size_t height, std::size_t width, std::size_t channels, double value) {
    Grid g(height, width, channels);
    g.values_.setConstant(value);
    return g;
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return static_cast<std::size_t>(values_.cols()); }
  std::size_t tokens() const { return height_ * width_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return values_(static_cast<Eigen::Index>(y * width_ + x), static_cast<Eigen::Index>(c));
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return values_(static_cast<Eigen::Index>(y * width_ + x), static_cast<Eigen::Index>(c));
  }

  /// Tokens as rows, channels as columns.
  RowMatrix& tokens_by_channels() { return values_; }
  const RowMatrix& tokens_by_channels() const { return values_; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels() == other.channels();
  }

  bool all_finite() const { return values_.allFinite(); }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  RowMatrix values_;
};

inline double frobenius_distance(const Grid& a, const Grid& b) {
  detail::require(a.same_shape(b), "frobenius_distance: shape mismatch");
  return (a.tokens_by_channels() - b.tokens_by_channels()).norm();
}

}  // namespace stride
