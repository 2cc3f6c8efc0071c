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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace stride::metrics {

/// n embedding vectors as rows, plus where they came from.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::string source = "unspecified";

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
};

/// Flattens each grid into one row.
inline EmbeddingSet embed(const std::vector<Grid>& grids, std::string source) {
  detail::require(!grids.empty(), "embed: no grids");
  EmbeddingSet set{Eigen::MatrixXd(static_cast<Eigen::Index>(grids.size()),
                                   static_cast<Eigen::Index>(grids.front().size())),
                   std::move(source)};
  for (std::size_t i = 0; i < grids.size(); ++i) {
    detail::require(grids[i].same_shape(grids.front()), "embed: grids differ in shape");
    set.vectors.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(grids[i].data(), static_cast<Eigen::Index>(grids[i].size()));
  }
  return set;
}

enum class Kernel { Cosine, Poly3 };

/**
 * Cosine: x.y / (|x| |y|); a zero vector has similarity 0 with everything
 * except itself (diagonal stays 1).
 * Poly3: (x.y / d + 1)^3.
 */
inline Eigen::MatrixXd pairwise_matrix(const EmbeddingSet& set, Kernel kernel) {
  detail::require(set.size() >= 1, "pairwise_matrix: empty set");
  detail::require(set.vectors.allFinite(), "pairwise_matrix: non-finite embeddings");
  const Eigen::MatrixXd gram = set.vectors * set.vectors.transpose();
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd k(n, n);
  if (kernel == Kernel::Poly3) {
    const double d = static_cast<double>(set.dim());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = std::pow(gram(i, j) / d + 1.0, 3);
    return k;
  }
  const Eigen::VectorXd norms = gram.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double denom = norms(i) * norms(j);
      k(i, j) = k(j, i) = denom > 0.0 ? std::clamp(gram(i, j) / denom, -1.0, 1.0) : 0.0;
    }
  }
  return k;
}

/// Mean cosine similarity over the n(n-1)/2 unordered pairs.
inline double in_batch_similarity(const EmbeddingSet& set) {
  detail::require(set.size() >= 2, "in_batch_similarity: need at least 2 vectors");
  const Eigen::MatrixXd k = pairwise_matrix(set, Kernel::Cosine);
  const Eigen::Index n = k.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) sum += k(i, j);
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

/// Eigenvalues below this are a PSD violation, not rounding.
inline constexpr double kEigenClampThreshold = -1e-8;

/**
 * @brief Vendi score with the cosine kernel.
 *
 * exp(-sum_i l_i log l_i) over the eigenvalues l_i of K / n, with 0 log 0 = 0.
 * Eigenvalues in [-1e-8, 0) are clamped to 0; anything more negative throws.
 */
inline double vendi_score(const EmbeddingSet& set) {
  detail::require(set.size() >= 1, "vendi_score: empty set");
  detail::require(set.vectors.allFinite(), "vendi_score: non-finite kernel");
  const Eigen::MatrixXd k = pairwise_matrix(set, Kernel::Cosine) / static_cast<double>(set.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
  detail::require(eig.info() == Eigen::Success, "vendi_score: eigen decomposition failed");
  double entropy = 0.0;
  for (double lambda : eig.eigenvalues()) {
    detail::require(lambda >= kEigenClampThreshold, "vendi_score: kernel is not positive semi-definite");
    if (lambda > 0.0) entropy -= lambda * std::log(lambda);
  }
  return std::exp(entropy);
}

/**
 * Unbiased MMD^2 between two equally sized samples under the Poly3 kernel:
 *   mean_{i != j} k(x_i, x_j) + mean_{i != j} k(y_i, y_j) - 2 mean_{i, j} k(x_i, y_j)
 */
inline double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  detail::require(x.rows() >= 2 && y.rows() >= 2, "mmd2_unbiased: need at least 2 samples per set");
  detail::require(x.cols() == y.cols(), "mmd2_unbiased: dimension mismatch");
  const double d = static_cast<double>(x.cols());
  const auto poly = [d](const Eigen::MatrixXd& gram) {
    return ((gram.array() / d + 1.0).cube()).matrix().eval();
  };
  const Eigen::MatrixXd kxx = poly(x * x.transpose());
  const Eigen::MatrixXd kyy = poly(y * y.transpose());
  const Eigen::MatrixXd kxy = poly(x * y.transpose());
  const double m = static_cast<double>(x.rows()), n = static_cast<double>(y.rows());
  const double sxx = (kxx.sum() - kxx.trace()) / (m * (m - 1.0));
  const double syy = (kyy.sum() - kyy.trace()) / (n * (n - 1.0));
  return sxx + syy - 2.0 * kxy.mean();
}

/**
 * @brief Per-block unbiased MMD^2 estimates behind KID.
 *
 * Both sets are shuffled with seeded permutations and cut into `block_count`
 * disjoint blocks of size floor(min(n_gen, n_ref) / block_count).
 */
inline std::vector<double> kid_blocks(const EmbeddingSet& generated, const EmbeddingSet& reference,
                                      std::size_t block_count, std::uint64_t seed) {
  detail::require(block_count >= 1, "kid: block_count must be >= 1");
  detail::require(generated.dim() == reference.dim(), "kid: embedding dimensions differ");
  const std::size_t block = std::min(generated.size(), reference.size()) / block_count;
  detail::require(block >= 2, "kid: each set needs at least 2 * block_count samples");

  const auto permutation = [](std::size_t n, std::uint64_t stream) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
      const auto j = static_cast<std::size_t>(rng::uniform(stream, i) * static_cast<double>(i));
      std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    return idx;
  };
  const auto gen_perm = permutation(generated.size(), rng::derive_seed(seed, {0}));
  const auto ref_perm = permutation(reference.size(), rng::derive_seed(seed, {1}));

  const auto dim = static_cast<Eigen::Index>(generated.dim());
  std::vector<double> estimates;
  estimates.reserve(block_count);
  for (std::size_t b = 0; b < block_count; ++b) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(block), dim), y(static_cast<Eigen::Index>(block), dim);
    for (std::size_t i = 0; i < block; ++i) {
      x.row(static_cast<Eigen::Index>(i)) = generated.vectors.row(static_cast<Eigen::Index>(gen_perm[b * block + i]));
      y.row(static_cast<Eigen::Index>(i)) = reference.vectors.row(static_cast<Eigen::Index>(ref_perm[b * block + i]));
    }
    estimates.push_back(mmd2_unbiased(x, y));
  }
  return estimates;
}

/// Mean of kid_blocks. Can be slightly negative.
inline double kid(const EmbeddingSet& generated, const EmbeddingSet& reference, std::size_t block_count = 10,
                  std::uint64_t seed = 0) {
  const auto blocks = kid_blocks(generated, reference, block_count, seed);
  return std::accumulate(blocks.begin(), blocks.end(), 0.0) / static_cast<double>(blocks.size());
}

struct MetricsReport {
  std::optional<double> in_batch_sim;
  std::optional<double> vendi;
  std::optional<double> kid;
  std::string source;
};

}  // namespace stride::metrics
