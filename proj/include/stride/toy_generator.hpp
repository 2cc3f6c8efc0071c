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
 * A deterministic, untrained stand-in for a distilled few-step generator.
 *
 * Feature state h is an (H*W) x D matrix (tokens x channels). Block l maps
 *
 *     h  ->  gain * tanh( A_l h W + b_l )
 *
 *   A_l  separable periodic Gaussian blur over the token grid (A_y kron A_x).
 *        Each 1D kernel is symmetric, non-negative and sums to 1, so
 *        ||A_l||_2 = 1.
 *   W    Q diag(s) Q^T with s_i = i^-1 (i = 1..D). One orthogonal Q is shared
 *        by all blocks, so the directions that dominate the features are the
 *        directions the next block preserves.
 *   b_l  bias_scale * (smooth rank-r spatial pattern) x Q[:, :r]^T, the
 *        content every sample is pulled toward.
 *   tanh has derivative in (0, 1], so each block is Lipschitz (Frobenius)
 *   with constant gain * s_1 = gain < 1.
 *
 * T steps re-feed the final feature state of step t as the input of step t+1.
 * The readout R (D x D_out) is the polar factor of a Gaussian matrix, so
 * ||R||_2 = 1 and the latent -> image map is Lipschitz with gain^(L*T).
 */

#include "stride/common.hpp"
#include "stride/npy.hpp"
#include "stride/rng.hpp"
#include "stride/stride_inject.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace stride::toy {

struct GeneratorShape {
  std::size_t depth = 6;      // L
  std::size_t steps = 1;      // T
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t feature_channels = 32;
  std::size_t output_channels = 3;
};

/// Construction constants. The defaults are the shipped generator.
struct GeneratorTuning {
  double gain = 0.95;
  double spectrum_exponent = 1.0;   // s_i = i^-exponent
  std::size_t bias_rank = 2;
  double bias_scale = 0.3;
  double blur_min = 0.8;            // per-block blur sigma in tokens, drawn in [min, max]
  double blur_max = 1.5;
};

struct Block {
  Eigen::MatrixXd mix_y;      // H x H
  Eigen::MatrixXd mix_x;      // W x W
  Eigen::MatrixXd channel;    // D x D
  RowMatrix bias;             // (H*W) x D
  double gain = 1.0;
};

struct HookSite {
  std::size_t block_index = 0;
  std::size_t timestep_index = 0;
};

struct ToyGenerator {
  GeneratorShape shape;
  GeneratorTuning tuning;
  std::uint64_t seed = 0;
  std::vector<Block> blocks;
  Eigen::MatrixXd readout;    // D x D_out

  /// Per-block Lipschitz constant.
  double contraction_factor() const { return tuning.gain; }
  /// Lipschitz constant of latent -> image without a hook.
  double lipschitz_bound() const {
    return std::pow(contraction_factor(), static_cast<double>(shape.depth * shape.steps));
  }
  /// Documented singular value profile of every channel matrix.
  Eigen::VectorXd channel_spectrum() const {
    Eigen::VectorXd s(static_cast<Eigen::Index>(shape.feature_channels));
    for (Eigen::Index i = 0; i < s.size(); ++i)
      s(i) = std::pow(static_cast<double>(i + 1), -tuning.spectrum_exponent);
    return s;
  }
};

using Hook = std::function<FeatureMap(FeatureMap)>;

struct TraceEntry {
  HookSite site;
  Grid features;   // post-hook state leaving the site
};

struct Generation {
  Grid image;
  std::vector<TraceEntry> trace;
};

struct BatchGeneration {
  std::vector<Grid> images;
  std::vector<std::vector<TraceEntry>> traces;
};

namespace detail {

inline Eigen::MatrixXd gaussian(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  rng::fill_normal(seed, std::span<double>(m.data(), static_cast<std::size_t>(m.size())));
  return m;
}

inline Eigen::MatrixXd periodic_blur(std::size_t n, double sigma) {
  std::vector<double> kernel(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dist = static_cast<double>(std::min(k, n - k));
    kernel[k] = std::exp(-dist * dist / (2.0 * sigma * sigma));
    total += kernel[k];
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel[(i + n - j) % n] / total;
  return a;
}

// Applies A_y kron A_x to every channel of an (H*W) x D token matrix.
inline RowMatrix mix_tokens(const Eigen::MatrixXd& mix_y, const Eigen::MatrixXd& mix_x, const RowMatrix& h,
                            std::size_t height, std::size_t width) {
  const auto hh = static_cast<Eigen::Index>(height), ww = static_cast<Eigen::Index>(width);
  const Eigen::Index d = h.cols();
  RowMatrix out(h.rows(), d);
  // View h as H x (W*D): row y holds tokens (y, 0..W-1) with channels fastest.
  Eigen::Map<const RowMatrix> rows_view(h.data(), hh, ww * d);
  const RowMatrix along_y = mix_y * rows_view;
  Eigen::Map<RowMatrix> out_view(out.data(), hh, ww * d);
  for (Eigen::Index y = 0; y < hh; ++y) {
    Eigen::Map<const RowMatrix> tokens(along_y.row(y).data(), ww, d);
    Eigen::Map<RowMatrix>(out_view.row(y).data(), ww, d) = mix_x * tokens;
  }
  return out;
}

}  // namespace detail

inline ToyGenerator build_generator(const GeneratorShape& shape, std::uint64_t seed,
                                    const GeneratorTuning& tuning = {}) {
  stride::detail::require(shape.depth >= 1 && shape.steps >= 1 && shape.height >= 1 && shape.width >= 1 &&
                              shape.feature_channels >= 1 && shape.output_channels >= 1,
                          "build_generator: all counts must be >= 1");
  stride::detail::require(tuning.gain > 0.0 && tuning.gain < 1.0, "build_generator: gain must be in (0, 1)");
  stride::detail::require(tuning.spectrum_exponent >= 0.0, "build_generator: spectrum exponent must be >= 0");

  ToyGenerator gen{shape, tuning, seed, {}, {}};
  const auto d = static_cast<Eigen::Index>(shape.feature_channels);
  const auto n_tokens = static_cast<Eigen::Index>(shape.height * shape.width);
  const auto rank = static_cast<Eigen::Index>(std::min<std::size_t>(tuning.bias_rank, shape.feature_channels));

  const Eigen::MatrixXd basis = pca::detail::thin_q(detail::gaussian(rng::derive_seed(seed, {1}), d, d));
  const Eigen::MatrixXd channel = basis * gen.channel_spectrum().asDiagonal() * basis.transpose();

  for (std::size_t l = 0; l < shape.depth; ++l) {
    Block block;
    const double u = rng::uniform(rng::derive_seed(seed, {2, l}), 0);
    const double sigma = tuning.blur_min + (tuning.blur_max - tuning.blur_min) * u;
    block.mix_y = detail::periodic_blur(shape.height, sigma);
    block.mix_x = detail::periodic_blur(shape.width, sigma);
    block.channel = channel;
    block.gain = tuning.gain;

    block.bias = RowMatrix::Zero(n_tokens, d);
    if (rank > 0) {
      RowMatrix pattern = detail::gaussian(rng::derive_seed(seed, {3, l}), n_tokens, rank);
      for (int pass = 0; pass < 2; ++pass)
        pattern = detail::mix_tokens(block.mix_y, block.mix_x, pattern, shape.height, shape.width);
      for (Eigen::Index r = 0; r < rank; ++r) {
        auto col = pattern.col(r);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        col = (col.array() - mean) / (sd > 0.0 ? sd : 1.0);
      }
      block.bias = tuning.bias_scale * pattern * basis.leftCols(rank).transpose();
    }
    gen.blocks.push_back(std::move(block));
  }

  const Eigen::MatrixXd g = detail::gaussian(rng::derive_seed(seed, {4}), d,
                                             static_cast<Eigen::Index>(shape.output_channels));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  gen.readout = svd.matrixU() * svd.matrixV().transpose();
  return gen;
}

inline ToyGenerator build_generator(std::size_t depth, std::size_t steps, std::size_t height, std::size_t width,
                                    std::size_t feature_channels, std::size_t output_channels, std::uint64_t seed) {
  return build_generator(GeneratorShape{depth, steps, height, width, feature_channels, output_channels}, seed);
}

inline RowMatrix apply_block(const Block& block, const RowMatrix& h, std::size_t height, std::size_t width) {
  RowMatrix pre = detail::mix_tokens(block.mix_y, block.mix_x, h, height, width) * block.channel;
  pre += block.bias;
  return block.gain * pre.array().tanh().matrix();
}

/// Standard normal latent for the generator's grid.
inline Grid sample_latent(const ToyGenerator& gen, std::uint64_t seed) {
  Grid z(gen.shape.height, gen.shape.width, gen.shape.feature_channels);
  rng::fill_normal(seed, std::span<double>(z.data(), z.size()));
  return z;
}

/**
 * Runs T steps of L blocks. After each block the hook (if any) receives a
 * single-image FeatureMap tagged with `image_id` and returns the state that
 * continues downstream.
 */
inline Generation generate(const ToyGenerator& gen, const Grid& latent, const Hook* hook = nullptr,
                           std::uint64_t image_id = 0) {
  const GeneratorShape& s = gen.shape;
  stride::detail::require(latent.height() == s.height && latent.width() == s.width &&
                              latent.channels() == s.feature_channels,
                          "generate: latent shape does not match generator grid");
  stride::detail::require(latent.all_finite(), "generate: non-finite latent");

  Generation result;
  result.trace.reserve(s.depth * s.steps);
  RowMatrix h = latent.tokens_by_channels();
  for (std::size_t t = 0; t < s.steps; ++t) {
    for (std::size_t l = 0; l < s.depth; ++l) {
      h = apply_block(gen.blocks[l], h, s.height, s.width);
      Grid state(s.height, s.width, std::move(h));
      if (hook != nullptr && *hook) {
        FeatureMap out = (*hook)(FeatureMap::single(std::move(state), image_id, l, t));
        stride::detail::require(out.batch() == 1, "generate: hook must return a single-image map");
        state = std::move(out.images.front());
        stride::detail::require(state.height() == s.height && state.width() == s.width &&
                                    state.channels() == s.feature_channels,
                                "generate: hook changed the feature shape");
      }
      h = state.tokens_by_channels();
      result.trace.push_back({{l, t}, std::move(state)});
    }
  }
  result.image = Grid(s.height, s.width, RowMatrix(h * gen.readout));
  return result;
}

/// generate() per element; element b is tagged image_ids[b] (default b).
inline BatchGeneration batch_generate(const ToyGenerator& gen, const std::vector<Grid>& latents,
                                      const Hook* hook = nullptr, std::vector<std::uint64_t> image_ids = {}) {
  stride::detail::require(!latents.empty(), "batch_generate: empty batch");
  stride::detail::require(image_ids.empty() || image_ids.size() == latents.size(),
                          "batch_generate: image_ids size does not match batch");
  BatchGeneration out;
  out.images.reserve(latents.size());
  out.traces.reserve(latents.size());
  for (std::size_t b = 0; b < latents.size(); ++b) {
    Generation g = generate(gen, latents[b], hook, image_ids.empty() ? b : image_ids[b]);
    out.images.push_back(std::move(g.image));
    out.traces.push_back(std::move(g.trace));
  }
  return out;
}

/// Writes every parameter as NPY: block{l}_{mix_y,mix_x,channel,bias}.npy, readout.npy.
inline void dump_generator(const ToyGenerator& gen, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t l = 0; l < gen.blocks.size(); ++l) {
    const Block& b = gen.blocks[l];
    const std::string prefix = "block" + std::to_string(l) + "_";
    npy::write(dir / (prefix + "mix_y.npy"), RowMatrix(b.mix_y));
    npy::write(dir / (prefix + "mix_x.npy"), RowMatrix(b.mix_x));
    npy::write(dir / (prefix + "channel.npy"), RowMatrix(b.channel));
    npy::write(dir / (prefix + "bias.npy"), b.bias);
  }
  npy::write(dir / "readout.npy", RowMatrix(gen.readout));
}

/// Writes trace_b{block}_t{step}.npy (H x W x D) for every captured site.
inline void dump_trace(const std::vector<TraceEntry>& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const TraceEntry& e : trace)
    npy::write(dir / ("trace_b" + std::to_string(e.site.block_index) + "_t" +
                      std::to_string(e.site.timestep_index) + ".npy"),
               e.features);
}

}  // namespace stride::toy
