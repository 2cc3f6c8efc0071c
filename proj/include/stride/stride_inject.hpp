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
#include "stride/patch_pca.hpp"
#include "stride/rng.hpp"
#include "stride/spectral_noise.hpp"

#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

namespace stride {

/// All knobs of the perturbation. Defaults are the toy-scale operating point.
struct StrideConfig {
  double alpha = 0.5;                 // injection strength
  double f_alpha = 1.0;               // spectral exponent of the noise filter
  std::size_t patch_size = 2;
  std::size_t stride = 2;
  std::size_t k_components = 16;
  std::size_t power_iterations = 2;
  std::set<std::size_t> layer_set{0, 1};
  std::set<std::size_t> step_gate{0};
  std::uint64_t seed = 0;
  bool energy_match = true;           // No-PCA ablation only

  void validate() const {
    detail::require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be a finite value >= 0");
    detail::require(f_alpha >= 0.0 && std::isfinite(f_alpha), "f_alpha must be a finite value >= 0");
    detail::require(patch_size >= 1, "patch_size must be >= 1");
    detail::require(stride >= 1, "stride must be >= 1");
    detail::require(k_components >= 1, "k_components must be >= 1");
  }

  /// Validation for a config that will actually inject.
  void validate_active() const {
    validate();
    detail::require(!layer_set.empty(), "layer_set must be non-empty");
    detail::require(!step_gate.empty(), "step_gate must be non-empty");
  }

  bool gate_open(std::size_t block, std::size_t step) const {
    return layer_set.contains(block) && step_gate.contains(step);
  }
};

/// Blocks [0, ceil(depth / 3)), the early third of the stack.
inline std::set<std::size_t> default_layer_set(std::size_t depth) {
  std::set<std::size_t> layers;
  for (std::size_t l = 0; l < (depth + 2) / 3; ++l) layers.insert(l);
  return layers;
}

/**
 * @brief A batch of hidden states observed at one (block, timestep) site.
 *
 * `image_ids` label each batch element for seed derivation and travel with
 * the element, so a permuted batch yields permuted outputs.
 */
struct FeatureMap {
  std::vector<Grid> images;
  std::vector<std::uint64_t> image_ids;
  std::size_t block_index = 0;
  std::size_t timestep_index = 0;

  static FeatureMap single(Grid grid, std::uint64_t image_id, std::size_t block, std::size_t step) {
    return FeatureMap{{std::move(grid)}, {image_id}, block, step};
  }

  std::size_t batch() const { return images.size(); }

  std::uint64_t id_of(std::size_t b) const { return image_ids.empty() ? b : image_ids.at(b); }

  void validate() const {
    detail::require(!images.empty(), "FeatureMap: empty batch");
    detail::require(image_ids.empty() || image_ids.size() == images.size(),
                    "FeatureMap: image_ids size does not match batch");
    for (const Grid& g : images) {
      detail::require(g.same_shape(images.front()), "FeatureMap: batch elements differ in shape");
      detail::require(g.all_finite(), "FeatureMap: non-finite features");
    }
  }
};

/// Noise stream of one (image, block, step) injection site.
inline std::uint64_t site_seed(std::uint64_t seed, std::uint64_t image_id, std::size_t block,
                               std::size_t step) {
  return rng::derive_seed(seed, {image_id, block, step});
}

/// Normalized pink field over the grid's tokens, one plane per channel.
inline Grid pink_direction(std::size_t height, std::size_t width, std::size_t channels, double f_alpha,
                           std::uint64_t seed) {
  return noise::to_grid(noise::pink_noise(channels, height, width, f_alpha, seed));
}

/**
 * @brief Unit-strength perturbation d for one image, before scaling by alpha.
 *
 * pink noise -> patchify -> PCA of h's own patches -> project_and_scale -> unpatchify.
 * The PCA sketch uses a stream distinct from the noise stream.
 */
inline Grid stride_direction(const Grid& h, const StrideConfig& cfg, std::uint64_t noise_seed) {
  const Grid noise = pink_direction(h.height(), h.width(), h.channels(), cfg.f_alpha, noise_seed);
  const pca::PatchMatrix feature_patches = pca::patchify(h, cfg.patch_size, cfg.stride);
  const pca::PcaBasis basis = pca::fit_pca(feature_patches, cfg.k_components, cfg.power_iterations,
                                           rng::derive_seed(noise_seed, {0x50434aULL}));
  const pca::PatchMatrix noise_patches = pca::patchify(noise, cfg.patch_size, cfg.stride);
  return pca::unpatchify(pca::project_and_scale(noise_patches, basis));
}

inline Grid add_scaled(const Grid& h, double scale, const Grid& d) {
  Grid out = h;
  out.tokens_by_channels() += scale * d.tokens_by_channels();
  return out;
}

/// h' = h + alpha * d at gated sites; every image independently.
inline FeatureMap stride_perturb(const FeatureMap& h, const StrideConfig& cfg) {
  cfg.validate();
  h.validate();
  if (cfg.alpha == 0.0 || !cfg.gate_open(h.block_index, h.timestep_index)) return h;

  FeatureMap out = h;
  for (std::size_t b = 0; b < h.batch(); ++b) {
    const Grid d = stride_direction(h.images[b], cfg,
                                    site_seed(cfg.seed, h.id_of(b), h.block_index, h.timestep_index));
    out.images[b] = add_scaled(h.images[b], cfg.alpha, d);
  }
  return out;
}

/**
 * @brief Ablation: inject the normalized pink field without the PCA projection.
 *
 * With energy_match, the injected field is rescaled per image so its Frobenius
 * norm equals that of the stride_perturb perturbation for the same seed.
 */
inline FeatureMap no_pca_perturb(const FeatureMap& h, const StrideConfig& cfg) {
  cfg.validate();
  h.validate();
  if (cfg.alpha == 0.0 || !cfg.gate_open(h.block_index, h.timestep_index)) return h;

  FeatureMap out = h;
  for (std::size_t b = 0; b < h.batch(); ++b) {
    const Grid& image = h.images[b];
    const std::uint64_t seed = site_seed(cfg.seed, h.id_of(b), h.block_index, h.timestep_index);
    const Grid d = pink_direction(image.height(), image.width(), image.channels(), cfg.f_alpha, seed);
    double scale = cfg.alpha;
    if (cfg.energy_match) {
      const double target = cfg.alpha * stride_direction(image, cfg, seed).tokens_by_channels().norm();
      const double norm = d.tokens_by_channels().norm();
      scale = norm > 0.0 ? target / norm : 0.0;
    }
    out.images[b] = add_scaled(image, scale, d);
  }
  return out;
}

/**
 * Input-level baseline: z' = (1 - alpha) z + alpha z_pink, with z_pink a
 * normalized pink field of z's shape drawn from derive_seed(seed, {image_id}).
 */
inline Grid input_noise_blend(const Grid& z, double alpha, double f_alpha, std::uint64_t seed,
                              std::uint64_t image_id = 0) {
  detail::require(alpha >= 0.0 && alpha <= 1.0, "input_noise_blend: alpha must be in [0, 1]");
  detail::require(z.all_finite(), "input_noise_blend: non-finite latent");
  if (alpha == 0.0) return z;
  Grid pink = pink_direction(z.height(), z.width(), z.channels(), f_alpha, rng::derive_seed(seed, {image_id}));
  if (alpha == 1.0) return pink;
  pink.tokens_by_channels() = (1.0 - alpha) * z.tokens_by_channels() + alpha * pink.tokens_by_channels();
  return pink;
}

inline std::vector<Grid> input_noise_blend(const std::vector<Grid>& latents, double alpha, double f_alpha,
                                           std::uint64_t seed) {
  std::vector<Grid> out;
  out.reserve(latents.size());
  for (std::size_t b = 0; b < latents.size(); ++b)
    out.push_back(input_noise_blend(latents[b], alpha, f_alpha, seed, b));
  return out;
}

/// Frobenius norm of after - before over the whole batch.
inline double perturbation_energy(const FeatureMap& before, const FeatureMap& after) {
  detail::require(before.batch() == after.batch(), "perturbation_energy: batch size mismatch");
  double sum = 0.0;
  for (std::size_t b = 0; b < before.batch(); ++b) {
    detail::require(before.images[b].same_shape(after.images[b]), "perturbation_energy: shape mismatch");
    sum += (after.images[b].tokens_by_channels() - before.images[b].tokens_by_channels()).squaredNorm();
  }
  return std::sqrt(sum);
}

}  // namespace stride
