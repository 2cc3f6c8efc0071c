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

// Runs the default toy generator on one latent with and without a STRIDE hook,
// prints per-site perturbation energy and writes both traces as NPY.
//
//   perturb_one_image [out_dir]

#include "stride/stride.hpp"

#include <iostream>

int main(int argc, char** argv) {
  using namespace stride;
  const std::filesystem::path out = argc > 1 ? argv[1] : "perturb_one_image_out";

  const toy::ToyGenerator gen = toy::build_generator(toy::GeneratorShape{}, 1);
  const Grid latent = toy::sample_latent(gen, 42);

  StrideConfig cfg;
  cfg.alpha = 0.5;
  cfg.layer_set = default_layer_set(gen.shape.depth);

  const toy::Hook hook = [&cfg](FeatureMap h) {
    FeatureMap after = stride_perturb(h, cfg);
    const double e = perturbation_energy(h, after);
    if (e > 0.0) std::cout << "block " << h.block_index << " step " << h.timestep_index << ": |alpha d| = " << e << "\n";
    return after;
  };

  const toy::Generation plain = toy::generate(gen, latent);
  const toy::Generation perturbed = toy::generate(gen, latent, &hook);
  std::cout << "output change |x' - x| = " << frobenius_distance(plain.image, perturbed.image)
            << " (latent norm " << latent.tokens_by_channels().norm() << ")\n";

  try {
    toy::dump_trace(plain.trace, out / "baseline");
    toy::dump_trace(perturbed.trace, out / "stride");
    npy::write(out / "baseline_image.npy", plain.image);
    npy::write(out / "stride_image.npy", perturbed.image);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote traces and images under " << out.string() << "\n";
  return 0;
}
