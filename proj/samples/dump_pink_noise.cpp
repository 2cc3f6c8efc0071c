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

// Writes normalized 1/f noise fields for a few exponents as (C, H, W) float32 NPY.
//
//   dump_pink_noise [out_dir] [size] [seed]

#include "stride/npy.hpp"
#include "stride/spectral_noise.hpp"

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  using namespace stride;
  const std::filesystem::path out = argc > 1 ? argv[1] : "pink_noise_out";
  const std::size_t size = argc > 2 ? std::stoul(argv[2]) : 256;
  const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 0;

  std::filesystem::create_directories(out);
  for (double f_alpha : {0.0, 0.5, 1.0, 2.0}) {
    const noise::NoiseField field = noise::pink_noise(3, size, size, f_alpha, seed);
    char name[32];
    std::snprintf(name, sizeof(name), "pink_f%.1f.npy", f_alpha);
    try {
      npy::write(out / name, field);
    } catch (const io_error& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    std::cout << (out / name).string() << "\n";
  }
  return 0;
}
