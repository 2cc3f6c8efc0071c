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

#include "stride/npy.hpp"
#include "stride/toy_generator.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>

using namespace stride;
using namespace stride::toy;
using Catch::Approx;

namespace {

double mean_pairwise_cosine(const std::vector<Eigen::RowVectorXd>& v) {
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j, ++pairs) sum += testing::cosine_loop(v[i], v[j]);
  return sum / static_cast<double>(pairs);
}

Eigen::RowVectorXd flat(const Grid& g) {
  return Eigen::Map<const Eigen::RowVectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

}  // namespace

TEST_CASE("build_generator is deterministic per seed", "[toy_generator]") {
  const ToyGenerator a = build_generator(GeneratorShape{}, 5), b = build_generator(GeneratorShape{}, 5);
  const ToyGenerator c = build_generator(GeneratorShape{}, 6);
  const Grid z = sample_latent(a, 1);
  CHECK(testing::bit_identical(generate(a, z).image, generate(b, z).image));
  CHECK_FALSE(testing::bit_identical(generate(a, z).image, generate(c, z).image));
  CHECK(testing::bit_identical(sample_latent(a, 1), sample_latent(b, 1)));
}

TEST_CASE("smallest generator runs", "[toy_generator]") {
  const ToyGenerator gen = build_generator(1, 1, 4, 4, 8, 3, 0);
  const Generation out = generate(gen, sample_latent(gen, 0));
  CHECK(out.image.height() == 4);
  CHECK(out.image.width() == 4);
  CHECK(out.image.channels() == 3);
  CHECK(out.image.all_finite());
  CHECK(out.trace.size() == 1);
}

TEST_CASE("build_generator rejects bad shapes and tuning", "[toy_generator]") {
  CHECK_THROWS_AS(build_generator(0, 1, 4, 4, 8, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_generator(1, 0, 4, 4, 8, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_generator(1, 1, 4, 4, 0, 3, 0), std::invalid_argument);
  GeneratorTuning t;
  t.gain = 1.0;
  CHECK_THROWS_AS(build_generator(GeneratorShape{}, 0, t), std::invalid_argument);
}

TEST_CASE("channel matrices carry the documented spectrum", "[toy_generator]") {
  const ToyGenerator gen = build_generator(GeneratorShape{}, 11);
  const Eigen::VectorXd want = gen.channel_spectrum();
  CHECK(want(0) == 1.0);
  CHECK(want(3) == 0.25);
  for (const Block& b : gen.blocks) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.channel);
    CHECK((svd.singularValues() - want).cwiseAbs().maxCoeff() < 1e-6);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> ro(gen.readout);
  CHECK((ro.singularValues().array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("hooks: identity and alpha = 0 STRIDE are transparent", "[toy_generator]") {
  const ToyGenerator gen = build_generator(GeneratorShape{}, 3);
  const Grid z = sample_latent(gen, 21);
  const Generation plain = generate(gen, z);

  const Hook identity = [](FeatureMap m) { return m; };
  const Generation hooked = generate(gen, z, &identity, 4);
  CHECK(testing::bit_identical(hooked.image, plain.image));
  REQUIRE(hooked.trace.size() == plain.trace.size());
  for (std::size_t i = 0; i < plain.trace.size(); ++i)
    CHECK(testing::bit_identical(hooked.trace[i].features, plain.trace[i].features));

  StrideConfig cfg;
  cfg.alpha = 0.0;
  const Hook stride_hook = [cfg](FeatureMap m) { return stride_perturb(m, cfg); };
  CHECK(testing::bit_identical(generate(gen, z, &stride_hook, 4).image, plain.image));
  const Hook empty;
  CHECK(testing::bit_identical(generate(gen, z, &empty).image, plain.image));
}

TEST_CASE("hook sees every site in order and its output flows downstream", "[toy_generator]") {
  const ToyGenerator gen = build_generator(3, 2, 6, 6, 8, 3, 0);
  std::vector<HookSite> seen;
  const Hook record = [&seen](FeatureMap m) {
    seen.push_back({m.block_index, m.timestep_index});
    CHECK(m.image_ids.front() == 77);
    return m;
  };
  const Generation out = generate(gen, sample_latent(gen, 0), &record, 77);
  REQUIRE(seen.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(seen[i].block_index == i % 3);
    CHECK(seen[i].timestep_index == i / 3);
    CHECK(out.trace[i].site.block_index == i % 3);
  }

  const Hook zero_last = [](FeatureMap m) {
    if (m.block_index == 2 && m.timestep_index == 1) m.images[0].tokens_by_channels().setZero();
    return m;
  };
  const Generation zeroed = generate(gen, sample_latent(gen, 0), &zero_last);
  CHECK(zeroed.image.tokens_by_channels().norm() == 0.0);

  const Hook reshape = [](FeatureMap m) {
    m.images[0] = Grid(2, 2, 8);
    return m;
  };
  CHECK_THROWS_AS(generate(gen, sample_latent(gen, 0), &reshape), std::invalid_argument);
}

TEST_CASE("generator is a contraction with the stated Lipschitz bound", "[toy_generator]") {
  const ToyGenerator gen = build_generator(GeneratorShape{}, 2);
  CHECK(gen.lipschitz_bound() == Approx(std::pow(0.95, 6)).epsilon(1e-15));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Grid z1 = sample_latent(gen, 100 + s), z2 = sample_latent(gen, 200 + s);
    const double out = frobenius_distance(generate(gen, z1).image, generate(gen, z2).image);
    CHECK(out <= gen.lipschitz_bound() * frobenius_distance(z1, z2));
  }
}

TEST_CASE("batch_generate matches per-image generate", "[toy_generator]") {
  const ToyGenerator gen = build_generator(GeneratorShape{}, 9);
  std::vector<Grid> latents;
  for (std::uint64_t b = 0; b < 8; ++b) latents.push_back(sample_latent(gen, b));

  StrideConfig cfg;
  cfg.alpha = 0.7;
  const Hook hook = [cfg](FeatureMap m) { return stride_perturb(m, cfg); };

  const BatchGeneration batch = batch_generate(gen, latents, &hook);
  for (std::size_t b = 0; b < 8; ++b)
    CHECK(testing::bit_identical(batch.images[b], generate(gen, latents[b], &hook, b).image));

  const BatchGeneration one = batch_generate(gen, {latents[3]}, &hook, {3});
  CHECK(testing::bit_identical(one.images[0], batch.images[3]));

  const BatchGeneration perm = batch_generate(gen, {latents[5], latents[1]}, &hook, {5, 1});
  CHECK(testing::bit_identical(perm.images[0], batch.images[5]));
  CHECK(testing::bit_identical(perm.images[1], batch.images[1]));

  CHECK_THROWS_AS(batch_generate(gen, {}), std::invalid_argument);
  CHECK_THROWS_AS(batch_generate(gen, latents, nullptr, {1, 2}), std::invalid_argument);
}

TEST_CASE("outputs collapse relative to latents", "[toy_generator]") {
  const ToyGenerator gen = build_generator(GeneratorShape{}, 1);
  std::vector<Eigen::RowVectorXd> zs, xs;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const Grid z = sample_latent(gen, rng::derive_seed(17, {s}));
    zs.push_back(flat(z));
    xs.push_back(flat(generate(gen, z).image));
  }
  const double latent_cos = mean_pairwise_cosine(zs), output_cos = mean_pairwise_cosine(xs);
  CHECK(std::abs(latent_cos) < 0.05);
  CHECK(output_cos > latent_cos + 0.2);
}

TEST_CASE("early-block features are low-rank", "[toy_generator]") {
  const ToyGenerator gen = build_generator(GeneratorShape{}, 1);
  const Generation out = generate(gen, sample_latent(gen, 3));
  for (std::size_t l : {0u, 1u}) {
    const Eigen::MatrixXd h = out.trace[l].features.tokens_by_channels();
    const Eigen::MatrixXd centered = h.rowwise() - h.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const Eigen::VectorXd var = svd.singularValues().array().square();
    const auto top = static_cast<Eigen::Index>(std::ceil(0.1 * static_cast<double>(var.size())));
    CHECK(var.head(top).sum() / var.sum() >= 0.9);
  }
}

TEST_CASE("generate rejects mismatched latents", "[toy_generator]") {
  const ToyGenerator gen = build_generator(1, 1, 4, 4, 8, 3, 0);
  CHECK_THROWS_AS(generate(gen, Grid(4, 5, 8)), std::invalid_argument);
  Grid bad = sample_latent(gen, 0);
  bad.at(1, 1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(generate(gen, bad), std::invalid_argument);
}

TEST_CASE("generator and trace dumps round-trip through NPY", "[toy_generator][npy]") {
  const ToyGenerator gen = build_generator(2, 1, 4, 4, 8, 3, 0);
  const auto dir = std::filesystem::temp_directory_path() / "stride_toy_dump";
  std::filesystem::remove_all(dir);
  dump_generator(gen, dir);
  const auto channel = npy::read(dir / "block1_channel.npy");
  CHECK(channel.shape == std::vector<std::size_t>{8, 8});
  CHECK(channel.values[9] == static_cast<double>(static_cast<float>(gen.blocks[1].channel(1, 1))));
  CHECK(npy::read(dir / "readout.npy").shape == std::vector<std::size_t>{8, 3});

  const Generation out = generate(gen, sample_latent(gen, 0));
  dump_trace(out.trace, dir);
  const auto t = npy::read(dir / "trace_b1_t0.npy");
  CHECK(t.shape == std::vector<std::size_t>{4, 4, 8});
  CHECK(t.values[5] == static_cast<double>(static_cast<float>(out.trace[1].features.data()[5])));
  std::filesystem::remove_all(dir);
}
