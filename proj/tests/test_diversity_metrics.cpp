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

#include "stride/diversity_metrics.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace stride;
using namespace stride::metrics;
using Catch::Approx;

namespace {

EmbeddingSet rows(std::initializer_list<std::initializer_list<double>> values) {
  EmbeddingSet set;
  set.vectors.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) set.vectors(i, j++) = v;
    ++i;
  }
  return set;
}

EmbeddingSet random_set(std::uint64_t seed, Eigen::Index n, Eigen::Index d, double shift = 0.0) {
  std::mt19937_64 gen(seed);
  EmbeddingSet set{testing::random_matrix(gen, n, d), "random"};
  set.vectors.array() += shift;
  return set;
}

}  // namespace

TEST_CASE("in_batch_similarity hand-computed cases", "[diversity_metrics]") {
  CHECK(in_batch_similarity(rows({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}})) == Approx(1.0).margin(1e-12));
  CHECK(in_batch_similarity(rows({{1, 0}, {0, 1}})) == 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(in_batch_similarity(rows({{1, 0}, {0, 1}, {r, r}})) - std::sqrt(2.0) / 3.0) < 1e-12);
  CHECK(std::abs(in_batch_similarity(rows({{1, 0}, {0, 1}, {r, r}})) - 0.47140452079103) < 1e-12);
  CHECK(in_batch_similarity(rows({{1, 0}, {-1, 0}})) == -1.0);
}

TEST_CASE("in_batch_similarity matches a loop oracle and its invariances", "[diversity_metrics]") {
  EmbeddingSet set = random_set(3, 9, 12, 0.4);
  double want = 0;
  for (Eigen::Index i = 0; i < 9; ++i)
    for (Eigen::Index j = i + 1; j < 9; ++j) want += testing::cosine_loop(set.vectors.row(i), set.vectors.row(j));
  want /= 36.0;
  const double got = in_batch_similarity(set);
  CHECK(std::abs(got - want) < 1e-12);

  EmbeddingSet reordered = set;
  reordered.vectors.row(0).swap(reordered.vectors.row(8));
  reordered.vectors.row(2).swap(reordered.vectors.row(5));
  CHECK(in_batch_similarity(reordered) == Approx(got).epsilon(1e-12));
  EmbeddingSet scaled = set;
  scaled.vectors.row(4) *= 17.0;
  scaled.vectors.row(1) *= 0.01;
  CHECK(in_batch_similarity(scaled) == Approx(got).epsilon(1e-12));
}

TEST_CASE("in_batch_similarity conventions and errors", "[diversity_metrics]") {
  CHECK(in_batch_similarity(rows({{0, 0}, {1, 0}})) == 0.0);
  CHECK(in_batch_similarity(rows({{0, 0}, {0, 0}})) == 0.0);
  CHECK_THROWS_AS(in_batch_similarity(rows({{1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(in_batch_similarity(rows({{1, std::nan("")}, {1, 0}})), std::invalid_argument);
}

TEST_CASE("vendi_score reference constructions", "[diversity_metrics]") {
  CHECK(std::abs(vendi_score(rows({{1, 2}, {1, 2}, {1, 2}, {1, 2}})) - 1.0) < 1e-9);
  CHECK(std::abs(vendi_score(rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})) - 3.0) < 1e-9);
  std::mt19937_64 gen(4);
  const EmbeddingSet ortho{testing::random_orthonormal(gen, 10, 7).transpose(), "q"};
  CHECK(std::abs(vendi_score(ortho) - 7.0) < 1e-9);
  CHECK(std::abs(vendi_score(rows({{1, 0}, {2, 0}, {0, 3}, {0, 1}})) - 2.0) < 1e-9);
  CHECK(vendi_score(rows({{5, 5}})) == Approx(1.0).margin(1e-12));
}

TEST_CASE("vendi_score bounds and invariances", "[diversity_metrics]") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const EmbeddingSet set = random_set(s, 8, 5, 0.3 * static_cast<double>(s % 4));
    const double v = vendi_score(set);
    CHECK(v >= 1.0 - 1e-12);
    CHECK(v <= 8.0 + 1e-12);

    EmbeddingSet reordered = set;
    reordered.vectors.row(0).swap(reordered.vectors.row(7));
    CHECK(vendi_score(reordered) == Approx(v).epsilon(1e-9));
    EmbeddingSet scaled = set;
    scaled.vectors.row(3) *= 42.0;
    CHECK(vendi_score(scaled) == Approx(v).epsilon(1e-9));

    EmbeddingSet doubled{Eigen::MatrixXd(16, 5), "dup"};
    doubled.vectors << set.vectors, set.vectors;
    CHECK(std::abs(vendi_score(doubled) - v) < 1e-9);
  }
}

TEST_CASE("vendi_score errors", "[diversity_metrics]") {
  CHECK_THROWS_AS(vendi_score(EmbeddingSet{}), std::invalid_argument);
  CHECK_THROWS_AS(vendi_score(rows({{1, std::numeric_limits<double>::infinity()}})), std::invalid_argument);
}

TEST_CASE("pairwise_matrix against an elementwise oracle", "[diversity_metrics]") {
  const EmbeddingSet set = random_set(8, 5, 3);
  const Eigen::MatrixXd cos = pairwise_matrix(set, Kernel::Cosine);
  const Eigen::MatrixXd poly = pairwise_matrix(set, Kernel::Poly3);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) {
      double dot = 0;
      for (Eigen::Index c = 0; c < 3; ++c) dot += set.vectors(i, c) * set.vectors(j, c);
      const double base = dot / 3.0 + 1.0;
      CHECK(std::abs(poly(i, j) - base * base * base) < 1e-12);
      CHECK(std::abs(cos(i, j) - (i == j ? 1.0 : testing::cosine_loop(set.vectors.row(i), set.vectors.row(j)))) <
            1e-12);
    }
  CHECK(cos == cos.transpose());
  CHECK(poly == poly.transpose());
  CHECK(pairwise_matrix(rows({{3, 4}}), Kernel::Cosine) == Eigen::MatrixXd::Ones(1, 1));

  const Eigen::MatrixXd with_zero = pairwise_matrix(rows({{0, 0}, {1, 1}}), Kernel::Cosine);
  CHECK(with_zero(0, 0) == 1.0);
  CHECK(with_zero(0, 1) == 0.0);
}

TEST_CASE("mmd2_unbiased matches the double-loop oracle", "[diversity_metrics]") {
  for (Eigen::Index n : {2, 7, 32, 64}) {
    const EmbeddingSet x = random_set(static_cast<std::uint64_t>(n), n, 6);
    const EmbeddingSet y = random_set(static_cast<std::uint64_t>(n) + 1000, n, 6, 0.2);
    CHECK(std::abs(mmd2_unbiased(x.vectors, y.vectors) - testing::mmd2_double_loop(x.vectors, y.vectors)) < 1e-10);
  }
}

TEST_CASE("kid with one block equals the oracle on the whole set", "[diversity_metrics]") {
  const EmbeddingSet ref = random_set(12, 64, 6);
  CHECK(std::abs(kid(ref, ref, 1, 5) - testing::mmd2_double_loop(ref.vectors, ref.vectors)) < 1e-10);
  const EmbeddingSet other = random_set(13, 64, 6, 0.5);
  CHECK(std::abs(kid(other, ref, 1, 5) - testing::mmd2_double_loop(other.vectors, ref.vectors)) < 1e-10);
}

TEST_CASE("kid of a split reference is near zero", "[diversity_metrics]") {
  const EmbeddingSet ref = random_set(21, 400, 8);
  const EmbeddingSet a{ref.vectors.topRows(200), "a"}, b{ref.vectors.bottomRows(200), "b"};
  const auto blocks = kid_blocks(a, b, 10, 3);
  REQUIRE(blocks.size() == 10);
  double mean = 0;
  for (double v : blocks) mean += v;
  mean /= 10.0;
  double var = 0;
  for (double v : blocks) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / 9.0) / std::sqrt(10.0);
  CHECK(std::abs(mean) < 3.0 * se);
  CHECK(kid(a, b, 10, 3) == mean);

  const EmbeddingSet shifted{a.vectors.array() + 3.0, "shifted"};
  const double far = kid(shifted, b, 10, 3);
  CHECK(far > 0.0);
  CHECK(far > std::abs(mean));
}

TEST_CASE("kid is seeded and validates sizes", "[diversity_metrics]") {
  const EmbeddingSet x = random_set(1, 50, 4), y = random_set(2, 60, 4);
  CHECK(kid(x, y, 5, 9) == kid(x, y, 5, 9));
  CHECK(kid(x, y, 5, 9) != kid(x, y, 5, 10));
  CHECK_THROWS_AS(kid(x, y, 30, 0), std::invalid_argument);
  CHECK_THROWS_AS(kid(x, random_set(3, 60, 5), 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(kid(x, y, 0, 0), std::invalid_argument);
}

TEST_CASE("embed flattens grids row by row", "[diversity_metrics]") {
  Grid a(1, 2, 2), b(1, 2, 2);
  a.at(0, 1, 1) = 4.0;
  b.at(0, 0, 0) = -1.0;
  const EmbeddingSet set = embed({a, b}, "pixels");
  CHECK(set.source == "pixels");
  CHECK(set.size() == 2);
  CHECK(set.dim() == 4);
  CHECK(set.vectors(0, 3) == 4.0);
  CHECK(set.vectors(1, 0) == -1.0);
  CHECK_THROWS_AS(embed({a, Grid(2, 1, 2)}, "x"), std::invalid_argument);
  CHECK_THROWS_AS(embed({}, "x"), std::invalid_argument);
}
