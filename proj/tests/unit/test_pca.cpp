#include <chunkstore/chunkstore.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace chunkstore;

namespace {

std::vector<float> gaussian_samples(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.f, 1.f);
  std::vector<float> out(n * dim);
  // Anisotropic: dimension j scaled by (1 + j) / dim, plus a random mix.
  std::vector<float> mix(dim * dim);
  for (auto& m : mix) m = g(rng) * 0.3f;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> z(dim);
    for (std::size_t j = 0; j < dim; ++j) z[j] = g(rng) * static_cast<float>(j + 1);
    for (std::size_t r = 0; r < dim; ++r) {
      float acc = 0.5f * static_cast<float>(r);
      for (std::size_t c = 0; c < dim; ++c) acc += (r == c ? 1.f : mix[r * dim + c]) * z[c];
      out[i * dim + r] = acc;
    }
  }
  return out;
}

}  // namespace

TEST(Pca, RankOneDataReconstructs) {
  std::vector<float> samples;
  for (int i = 0; i < 50; ++i) {
    const float t = static_cast<float>(i) * 0.1f - 2.f;
    samples.insert(samples.end(), {1.f + 2.f * t, -1.f + t, 3.f - 0.5f * t});
  }
  auto fit = fit_pca(samples, 3, 1);
  for (int i = 0; i < 50; ++i) {
    std::span<const float> x(samples.data() + i * 3, 3);
    auto back = fit.transform.reconstruct(fit.transform.apply(x));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(back[j], x[j], 1e-5);
  }
}

TEST(Pca, FullRankIsIsometry) {
  const std::size_t dim = 12;
  auto samples = gaussian_samples(300, dim, 1);
  auto fit = fit_pca(samples, dim, dim);
  EXPECT_LT(fit.transform.orthonormality_error(), 1e-6);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t a = rng() % 300, b = rng() % 300;
    std::span<const float> x(samples.data() + a * dim, dim), y(samples.data() + b * dim, dim);
    const double before = oracle::sq_l2(x.data(), y.data(), dim);
    auto px = fit.transform.apply(x), py = fit.transform.apply(y);
    const double after = oracle::sq_l2(px.data(), py.data(), dim);
    EXPECT_NEAR(after, before, 1e-5 * std::max(1.0, before));
  }
}

TEST(Pca, SpectrumMatchesJacobiOracle) {
  const std::size_t dim = 10;
  auto samples = gaussian_samples(500, dim, 7);
  auto fit = fit_pca(samples, dim, 6);
  std::vector<double> vecs;
  auto want = oracle::jacobi_eigen(oracle::covariance(samples, dim), dim, &vecs);
  ASSERT_EQ(fit.explained_variance.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(fit.explained_variance[i], want[i], 1e-5 * std::max(1.0, want[i]));
    // Same direction up to sign.
    double dot = 0;
    auto row = fit.transform.row(i);
    for (std::size_t j = 0; j < dim; ++j) dot += row[j] * vecs[i * dim + j];
    EXPECT_NEAR(std::abs(dot), 1.0, 1e-4);
  }
  EXPECT_TRUE(std::is_sorted(fit.explained_variance.rbegin(), fit.explained_variance.rend()));
}

TEST(Pca, RowsOrthonormal) {
  auto samples = gaussian_samples(200, 64, 2);
  auto fit = fit_pca(samples, 64, 32);
  EXPECT_LT(fit.transform.orthonormality_error(), 1e-6);
  EXPECT_EQ(fit.transform.output_dim(), 32u);
  EXPECT_EQ(fit.transform.input_dim(), 64u);
}

TEST(Pca, Deterministic) {
  auto samples = gaussian_samples(100, 8, 5);
  EXPECT_EQ(fit_pca(samples, 8, 4).transform, fit_pca(samples, 8, 4).transform);
}

TEST(Pca, Errors) {
  std::vector<float> samples(3 * 4, 1.f);
  try {
    fit_pca(samples, 4, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kReducedDimExceedsFull);
  }
  try {
    fit_pca(samples, 4, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooFewSamples);
  }
  auto fit = fit_pca(gaussian_samples(20, 4, 1), 4, 2);
  std::vector<float> wrong(3);
  try {
    fit.transform.apply(wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDimensionMismatch);
  }
}
