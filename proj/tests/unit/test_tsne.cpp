#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace ledger_emd;
using namespace ledger_emd::testing;

namespace {

/// Two well-separated Gaussian blobs in 5 dimensions; labels 0 and 1.
DistanceMatrix two_blobs(std::uint64_t seed, std::size_t per_blob, std::vector<int>& labels) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::array<double, 5>> pts;
  labels.clear();
  for (int blob = 0; blob < 2; ++blob) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::array<double, 5> p{};
      for (double& v : p) v = g(rng) + (blob == 1 ? 10.0 : 0.0);
      pts.push_back(p);
      labels.push_back(blob);
    }
  }
  SquareMatrix m(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < 5; ++c) s += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
      m(i, j) = std::sqrt(s);
    }
  }
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < pts.size(); ++i) ids.push_back("p" + std::to_string(1000 + i));
  return DistanceMatrix(ids, m);
}

}  // namespace

TEST(Perplexity, EquidistantRowsAreUniform) {
  SquareMatrix d(3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) d(i, i) = 0.0;
  const auto p = conditional_probabilities(d, 1.5);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), i == j ? 0.0 : 0.5, 1e-12);
  }
}

TEST(Perplexity, RowsHitTargetAndSumToOne) {
  Rng rng(60);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_distance_matrix_fixture(rng, 50);
    for (double perplexity : {5.0, 20.0, 40.0}) {
      const auto p = conditional_probabilities(d.values(), perplexity, 2);
      for (std::size_t i = 0; i < 50; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 50; ++j) sum += p(i, j);
        EXPECT_NEAR(sum, 1.0, 1e-9);
        EXPECT_EQ(p(i, i), 0.0);
        EXPECT_NEAR(row_perplexity(p, i), perplexity, 1e-5);
      }
    }
  }
}

TEST(Perplexity, Errors) {
  Rng rng(61);
  const auto d = random_distance_matrix_fixture(rng, 10);
  for (double bad : {0.0, -1.0, 9.0, 12.0}) {
    try {
      conditional_probabilities(d.values(), bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_argument);
    }
  }
  SquareMatrix zero(4, 0.0);
  try {
    conditional_probabilities(zero, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate);
  }
}

TEST(Symmetrize, SumsToOneAndSymmetric) {
  Rng rng(62);
  const auto d = random_distance_matrix_fixture(rng, 40);
  const auto p = symmetrize(conditional_probabilities(d.values(), 10.0));
  double sum = 0.0;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 40; ++j) {
      sum += p(i, j);
      EXPECT_EQ(p(i, j), p(j, i));
    }
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(KlGradient, MatchesFiniteDifferences) {
  Rng rng(63);
  const auto d = random_distance_matrix_fixture(rng, 10);
  const auto p = symmetrize(conditional_probabilities(d.values(), 3.0));
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> y(20);
    for (double& v : y) v = g(rng);
    const auto grad = kl_gradient(p, y);
    constexpr double h = 1e-5;
    for (std::size_t c = 0; c < y.size(); ++c) {
      auto plus = y;
      auto minus = y;
      plus[c] += h;
      minus[c] -= h;
      const double numeric = (kl_divergence(p, plus) - kl_divergence(p, minus)) / (2.0 * h);
      const double scale = std::max(std::abs(numeric), 1e-3);
      EXPECT_LT(std::abs(grad[c] - numeric) / scale, 1e-4) << c;
    }
  }
}

TEST(KlGradient, ThreadCountDoesNotChangeResult) {
  Rng rng(64);
  const auto d = random_distance_matrix_fixture(rng, 30);
  const auto p = symmetrize(conditional_probabilities(d.values(), 8.0));
  std::vector<double> y(60);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : y) v = g(rng);
  EXPECT_EQ(kl_gradient(p, y, 1), kl_gradient(p, y, 4));
}

TEST(Tsne, SeparatesTwoClustersAndReducesKl) {
  std::vector<int> labels;
  const auto d = two_blobs(65, 40, labels);
  TsneParams params;
  params.perplexity = 15.0;
  params.seed = 7;
  params.threads = 2;
  TsneTrace trace;
  const auto emb = tsne_embed(d, params, &trace);
  ASSERT_EQ(emb.coords.size(), 80u);
  EXPECT_GT(silhouette_score(emb.coords, labels), 0.5);
  EXPECT_GE(same_label_neighbor_rate(emb.coords, labels), 0.95);

  double kl_250 = -1.0;
  for (const auto& [iter, kl] : trace.kl) {
    if (iter == 250) kl_250 = kl;
  }
  ASSERT_GE(kl_250, 0.0);
  ASSERT_EQ(trace.kl.back().first, 1000);
  EXPECT_LT(trace.kl.back().second, kl_250);
}

TEST(Tsne, SameSeedIsBitIdentical) {
  std::vector<int> labels;
  const auto d = two_blobs(66, 15, labels);
  TsneParams params;
  params.perplexity = 5.0;
  params.iterations = 300;
  params.seed = 42;
  params.threads = 1;
  const auto a = tsne_embed(d, params);
  params.threads = 3;
  const auto b = tsne_embed(d, params);
  EXPECT_EQ(a.coords, b.coords);
  params.seed = 43;
  EXPECT_NE(tsne_embed(d, params).coords, a.coords);
}

TEST(Tsne, Errors) {
  Rng rng(67);
  const auto small = random_distance_matrix_fixture(rng, 2);
  try {
    tsne_embed(small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_small);
  }
  TsneParams params;
  params.perplexity = 9.0;
  try {
    tsne_embed(random_distance_matrix_fixture(rng, 10), params);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
  params.perplexity = 2.0;
  params.iterations = 0;
  EXPECT_THROW(tsne_embed(random_distance_matrix_fixture(rng, 10), params), Error);
}

TEST(Silhouette, HandValues) {
  const std::vector<std::array<double, 2>> pts{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
  // a = 1, b = mean(10, sqrt(101)) for each point.
  const double b = (10.0 + std::sqrt(101.0)) / 2.0;
  EXPECT_NEAR(silhouette_score(pts, {0, 0, 1, 1}), (b - 1.0) / b, 1e-12);
  EXPECT_DOUBLE_EQ(same_label_neighbor_rate(pts, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(same_label_neighbor_rate(pts, {0, 1, 0, 1}), 0.0);
}

TEST(Embedding, CsvLayout) {
  Embedding2D emb{{"a", "b,c"}, {{{0.5, -1.25}}, {{3.0, 0.0}}}};
  std::ostringstream out;
  write_embedding(out, emb);
  EXPECT_EQ(out.str(), "company_id,x,y\na,0.5,-1.25\n\"b,c\",3,0\n");
}
