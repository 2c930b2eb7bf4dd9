#include <gtest/gtest.h>

#include "semsum/random.hpp"
#include "semsum/vectorspace.hpp"

using namespace semsum;

namespace {

EmbeddingVector random_vector(Rng& rng, Eigen::Index dim) {
  EmbeddingVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal(0.0, 1.0);
  return v;
}

}  // namespace

TEST(Cosine, SelfSimilarityIsExactlyOne) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto v = random_vector(rng, 1 + static_cast<Eigen::Index>(rng.below(64)));
    EXPECT_EQ(cosine_similarity(v, v), 1.0);
  }
}

TEST(Cosine, SymmetricAndBounded) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.below(32));
    const auto a = random_vector(rng, dim);
    const auto b = random_vector(rng, dim);
    const double ab = cosine_similarity(a, b);
    EXPECT_EQ(ab, cosine_similarity(b, a));
    EXPECT_GE(ab, -1.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(Cosine, ScaleInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_vector(rng, 16);
    const auto b = random_vector(rng, 16);
    const double k = 0.01 + rng.uniform() * 100.0;
    EXPECT_NEAR(cosine_similarity(a, b), cosine_similarity(EmbeddingVector(a * k), b), 1e-12);
  }
}

TEST(Cosine, OppositeVectorsScoreMinusOne) {
  EmbeddingVector a(3);
  a << 1.0, 2.0, 3.0;
  EXPECT_DOUBLE_EQ(cosine_similarity(a, EmbeddingVector(-a)), -1.0);
}

TEST(Cosine, Errors) {
  EmbeddingVector a = EmbeddingVector::Ones(3);
  EXPECT_THROW(cosine_similarity(a, EmbeddingVector::Zero(3)), DegenerateVectorError);
  EXPECT_THROW(cosine_similarity(a, EmbeddingVector::Ones(4)), DimensionError);
}

TEST(Normalize, UnitNormAndDegenerate) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    EXPECT_TRUE(is_normalized(normalize(random_vector(rng, 64))));
  }
  EXPECT_THROW(normalize(EmbeddingVector::Zero(4)), DegenerateVectorError);
  EXPECT_TRUE(is_zero(EmbeddingVector::Zero(4)));
}

TEST(CheckEmbedding, RejectsNonFinite) {
  EmbeddingVector v = EmbeddingVector::Ones(3);
  v[1] = std::nan("");
  EXPECT_THROW(check_embedding(v), Error);
  EXPECT_THROW(check_embedding(EmbeddingVector(0)), DimensionError);
}
