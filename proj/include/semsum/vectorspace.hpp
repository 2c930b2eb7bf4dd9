#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "semsum/error.hpp"

namespace semsum {

template <typename Scalar>
using Embedding = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using EmbeddingVector = Embedding<double>;
/// Storage precision of cache keys (matches the snapshot wire format).
using StoredEmbedding = Embedding<float>;

inline constexpr double kUnitNormTolerance = 1e-9;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

template <typename Derived>
double squared_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.template cast<double>().squaredNorm();
}

template <typename Derived>
bool is_zero(const Eigen::MatrixBase<Derived>& v) {
  return squared_norm(v) == 0.0;
}

template <typename Derived>
bool is_normalized(const Eigen::MatrixBase<Derived>& v) {
  return std::abs(std::sqrt(squared_norm(v)) - 1.0) <= kUnitNormTolerance;
}

/// Throws unless `v` is a usable embedding: dim >= 1 and every value finite.
template <typename Derived>
void check_embedding(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() < 1) throw DimensionError("embedding must have dim >= 1");
  if (!all_finite(v)) throw Error("embedding contains NaN or infinite values");
}

inline void check_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw DimensionError("dimension mismatch: " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

/// Cosine similarity accumulated in double precision, clamped to [-1, 1].
///
/// Evaluated as dot / sqrt(|a|^2 |b|^2) so that equal inputs score exactly 1.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  check_same_dim(a.size(), b.size());
  const auto ad = a.template cast<double>();
  const auto bd = b.template cast<double>();
  const double aa = ad.dot(ad);
  const double bb = bd.dot(bd);
  if (aa == 0.0 || bb == 0.0) {
    throw DegenerateVectorError("cosine similarity of a zero vector");
  }
  const double c = ad.dot(bd) / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

template <typename Derived>
Embedding<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const double n = std::sqrt(squared_norm(a));
  if (n == 0.0) throw DegenerateVectorError("cannot normalize a zero vector");
  return (a.template cast<double>() / n).template cast<Scalar>();
}

}  // namespace semsum
