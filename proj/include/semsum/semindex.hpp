#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "semsum/error.hpp"
#include "semsum/vectorspace.hpp"

namespace semsum {

using EntryId = std::uint64_t;

struct Match {
  EntryId entry_id = 0;
  double similarity = 0.0;
};

/// Exact best-above-threshold cosine index.
///
/// Entries live in one dim x capacity column-major block. Vectors are
/// normalized on insert and probes on query; similarity is accumulated in
/// double regardless of Scalar. Ties on similarity go to the most recent
/// insertion.
///
/// Thread-safety follows the standard library contract: any number of
/// concurrent const calls, or one mutating call at a time.
template <typename Scalar>
class SemIndex {
 public:
  using Vector = Embedding<Scalar>;

  explicit SemIndex(Eigen::Index dim) : dim_(dim) {
    if (dim < 1) throw DimensionError("index dimension must be >= 1");
  }

  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(EntryId id) const { return slot_of_.count(id) != 0; }

  /// Returns the insertion sequence number assigned to the entry.
  template <typename Derived>
  std::uint64_t insert(const Eigen::MatrixBase<Derived>& vector, EntryId id) {
    check_same_dim(vector.size(), dim_);
    check_embedding(vector);
    if (contains(id)) {
      throw DuplicateIdError("entry id " + std::to_string(id) + " already indexed");
    }
    const Vector unit = normalize(vector.template cast<Scalar>());

    const std::size_t slot = ids_.size();
    if (static_cast<Eigen::Index>(slot) >= vectors_.cols()) {
      const Eigen::Index grown = std::max<Eigen::Index>(16, vectors_.cols() * 2);
      vectors_.conservativeResize(dim_, grown);
    }
    vectors_.col(static_cast<Eigen::Index>(slot)) = unit;
    ids_.push_back(id);
    seqs_.push_back(next_seq_);
    sq_norms_.push_back(self_dot(unit.data()));
    slot_of_.emplace(id, slot);
    return next_seq_++;
  }

  bool remove(EntryId id) {
    const auto it = slot_of_.find(id);
    if (it == slot_of_.end()) return false;
    const std::size_t slot = it->second;
    const std::size_t last = ids_.size() - 1;
    if (slot != last) {
      vectors_.col(static_cast<Eigen::Index>(slot)) =
          vectors_.col(static_cast<Eigen::Index>(last));
      ids_[slot] = ids_[last];
      seqs_[slot] = seqs_[last];
      sq_norms_[slot] = sq_norms_[last];
      slot_of_[ids_[slot]] = slot;
    }
    ids_.pop_back();
    seqs_.pop_back();
    sq_norms_.pop_back();
    slot_of_.erase(it);
    return true;
  }

  template <typename Derived>
  std::optional<Match> query_best(const Eigen::MatrixBase<Derived>& probe,
                                  double threshold) const {
    check_same_dim(probe.size(), dim_);
    check_embedding(probe);
    if (ids_.empty()) return std::nullopt;

    const Vector unit = normalize(probe.template cast<Scalar>());
    const double probe_sq = self_dot(unit.data());

    std::size_t best_slot = 0;
    double best = -2.0;
    for (std::size_t slot = 0; slot < ids_.size(); ++slot) {
      const Scalar* column = vectors_.data() + static_cast<Eigen::Index>(slot) * dim_;
      double dot = 0.0;
      for (Eigen::Index k = 0; k < dim_; ++k) {
        dot += static_cast<double>(column[k]) * static_cast<double>(unit[k]);
      }
      const double sim = std::clamp(dot / std::sqrt(sq_norms_[slot] * probe_sq), -1.0, 1.0);
      if (sim > best || (sim == best && seqs_[slot] > seqs_[best_slot])) {
        best = sim;
        best_slot = slot;
      }
    }
    if (best < threshold) return std::nullopt;
    return Match{ids_[best_slot], best};
  }

  /// Stored (normalized) vector of an entry.
  Vector vector_of(EntryId id) const {
    const auto it = slot_of_.find(id);
    if (it == slot_of_.end()) throw Error("entry id " + std::to_string(id) + " not indexed");
    return vectors_.col(static_cast<Eigen::Index>(it->second));
  }

  void clear() {
    ids_.clear();
    seqs_.clear();
    sq_norms_.clear();
    slot_of_.clear();
  }

 private:
  // Fixed summation order: equal vectors always produce equal scores.
  double self_dot(const Scalar* v) const {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < dim_; ++k) {
      acc += static_cast<double>(v[k]) * static_cast<double>(v[k]);
    }
    return acc;
  }

  Eigen::Index dim_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors_;
  std::vector<EntryId> ids_;
  std::vector<std::uint64_t> seqs_;
  std::vector<double> sq_norms_;
  std::unordered_map<EntryId, std::size_t> slot_of_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace semsum
