#pragma once

#include <span>
#include <vector>

#include "ffal/dataset.hpp"

namespace ffal {

/// Partition of a shared dataset into a labeled set and an unlabeled pool,
/// with each pool row's squared distance to its nearest labeled row cached.
///
/// The dataset is passed to each mutating call instead of being stored, so the
/// same partition can be measured in a different representation space after
/// rebuild_cache(). Single writer.
class PoolState {
 public:
  PoolState(const EmbeddingDataset& space, std::vector<Index> labeled, std::vector<Index> pool);

  const std::vector<Index>& labeled() const noexcept { return labeled_; }
  const std::vector<Index>& pool() const noexcept { return pool_; }
  /// Cached min squared distance, aligned with pool(); +inf when labeled() is empty.
  const std::vector<double>& mindist() const noexcept { return mindist_; }
  std::size_t round() const noexcept { return round_; }

  /// Moves `selected` from the pool into the labeled set and advances the round.
  void commit(const EmbeddingDataset& space, std::span<const Index> selected);
  /// Recomputes every cached distance from scratch in `space`.
  void rebuild_cache(const EmbeddingDataset& space);

 private:
  std::vector<Index> labeled_;
  std::vector<Index> pool_;
  std::vector<double> mindist_;
  std::size_t round_ = 0;
};

}  // namespace ffal
