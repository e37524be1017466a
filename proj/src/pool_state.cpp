#include "ffal/pool_state.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace ffal {

PoolState::PoolState(const EmbeddingDataset& space, std::vector<Index> labeled, std::vector<Index> pool)
    : labeled_(std::move(labeled)), pool_(std::move(pool)) {
  std::vector<char> seen(space.n, 0);
  auto mark = [&](Index i, const char* set) {
    if (i >= space.n) throw Error(ErrorCode::InvalidArgument, std::string(set) + " index out of range: " + std::to_string(i));
    if (seen[i]) throw Error(ErrorCode::InvalidArgument, "index " + std::to_string(i) + " appears twice in labeled/pool");
    seen[i] = 1;
  };
  for (Index i : labeled_) mark(i, "labeled");
  for (Index i : pool_) mark(i, "pool");
  rebuild_cache(space);
}

void PoolState::rebuild_cache(const EmbeddingDataset& space) {
  mindist_.assign(pool_.size(), std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < pool_.size(); ++p) {
    auto row = space.row(pool_[p]);
    double best = mindist_[p];
    for (Index l : labeled_) best = std::min(best, squared_distance(row, space.row(l)));
    mindist_[p] = best;
  }
}

void PoolState::commit(const EmbeddingDataset& space, std::span<const Index> selected) {
  std::vector<char> chosen(space.n, 0);
  for (Index s : selected) {
    if (s >= space.n || chosen[s]) throw Error(ErrorCode::InvalidArgument, "commit: invalid or duplicate index");
    chosen[s] = 1;
  }
  std::vector<Index> kept;
  std::vector<double> kept_dist;
  kept.reserve(pool_.size());
  kept_dist.reserve(pool_.size());
  std::size_t found = 0;
  for (std::size_t p = 0; p < pool_.size(); ++p) {
    if (chosen[pool_[p]]) {
      ++found;
      continue;
    }
    double best = mindist_[p];
    auto row = space.row(pool_[p]);
    for (Index s : selected) best = std::min(best, squared_distance(row, space.row(s)));
    kept.push_back(pool_[p]);
    kept_dist.push_back(best);
  }
  if (found != selected.size()) throw Error(ErrorCode::InvalidArgument, "commit: index not in pool");
  pool_ = std::move(kept);
  mindist_ = std::move(kept_dist);
  labeled_.insert(labeled_.end(), selected.begin(), selected.end());
  ++round_;
}

}  // namespace ffal
