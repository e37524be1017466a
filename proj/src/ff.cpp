#include "ffal/ff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace ffal {

namespace {

struct Best {
  double value = -1.0;
  Index index = std::numeric_limits<Index>::max();
  std::size_t slot = 0;
  bool found = false;
};

// Larger value wins; equal values go to the lower dataset index.
bool beats(double value, Index index, const Best& best) {
  if (!best.found) return true;
  if (value > best.value) return true;
  return value == best.value && index < best.index;
}

template <typename Fn>
void for_each_shard(std::size_t count, const ScanOptions& opts, Fn&& fn) {
  const std::size_t by_size = opts.min_shard == 0 ? count : count / opts.min_shard;
  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(opts.threads, by_size));
  if (shards <= 1) {
    fn(std::size_t{0}, count, std::size_t{0});
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(shards - 1);
  const std::size_t step = (count + shards - 1) / shards;
  for (std::size_t s = 1; s < shards; ++s) {
    const std::size_t begin = std::min(count, s * step);
    const std::size_t end = std::min(count, begin + step);
    workers.emplace_back([&fn, begin, end, s] { fn(begin, end, s); });
  }
  fn(std::size_t{0}, std::min(count, step), std::size_t{0});
}

// Incremental greedy max-min selection over a fixed candidate list.
class FarthestFirstScanner {
 public:
  FarthestFirstScanner(const EmbeddingDataset& ds, std::vector<Index> candidates, std::vector<double> mindist,
                       const ScanOptions& opts)
      : ds_(ds), candidates_(std::move(candidates)), mindist_(std::move(mindist)),
        alive_(candidates_.size(), 1), opts_(opts) {}

  std::size_t remaining() const noexcept { return remaining_count_; }

  void init_remaining() { remaining_count_ = candidates_.size(); }

  std::pair<Index, double> pick() {
    std::vector<Best> shard_best(std::max(1u, opts_.threads));
    for_each_shard(candidates_.size(), opts_, [&](std::size_t begin, std::size_t end, std::size_t shard) {
      Best best;
      for (std::size_t s = begin; s < end; ++s) {
        if (!alive_[s]) continue;
        if (beats(mindist_[s], candidates_[s], best)) best = Best{mindist_[s], candidates_[s], s, true};
      }
      shard_best[shard] = best;
    });
    Best best;
    for (const Best& b : shard_best) {
      if (b.found && beats(b.value, b.index, best)) best = b;
    }
    alive_[best.slot] = 0;
    --remaining_count_;
    const auto chosen = ds_.row(best.index);
    for_each_shard(candidates_.size(), opts_, [&](std::size_t begin, std::size_t end, std::size_t) {
      for (std::size_t s = begin; s < end; ++s) {
        if (!alive_[s]) continue;
        mindist_[s] = std::min(mindist_[s], squared_distance(ds_.row(candidates_[s]), chosen));
      }
    });
    return {best.index, best.value};
  }

 private:
  const EmbeddingDataset& ds_;
  std::vector<Index> candidates_;
  std::vector<double> mindist_;
  std::vector<char> alive_;
  ScanOptions opts_;
  std::size_t remaining_count_ = 0;
};

void check_index(const EmbeddingDataset& ds, Index i, const char* what) {
  if (i >= ds.n) throw Error(ErrorCode::InvalidArgument, std::string(what) + " index out of range: " + std::to_string(i));
}

}  // namespace

TraversalResult ff_traverse(const EmbeddingDataset& ds, std::span<const Index> candidates,
                            std::span<const Index> seeds, std::size_t count, const ScanOptions& opts) {
  std::vector<char> is_seed(ds.n, 0);
  std::vector<char> is_candidate(ds.n, 0);
  for (Index s : seeds) {
    check_index(ds, s, "seed");
    is_seed[s] = 1;
  }
  std::vector<Index> pool;
  pool.reserve(candidates.size());
  for (Index c : candidates) {
    check_index(ds, c, "candidate");
    if (is_seed[c] || is_candidate[c]) continue;
    is_candidate[c] = 1;
    pool.push_back(c);
  }
  if (count > pool.size()) {
    throw Error(ErrorCode::ExhaustedCandidates, "exhausted candidates: requested " + std::to_string(count) +
                                                    ", available " + std::to_string(pool.size()));
  }

  std::vector<double> mindist(pool.size(), std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < pool.size(); ++p) {
    auto row = ds.row(pool[p]);
    for (Index s : seeds) mindist[p] = std::min(mindist[p], squared_distance(row, ds.row(s)));
  }

  FarthestFirstScanner scanner(ds, std::move(pool), std::move(mindist), opts);
  scanner.init_remaining();
  TraversalResult result;
  result.order.reserve(count);
  result.gaps.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    auto [index, gap] = scanner.pick();
    result.order.push_back(index);
    result.gaps.push_back(gap);
  }
  return result;
}

Coreset ff_compress_seeded(const EmbeddingDataset& ds, std::size_t c, std::span<const Index> class_seeds,
                           const ScanOptions& opts) {
  require_labels(ds, "ff_compress");
  const std::size_t k = ds.k;
  if (k == 0) throw Error(ErrorCode::TooFewClasses, "ff_compress: dataset has no classes");
  if (c < k) throw Error(ErrorCode::InvalidArgument, "ff_compress: target size " + std::to_string(c) +
                                                         " is smaller than class count " + std::to_string(k));
  if (class_seeds.size() != k) throw Error(ErrorCode::InvalidArgument, "ff_compress: need one seed per class");
  const std::size_t quota = c / k;

  std::vector<std::vector<Index>> members(k);
  for (Index i = 0; i < ds.n; ++i) members[ds.label(i)].push_back(i);
  for (std::size_t cls = 0; cls < k; ++cls) {
    if (members[cls].size() < quota) {
      throw Error(ErrorCode::InfeasibleQuota, "class " + std::to_string(cls) + " has " +
                                                  std::to_string(members[cls].size()) +
                                                  " members, quota is " + std::to_string(quota));
    }
  }

  Coreset out;
  out.per_class.resize(k);
  for (std::size_t cls = 0; cls < k; ++cls) {
    const Index seed = class_seeds[cls];
    check_index(ds, seed, "class seed");
    if (ds.label(seed) != cls) {
      throw Error(ErrorCode::InvalidArgument, "seed " + std::to_string(seed) + " is not in class " + std::to_string(cls));
    }
    const Index seeds[] = {seed};
    auto traversal = ff_traverse(ds, members[cls], seeds, quota - 1, opts);
    auto& coreset = out.per_class[cls];
    coreset.push_back(seed);
    coreset.insert(coreset.end(), traversal.order.begin(), traversal.order.end());
    out.flattened.insert(out.flattened.end(), coreset.begin(), coreset.end());
  }
  return out;
}

Coreset ff_compress(const EmbeddingDataset& ds, std::size_t c, Rng& rng, const ScanOptions& opts) {
  require_labels(ds, "ff_compress");
  std::vector<std::vector<Index>> members(ds.k);
  for (Index i = 0; i < ds.n; ++i) members[ds.label(i)].push_back(i);
  std::vector<Index> seeds(ds.k);
  for (std::size_t cls = 0; cls < ds.k; ++cls) {
    if (members[cls].empty()) {
      throw Error(ErrorCode::InfeasibleQuota, "class " + std::to_string(cls) + " has no members");
    }
    seeds[cls] = members[cls][rng.uniform_index(members[cls].size())];
  }
  return ff_compress_seeded(ds, c, seeds, opts);
}

std::vector<Index> ff_active_batch(const EmbeddingDataset& ds, const PoolState& state, std::size_t b,
                                   const ScanOptions& opts) {
  if (b == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
  if (state.pool().empty()) throw Error(ErrorCode::PoolExhausted, "pool exhausted");
  const std::size_t count = std::min(b, state.pool().size());
  FarthestFirstScanner scanner(ds, state.pool(), state.mindist(), opts);
  scanner.init_remaining();
  std::vector<Index> batch;
  batch.reserve(count);
  for (std::size_t t = 0; t < count; ++t) batch.push_back(scanner.pick().first);
  return batch;
}

double kcenter_radius(const EmbeddingDataset& ds, std::span<const Index> centers, std::span<const Index> over) {
  if (centers.empty()) throw Error(ErrorCode::EmptyCenters, "kcenter_radius: empty center set");
  double worst = 0.0;
  for (Index i : over) {
    check_index(ds, i, "point");
    double nearest = std::numeric_limits<double>::infinity();
    for (Index c : centers) {
      check_index(ds, c, "center");
      nearest = std::min(nearest, squared_distance(ds.row(i), ds.row(c)));
    }
    worst = std::max(worst, nearest);
  }
  return std::sqrt(worst);
}

double kcenter_optimal_radius(const EmbeddingDataset& ds, std::span<const Index> points, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::EmptyCenters, "kcenter_optimal_radius: k must be positive");
  if (k >= points.size()) return 0.0;
  // Lexicographic walk over k-combinations of positions in `points`.
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  std::vector<Index> centers(k);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = points.size();
  while (true) {
    for (std::size_t i = 0; i < k; ++i) centers[i] = points[pick[i]];
    best = std::min(best, kcenter_radius(ds, centers, points));
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

std::vector<KCenterInstance> run_kcenter_suite(const KCenterSuiteConfig& cfg) {
  if (cfg.max_k < 2 || cfg.max_n <= cfg.max_k || cfg.max_d < 1) {
    throw Error(ErrorCode::InvalidArgument, "kcenter suite needs max_k >= 2, max_n > max_k, max_d >= 1");
  }
  Rng rng(cfg.seed);
  std::vector<KCenterInstance> out;
  out.reserve(cfg.instances);
  for (std::size_t t = 0; t < cfg.instances; ++t) {
    KCenterInstance inst;
    inst.k = 2 + rng.uniform_index(cfg.max_k - 1);
    inst.n = inst.k + 1 + rng.uniform_index(cfg.max_n - inst.k);
    inst.d = 1 + rng.uniform_index(cfg.max_d);
    EmbeddingDataset ds;
    ds.n = inst.n;
    ds.d = inst.d;
    ds.values.resize(inst.n * inst.d);
    for (std::size_t i = 0; i < inst.n; ++i) {
      // Occasional duplicate rows exercise the tie-break path.
      if (i > 0 && rng.uniform01() < 0.15) {
        const std::size_t src = rng.uniform_index(i);
        std::copy_n(ds.values.begin() + static_cast<std::ptrdiff_t>(src * inst.d), inst.d,
                    ds.values.begin() + static_cast<std::ptrdiff_t>(i * inst.d));
      } else {
        for (std::size_t j = 0; j < inst.d; ++j) ds.values[i * inst.d + j] = static_cast<float>(rng.uniform(-1.0, 1.0));
      }
    }
    std::vector<Index> all(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) all[i] = i;
    const Index first = rng.uniform_index(inst.n);
    const Index seeds[] = {first};
    auto traversal = ff_traverse(ds, all, seeds, inst.k - 1);
    std::vector<Index> centers{first};
    centers.insert(centers.end(), traversal.order.begin(), traversal.order.end());
    inst.ff_radius = kcenter_radius(ds, centers, all);
    inst.optimal_radius = kcenter_optimal_radius(ds, all, inst.k);
    if (inst.optimal_radius > 0.0) {
      inst.ratio = inst.ff_radius / inst.optimal_radius;
    } else {
      inst.ratio = inst.ff_radius == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    out.push_back(inst);
  }
  return out;
}

}  // namespace ffal
