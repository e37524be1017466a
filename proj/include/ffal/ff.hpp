#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ffal/dataset.hpp"
#include "ffal/pool_state.hpp"
#include "ffal/rng.hpp"

namespace ffal {

/// Controls sharding of the argmax-min scan. Results never depend on these.
struct ScanOptions {
  unsigned threads = 1;
  /// Candidates per shard below which the scan stays on the calling thread.
  std::size_t min_shard = 8192;
};

struct TraversalResult {
  std::vector<Index> order;
  /// Squared max-min distance of each pick at the moment it was chosen.
  std::vector<double> gaps;
};

struct Coreset {
  std::vector<std::vector<Index>> per_class;
  /// Concatenation of per_class in class order.
  std::vector<Index> flattened;
};

/// Greedy farthest-first traversal of `candidates` against `seeds`.
///
/// Each pick maximizes the squared distance to its nearest member of
/// seeds ∪ earlier picks; ties go to the lowest dataset index. Candidates that
/// are also seeds are skipped. With no seeds the first pick has gap +inf.
TraversalResult ff_traverse(const EmbeddingDataset& ds, std::span<const Index> candidates,
                            std::span<const Index> seeds, std::size_t count,
                            const ScanOptions& opts = {});

/// Stratified farthest-first compression to k * floor(c / k) rows.
///
/// For every class a uniformly random seed row starts the class coreset and
/// floor(c / k) - 1 further picks are made by FF traversal within that class.
Coreset ff_compress(const EmbeddingDataset& ds, std::size_t c, Rng& rng, const ScanOptions& opts = {});

/// ff_compress with the per-class seed rows supplied (one per class, in class order).
Coreset ff_compress_seeded(const EmbeddingDataset& ds, std::size_t c, std::span<const Index> class_seeds,
                           const ScanOptions& opts = {});

/// One FF-Active batch: min(b, |pool|) pool rows chosen sequentially against
/// labeled ∪ already-chosen. Reads only vectors and the state's cache.
std::vector<Index> ff_active_batch(const EmbeddingDataset& ds, const PoolState& state, std::size_t b,
                                   const ScanOptions& opts = {});

/// max over `over` of the Euclidean (not squared) distance to the nearest center.
double kcenter_radius(const EmbeddingDataset& ds, std::span<const Index> centers, std::span<const Index> over);

/// Exact k-center radius by enumerating every k-subset of `points` as centers.
double kcenter_optimal_radius(const EmbeddingDataset& ds, std::span<const Index> points, std::size_t k);

struct KCenterInstance {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  double ff_radius = 0.0;
  double optimal_radius = 0.0;
  double ratio = 1.0;
};

struct KCenterSuiteConfig {
  std::size_t instances = 50;
  std::size_t max_n = 12;
  std::size_t max_k = 4;
  std::size_t max_d = 3;
  std::uint64_t seed = 0;
};

/// Random small instances comparing FF k-center radius against the brute-force optimum.
std::vector<KCenterInstance> run_kcenter_suite(const KCenterSuiteConfig& cfg);

}  // namespace ffal
