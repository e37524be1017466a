#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ffal/dataio.hpp"
#include "ffal/dataset.hpp"
#include "ffal/ff.hpp"
#include "ffal/learner.hpp"
#include "ffal/strategies.hpp"

namespace ffal {

/// Which vectors FF distances are measured in.
enum class RepresentationSource {
  Static,  ///< the ingested embeddings
  Model,   ///< hidden activations of the most recently trained mlp
};

std::string_view to_string(RepresentationSource source) noexcept;
std::optional<RepresentationSource> parse_representation(std::string_view name) noexcept;

struct SessionConfig {
  StrategyKind strategy = StrategyKind::FarthestFirst;
  std::size_t batch = 1;
  std::optional<std::size_t> budget;
  std::optional<double> epsilon;
  /// init_seed is replaced each round by a seed derived from (seed, round).
  LearnerConfig learner;
  std::uint64_t seed = 0;
  RepresentationSource representation = RepresentationSource::Static;
  ScanOptions scan;

  void validate() const;
};

enum class TerminalStatus { BudgetExhausted, EpsilonReached, PoolExhausted };
std::string_view to_string(TerminalStatus status) noexcept;

struct RoundEntry {
  std::size_t round = 0;
  std::size_t labeled_count = 0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct SessionRecord {
  StrategyKind strategy = StrategyKind::FarthestFirst;
  std::uint64_t seed = 0;
  std::vector<RoundEntry> rounds;
  TerminalStatus status = TerminalStatus::BudgetExhausted;
  /// Pool labels revealed over the whole session.
  std::size_t n_used = 0;
  /// accuracy(f_0) + epsilon in the error-reduction variant.
  std::optional<double> target_accuracy;
};

std::vector<ResultRow> to_result_rows(const SessionRecord& record);

/// Instrumentation points. on_query fires after a strategy returns and before
/// any of its picks are revealed; on_label_read fires for every pool label the
/// session reads (pool row index, relative to the pool dataset).
struct SessionObserver {
  std::function<void(std::size_t round, std::span<const Index> pool_rows)> on_query;
  std::function<void(Index pool_row)> on_label_read;
};

/// Stream ids for derive_seed(); the learner and strategy draw from separate streams.
inline constexpr std::uint64_t kLearnerStream = 1;
inline constexpr std::uint64_t kStrategyStream = 2;

/// Learner seed for round t of a session seeded with `seed`.
std::uint64_t round_learner_seed(std::uint64_t seed, std::size_t round) noexcept;

/// Long-tail session with a label budget. `pool` labels stay hidden until a
/// strategy selects the row; `init` is the initial labeled set.
SessionRecord run_budget_constrained(const EmbeddingDataset& pool, const EmbeddingDataset& init,
                                     const EmbeddingDataset& test, const SessionConfig& cfg,
                                     const SessionObserver& observer = {});

/// Queries until test accuracy reaches accuracy(f_0) + epsilon or the pool runs out.
SessionRecord run_error_reduction(const EmbeddingDataset& pool, const EmbeddingDataset& init,
                                  const EmbeddingDataset& test, const SessionConfig& cfg,
                                  const SessionObserver& observer = {});

/// Dispatches on which of budget / epsilon is set.
SessionRecord run_session(const EmbeddingDataset& pool, const EmbeddingDataset& init, const EmbeddingDataset& test,
                          const SessionConfig& cfg, const SessionObserver& observer = {});

struct CompressionReport {
  double accuracy_full = 0.0;
  double accuracy_ffcomp = 0.0;
  double accuracy_random_c = 0.0;
  /// Both subsets sorted ascending, size k * floor(c / k).
  std::vector<Index> coreset;
  std::vector<Index> random_subset;
};

/// Trains on the full set, the FF coreset and a same-size uniform subset with
/// identical learner settings and evaluates each on `test`.
CompressionReport run_compression_eval(const EmbeddingDataset& train, const EmbeddingDataset& test, std::size_t c,
                                       const LearnerConfig& learner, Rng& rng, const ScanOptions& scan = {});

struct Demo2dConfig {
  std::size_t n = 200;
  std::size_t queries = 30;
  std::uint64_t seed = 0;
  LearnerConfig learner{LearnerKind::Mlp, 16, 0.1, 2000, 1e-4, 0};
  /// Space for FF distances; Model requires the mlp learner.
  RepresentationSource representation = RepresentationSource::Model;
};

struct Demo2dResult {
  /// One record per strategy, in the order ff, sr, random.
  std::vector<SessionRecord> sessions;
};

/// Three-Gaussian problem: one random labeled point per class, the remaining
/// rows as the pool, an independent test sample of the same size, one query per
/// round with distances in the current mlp's hidden space.
Demo2dResult run_demo2d(const Demo2dConfig& cfg);

/// First round whose accuracy is at least `threshold`, if any.
std::optional<std::size_t> rounds_to_accuracy(const SessionRecord& record, double threshold);

}  // namespace ffal
