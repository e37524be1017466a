#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ffal/dataset.hpp"
#include "ffal/ff.hpp"
#include "ffal/pool_state.hpp"
#include "ffal/rng.hpp"

namespace ffal {

enum class StrategyKind { FarthestFirst, SoftmaxResponse, Random };

std::string_view to_string(StrategyKind kind) noexcept;
/// Accepts "ff", "sr" and "random".
std::optional<StrategyKind> parse_strategy(std::string_view name) noexcept;

/// Row-major |pool| x k class-probability matrix aligned with PoolState::pool().
struct ProbabilityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * cols, cols}; }
};

std::vector<Index> query_random(const PoolState& state, std::size_t b, Rng& rng);

/// Least-confidence selection: highest 1 - max_c p(i, c) first, ties by lower dataset index.
std::vector<Index> query_softmax_response(const PoolState& state, const ProbabilityMatrix& probabilities,
                                          std::size_t b);

std::vector<Index> query_ff(const EmbeddingDataset& ds, const PoolState& state, std::size_t b,
                            const ScanOptions& opts = {});

}  // namespace ffal
