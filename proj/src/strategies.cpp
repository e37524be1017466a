#include "ffal/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ffal {

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::FarthestFirst: return "ff";
    case StrategyKind::SoftmaxResponse: return "sr";
    case StrategyKind::Random: return "random";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) noexcept {
  if (name == "ff") return StrategyKind::FarthestFirst;
  if (name == "sr") return StrategyKind::SoftmaxResponse;
  if (name == "random") return StrategyKind::Random;
  return std::nullopt;
}

namespace {

void require_batch(const PoolState& state, std::size_t b) {
  if (b == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
  if (state.pool().empty()) throw Error(ErrorCode::PoolExhausted, "pool exhausted");
}

}  // namespace

std::vector<Index> query_random(const PoolState& state, std::size_t b, Rng& rng) {
  require_batch(state, b);
  const auto& pool = state.pool();
  auto picks = rng.sample_without_replacement(pool.size(), std::min(b, pool.size()));
  std::vector<Index> out;
  out.reserve(picks.size());
  for (std::size_t p : picks) out.push_back(pool[p]);
  return out;
}

std::vector<Index> query_softmax_response(const PoolState& state, const ProbabilityMatrix& probabilities,
                                          std::size_t b) {
  require_batch(state, b);
  const auto& pool = state.pool();
  if (probabilities.rows != pool.size() || probabilities.cols == 0 ||
      probabilities.values.size() != probabilities.rows * probabilities.cols) {
    throw Error(ErrorCode::ShapeMismatch, "probability matrix is " + std::to_string(probabilities.rows) + "x" +
                                              std::to_string(probabilities.cols) + ", pool has " +
                                              std::to_string(pool.size()) + " rows");
  }
  std::vector<double> uncertainty(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto row = probabilities.row(i);
    double sum = 0.0;
    double top = 0.0;
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) throw Error(ErrorCode::NotNormalized, "row " + std::to_string(i) + " has an invalid probability");
      sum += p;
      top = std::max(top, p);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::NotNormalized, "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    uncertainty[i] = 1.0 - top;
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t count = std::min(b, pool.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t c) {
                      if (uncertainty[a] != uncertainty[c]) return uncertainty[a] > uncertainty[c];
                      return pool[a] < pool[c];
                    });
  std::vector<Index> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[order[i]]);
  return out;
}

std::vector<Index> query_ff(const EmbeddingDataset& ds, const PoolState& state, std::size_t b,
                            const ScanOptions& opts) {
  return ff_active_batch(ds, state, b, opts);
}

}  // namespace ffal
