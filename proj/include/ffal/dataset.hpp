#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffal/error.hpp"

namespace ffal {

using Index = std::size_t;
using Label = std::uint32_t;

/// n rows of d-dimensional embeddings, row-major, with optional class labels.
///
/// Plain aggregate so that malformed instances can be represented and
/// reported by validate_dataset(); use make_dataset() for checked construction.
struct EmbeddingDataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<float> values;
  std::optional<std::vector<Label>> labels;
  Label k = 0;  // class count, meaningful iff labels present

  bool has_labels() const noexcept { return labels.has_value(); }

  std::span<const float> row(Index i) const noexcept {
    return {values.data() + i * d, d};
  }
  std::span<float> row(Index i) noexcept { return {values.data() + i * d, d}; }

  Label label(Index i) const { return (*labels)[i]; }

  /// Rows in the given order; labels and k carried when present.
  EmbeddingDataset subset(std::span<const Index> rows) const;
  /// Same vectors, labels removed.
  EmbeddingDataset without_labels() const;

  friend bool operator==(const EmbeddingDataset&, const EmbeddingDataset&) = default;
};

EmbeddingDataset make_dataset(std::size_t n, std::size_t d, std::vector<float> values);
EmbeddingDataset make_dataset(std::size_t n, std::size_t d, std::vector<float> values,
                              std::vector<Label> labels, Label k);

/// Stacks rows of `a` above rows of `b`. Labels kept only if both carry them.
EmbeddingDataset concat_rows(const EmbeddingDataset& a, const EmbeddingDataset& b);

/// Sum of squared coordinate differences, accumulated in double.
double squared_distance(std::span<const float> u, std::span<const float> v);
double squared_distance(std::span<const double> u, std::span<const double> v);

struct ValidationReport {
  bool ok = true;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::size_t row = 0;
  std::string message;

  explicit operator bool() const noexcept { return ok; }
};

/// Checks every dataset invariant and reports the first violation.
ValidationReport validate_dataset(const EmbeddingDataset& ds);
/// Throws Error carrying the first violation.
void require_valid(const EmbeddingDataset& ds);
void require_labels(const EmbeddingDataset& ds, std::string_view what);

}  // namespace ffal
