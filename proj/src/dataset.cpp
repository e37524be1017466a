#include "ffal/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace ffal {

EmbeddingDataset EmbeddingDataset::subset(std::span<const Index> rows) const {
  EmbeddingDataset out;
  out.n = rows.size();
  out.d = d;
  out.values.reserve(rows.size() * d);
  for (Index r : rows) {
    if (r >= n) throw Error(ErrorCode::InvalidArgument, "subset: row index out of range");
    auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  if (labels) {
    std::vector<Label> sub;
    sub.reserve(rows.size());
    for (Index r : rows) sub.push_back((*labels)[r]);
    out.labels = std::move(sub);
    out.k = k;
  }
  return out;
}

EmbeddingDataset EmbeddingDataset::without_labels() const {
  EmbeddingDataset out;
  out.n = n;
  out.d = d;
  out.values = values;
  return out;
}

EmbeddingDataset make_dataset(std::size_t n, std::size_t d, std::vector<float> values) {
  EmbeddingDataset ds;
  ds.n = n;
  ds.d = d;
  ds.values = std::move(values);
  require_valid(ds);
  return ds;
}

EmbeddingDataset make_dataset(std::size_t n, std::size_t d, std::vector<float> values,
                              std::vector<Label> labels, Label k) {
  EmbeddingDataset ds;
  ds.n = n;
  ds.d = d;
  ds.values = std::move(values);
  ds.labels = std::move(labels);
  ds.k = k;
  require_valid(ds);
  return ds;
}

EmbeddingDataset concat_rows(const EmbeddingDataset& a, const EmbeddingDataset& b) {
  if (a.d != b.d) throw Error(ErrorCode::DimensionMismatch, "dimension mismatch");
  EmbeddingDataset out;
  out.n = a.n + b.n;
  out.d = a.d;
  out.values = a.values;
  out.values.insert(out.values.end(), b.values.begin(), b.values.end());
  if (a.labels && b.labels) {
    out.labels = *a.labels;
    out.labels->insert(out.labels->end(), b.labels->begin(), b.labels->end());
    out.k = std::max(a.k, b.k);
  }
  return out;
}

double squared_distance(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    acc += diff * diff;
  }
  return acc;
}

double squared_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = u[i] - v[i];
    acc += diff * diff;
  }
  return acc;
}

namespace {

ValidationReport fail(ErrorCode code, std::size_t row, std::string message) {
  return ValidationReport{false, code, row, std::move(message)};
}

}  // namespace

ValidationReport validate_dataset(const EmbeddingDataset& ds) {
  if (ds.n == 0 || ds.d == 0) return fail(ErrorCode::EmptyDataset, 0, "dataset needs n >= 1 and d >= 1");
  if (ds.values.size() != ds.n * ds.d) {
    return fail(ErrorCode::ShapeMismatch, ds.values.size() / ds.d,
                "expected " + std::to_string(ds.n * ds.d) + " values, found " +
                    std::to_string(ds.values.size()));
  }
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (float x : ds.row(i)) {
      if (!std::isfinite(x)) return fail(ErrorCode::NonFinite, i, "non-finite value in row " + std::to_string(i));
    }
  }
  if (ds.labels) {
    if (ds.labels->size() != ds.n) {
      return fail(ErrorCode::ShapeMismatch, std::min(ds.labels->size(), ds.n),
                  "expected " + std::to_string(ds.n) + " labels, found " + std::to_string(ds.labels->size()));
    }
    for (std::size_t i = 0; i < ds.n; ++i) {
      if ((*ds.labels)[i] >= ds.k) {
        return fail(ErrorCode::LabelOutOfRange, i,
                    "label " + std::to_string((*ds.labels)[i]) + " in row " + std::to_string(i) +
                        " is not below k=" + std::to_string(ds.k));
      }
    }
  }
  return {};
}

void require_valid(const EmbeddingDataset& ds) {
  auto report = validate_dataset(ds);
  if (!report) throw Error(report.code, report.message);
}

void require_labels(const EmbeddingDataset& ds, std::string_view what) {
  if (!ds.has_labels()) throw Error(ErrorCode::MissingLabels, std::string(what) + " requires a labeled dataset");
}

}  // namespace ffal
