#include "ffal/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffal/rng.hpp"

namespace ffal {

std::string_view to_string(LearnerKind kind) noexcept {
  return kind == LearnerKind::Mlp ? "mlp" : "logistic";
}

std::optional<LearnerKind> parse_learner(std::string_view name) noexcept {
  if (name == "logistic") return LearnerKind::Logistic;
  if (name == "mlp") return LearnerKind::Mlp;
  return std::nullopt;
}

void LearnerConfig::validate() const {
  if (kind == LearnerKind::Mlp && hidden_units == 0) throw Error(ErrorCode::InvalidConfig, "hidden_units must be positive");
  if (!std::isfinite(learning_rate) || learning_rate <= 0.0) throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive and finite");
  if (!std::isfinite(l2) || l2 < 0.0) throw Error(ErrorCode::InvalidConfig, "l2 must be nonnegative and finite");
}

namespace {

struct Layout {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

Layout layout_of(LearnerKind kind, std::size_t d, std::size_t h, std::size_t k) {
  Layout l;
  if (kind == LearnerKind::Logistic) {
    l.w1 = 0;
    l.b1 = d * k;
    l.total = d * k + k;
  } else {
    l.w1 = 0;
    l.b1 = d * h;
    l.w2 = l.b1 + h;
    l.b2 = l.w2 + h * k;
    l.total = l.b2 + k;
  }
  return l;
}

Layout layout_of(const Model& m) { return layout_of(m.kind, m.input_dim, m.hidden, m.classes); }

void check_input(const Model& model, const EmbeddingDataset& ds) {
  if (ds.d != model.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "dimension mismatch: model expects " + std::to_string(model.input_dim) +
                                                  ", data has " + std::to_string(ds.d));
  }
}

// out[c] = bias[c] + sum_j in[j] * w[j * cols + c]
template <typename In>
void affine(std::span<const In> in, const double* w, const double* bias, std::size_t cols, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = bias[c];
  for (std::size_t j = 0; j < in.size(); ++j) {
    const double x = static_cast<double>(in[j]);
    if (x == 0.0) continue;
    const double* wr = w + j * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += x * wr[c];
  }
}

// Per-example forward pass. `hidden` holds post-activation values for the mlp.
struct Forward {
  std::vector<double> hidden;
  std::vector<double> logits;

  explicit Forward(const Model& m) : hidden(m.hidden), logits(m.classes) {}

  void run(const Model& m, const Layout& l, std::span<const float> x) {
    const double* p = m.params.data();
    if (m.kind == LearnerKind::Logistic) {
      affine(x, p + l.w1, p + l.b1, m.classes, logits.data());
      return;
    }
    affine(x, p + l.w1, p + l.b1, m.hidden, hidden.data());
    for (double& a : hidden) a = std::max(a, 0.0);
    affine(std::span<const double>(hidden), p + l.w2, p + l.b2, m.classes, logits.data());
  }
};

// In-place softmax; returns log-sum-exp of the input logits.
double softmax_inplace(std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - top);
    sum += x;
  }
  for (double& x : v) x /= sum;
  return top + std::log(sum);
}

double weight_penalty(const Model& m, const Layout& l, double l2) {
  if (l2 == 0.0) return 0.0;
  double sq = 0.0;
  auto add = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) sq += m.params[i] * m.params[i];
  };
  if (m.kind == LearnerKind::Logistic) {
    add(l.w1, l.b1);
  } else {
    add(l.w1, l.b1);
    add(l.w2, l.b2);
  }
  return 0.5 * l2 * sq;
}

void require_trainable(const Model& model, const EmbeddingDataset& train) {
  require_labels(train, "training");
  if (train.n == 0) throw Error(ErrorCode::EmptyTrainingSet, "empty training set");
  check_input(model, train);
  if (train.k > model.classes) throw Error(ErrorCode::ShapeMismatch, "training labels exceed model class count");
}

}  // namespace

std::size_t Model::parameter_count() const noexcept { return layout_of(*this).total; }

Model make_model(LearnerKind kind, std::size_t input_dim, std::size_t hidden, std::size_t classes) {
  Model m;
  m.kind = kind;
  m.input_dim = input_dim;
  m.hidden = kind == LearnerKind::Mlp ? hidden : 0;
  m.classes = classes;
  m.params.assign(layout_of(m).total, 0.0);
  return m;
}

Model init_model(LearnerKind kind, std::size_t input_dim, std::size_t hidden, std::size_t classes,
                 std::uint64_t seed) {
  Model m = make_model(kind, input_dim, hidden, classes);
  const Layout l = layout_of(m);
  Rng rng(seed);
  auto fill = [&](std::size_t begin, std::size_t end, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (std::size_t i = begin; i < end; ++i) m.params[i] = rng.uniform(-scale, scale);
  };
  if (kind == LearnerKind::Logistic) {
    fill(l.w1, l.b1, input_dim);
  } else {
    fill(l.w1, l.b1, input_dim);
    fill(l.w2, l.b2, m.hidden);
  }
  return m;
}

LossGradient loss_and_gradient(const Model& model, const EmbeddingDataset& train, double l2) {
  require_trainable(model, train);
  const Layout l = layout_of(model);
  const std::size_t k = model.classes;
  const std::size_t h = model.hidden;
  const std::size_t d = model.input_dim;
  LossGradient out;
  out.gradient.assign(l.total, 0.0);
  double* g = out.gradient.data();
  const double* p = model.params.data();
  const double inv_n = 1.0 / static_cast<double>(train.n);

  Forward fwd(model);
  std::vector<double> dhidden(h);
  double loss_sum = 0.0;
  for (Index i = 0; i < train.n; ++i) {
    auto x = train.row(i);
    fwd.run(model, l, x);
    const Label y = train.label(i);
    const double logit_y = fwd.logits[y];
    loss_sum += softmax_inplace(fwd.logits) - logit_y;
    std::vector<double>& dlogits = fwd.logits;  // now probabilities
    dlogits[y] -= 1.0;
    for (double& v : dlogits) v *= inv_n;

    if (model.kind == LearnerKind::Logistic) {
      for (std::size_t j = 0; j < d; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        double* gw = g + l.w1 + j * k;
        for (std::size_t c = 0; c < k; ++c) gw[c] += xj * dlogits[c];
      }
      for (std::size_t c = 0; c < k; ++c) g[l.b1 + c] += dlogits[c];
      continue;
    }

    for (std::size_t u = 0; u < h; ++u) {
      const double a = fwd.hidden[u];
      double* gw = g + l.w2 + u * k;
      const double* w = p + l.w2 + u * k;
      double back = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        gw[c] += a * dlogits[c];
        back += w[c] * dlogits[c];
      }
      dhidden[u] = a > 0.0 ? back : 0.0;
    }
    for (std::size_t c = 0; c < k; ++c) g[l.b2 + c] += dlogits[c];
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      double* gw = g + l.w1 + j * h;
      for (std::size_t u = 0; u < h; ++u) gw[u] += xj * dhidden[u];
    }
    for (std::size_t u = 0; u < h; ++u) g[l.b1 + u] += dhidden[u];
  }

  out.loss = loss_sum * inv_n + weight_penalty(model, l, l2);
  if (l2 != 0.0) {
    auto decay = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) g[i] += l2 * p[i];
    };
    decay(l.w1, l.b1);
    if (model.kind == LearnerKind::Mlp) decay(l.w2, l.b2);
  }
  return out;
}

double objective(const Model& model, const EmbeddingDataset& train, double l2) {
  require_trainable(model, train);
  const Layout l = layout_of(model);
  Forward fwd(model);
  double loss_sum = 0.0;
  for (Index i = 0; i < train.n; ++i) {
    fwd.run(model, l, train.row(i));
    const double logit_y = fwd.logits[train.label(i)];
    loss_sum += softmax_inplace(fwd.logits) - logit_y;
  }
  return loss_sum / static_cast<double>(train.n) + weight_penalty(model, l, l2);
}

Model fit(const EmbeddingDataset& train, const LearnerConfig& cfg) {
  cfg.validate();
  require_labels(train, "fit");
  if (train.n == 0) throw Error(ErrorCode::EmptyTrainingSet, "empty training set");
  if (train.k < 2) throw Error(ErrorCode::TooFewClasses, "fit needs k >= 2, got " + std::to_string(train.k));
  require_valid(train);

  Model model = init_model(cfg.kind, train.d, cfg.hidden_units, train.k, cfg.init_seed);
  model.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto step = loss_and_gradient(model, train, cfg.l2);
    if (!std::isfinite(step.loss)) {
      throw Error(ErrorCode::Diverged, "training diverged at epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(step.loss);
    for (std::size_t i = 0; i < model.params.size(); ++i) model.params[i] -= cfg.learning_rate * step.gradient[i];
    model.epochs_run = epoch + 1;
  }
  model.final_loss = objective(model, train, cfg.l2);
  if (!std::isfinite(model.final_loss) ||
      !std::all_of(model.params.begin(), model.params.end(), [](double w) { return std::isfinite(w); })) {
    throw Error(ErrorCode::Diverged, "training diverged: non-finite parameters");
  }
  return model;
}

ProbabilityMatrix predict_proba(const Model& model, const EmbeddingDataset& ds) {
  check_input(model, ds);
  const Layout l = layout_of(model);
  ProbabilityMatrix out;
  out.rows = ds.n;
  out.cols = model.classes;
  out.values.resize(ds.n * model.classes);
  Forward fwd(model);
  for (Index i = 0; i < ds.n; ++i) {
    fwd.run(model, l, ds.row(i));
    softmax_inplace(fwd.logits);
    std::copy(fwd.logits.begin(), fwd.logits.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * model.classes));
  }
  return out;
}

std::vector<Label> predict(const Model& model, const EmbeddingDataset& ds) {
  check_input(model, ds);
  const Layout l = layout_of(model);
  std::vector<Label> out(ds.n);
  Forward fwd(model);
  for (Index i = 0; i < ds.n; ++i) {
    fwd.run(model, l, ds.row(i));
    out[i] = static_cast<Label>(std::max_element(fwd.logits.begin(), fwd.logits.end()) - fwd.logits.begin());
  }
  return out;
}

EvaluationRecord evaluate_accuracy(const Model& model, const EmbeddingDataset& test) {
  require_labels(test, "evaluate_accuracy");
  if (test.n == 0) throw Error(ErrorCode::EmptyDataset, "empty evaluation set");
  auto predicted = predict(model, test);
  EvaluationRecord rec;
  rec.n_eval = test.n;
  for (Index i = 0; i < test.n; ++i) rec.correct += predicted[i] == test.label(i) ? 1 : 0;
  rec.accuracy = static_cast<double>(rec.correct) / static_cast<double>(rec.n_eval);
  return rec;
}

EmbeddingDataset extract_representation(const Model& model, const EmbeddingDataset& inputs) {
  if (model.kind != LearnerKind::Mlp) throw Error(ErrorCode::NoHiddenRepresentation, "no hidden representation");
  check_input(model, inputs);
  const Layout l = layout_of(model);
  EmbeddingDataset out;
  out.n = inputs.n;
  out.d = model.hidden;
  out.values.resize(inputs.n * model.hidden);
  out.labels = inputs.labels;
  out.k = inputs.k;
  Forward fwd(model);
  for (Index i = 0; i < inputs.n; ++i) {
    fwd.run(model, l, inputs.row(i));
    for (std::size_t u = 0; u < model.hidden; ++u) out.values[i * model.hidden + u] = static_cast<float>(fwd.hidden[u]);
  }
  return out;
}

}  // namespace ffal
