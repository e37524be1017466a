#include "ffal/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ffal/pool_state.hpp"

namespace ffal {

std::string_view to_string(RepresentationSource source) noexcept {
  return source == RepresentationSource::Model ? "model" : "static";
}

std::optional<RepresentationSource> parse_representation(std::string_view name) noexcept {
  if (name == "static") return RepresentationSource::Static;
  if (name == "model") return RepresentationSource::Model;
  return std::nullopt;
}

std::string_view to_string(TerminalStatus status) noexcept {
  switch (status) {
    case TerminalStatus::BudgetExhausted: return "budget_exhausted";
    case TerminalStatus::EpsilonReached: return "epsilon_reached";
    case TerminalStatus::PoolExhausted: return "pool_exhausted";
  }
  return "unknown";
}

void SessionConfig::validate() const {
  if (budget.has_value() == epsilon.has_value()) {
    throw Error(ErrorCode::InvalidConfig, "exactly one of budget and epsilon must be set");
  }
  if (batch == 0) throw Error(ErrorCode::InvalidConfig, "batch size must be at least 1");
  if (epsilon && !(*epsilon >= 0.0 && *epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must lie in [0, 1]");
  }
  if (representation == RepresentationSource::Model && learner.kind != LearnerKind::Mlp) {
    throw Error(ErrorCode::InvalidConfig, "representation=model requires the mlp learner");
  }
  learner.validate();
}

std::uint64_t round_learner_seed(std::uint64_t seed, std::size_t round) noexcept {
  return derive_seed(derive_seed(seed, kLearnerStream), round);
}

std::vector<ResultRow> to_result_rows(const SessionRecord& record) {
  std::vector<ResultRow> rows;
  rows.reserve(record.rounds.size());
  for (const auto& r : record.rounds) {
    rows.push_back({r.round, r.labeled_count, r.test_accuracy, std::string(to_string(record.strategy)), record.seed});
  }
  return rows;
}

namespace {

// Sole holder of the pool's labels; every read is reported.
class LabelOracle {
 public:
  LabelOracle(const EmbeddingDataset& pool, const SessionObserver& observer) : pool_(pool), observer_(observer) {}

  Label reveal(Index pool_row) const {
    if (observer_.on_label_read) observer_.on_label_read(pool_row);
    return pool_.label(pool_row);
  }

 private:
  const EmbeddingDataset& pool_;
  const SessionObserver& observer_;
};

class ActiveSession {
 public:
  ActiveSession(const EmbeddingDataset& pool, const EmbeddingDataset& init, const EmbeddingDataset& test,
                const SessionConfig& cfg, const SessionObserver& observer)
      : cfg_(cfg), test_(test), observer_(observer), oracle_(pool, observer), m_(init.n),
        strategy_rng_(derive_seed(cfg.seed, kStrategyStream)) {
    cfg.validate();
    require_valid(pool);
    require_valid(init);
    require_valid(test);
    require_labels(pool, "pool (hidden labels)");
    require_labels(init, "initial labeled set");
    require_labels(test, "test set");
    if (pool.d != init.d || test.d != init.d) throw Error(ErrorCode::DimensionMismatch, "dimension mismatch between inputs");
    classes_ = std::max({pool.k, init.k, test.k});

    // Rows [0, m) are the initial labeled set, rows [m, m + u) the pool.
    working_ = concat_rows(init.without_labels(), pool.without_labels());
    labels_.assign(working_.n, 0);
    known_.assign(working_.n, 0);
    for (Index i = 0; i < m_; ++i) {
      labels_[i] = init.label(i);
      known_[i] = 1;
    }
    std::vector<Index> labeled(m_);
    std::vector<Index> unlabeled(pool.n);
    for (Index i = 0; i < m_; ++i) labeled[i] = i;
    for (Index i = 0; i < pool.n; ++i) unlabeled[i] = m_ + i;
    state_.emplace(working_, std::move(labeled), std::move(unlabeled));
  }

  SessionRecord run() {
    SessionRecord record;
    record.strategy = cfg_.strategy;
    record.seed = cfg_.seed;

    auto started = std::chrono::steady_clock::now();
    retrain(0);
    double accuracy = evaluate_accuracy(model_, test_).accuracy;
    record.rounds.push_back({0, state_->labeled().size(), accuracy, seconds_since(started)});
    if (cfg_.epsilon) record.target_accuracy = accuracy + *cfg_.epsilon;

    std::size_t revealed = 0;
    for (std::size_t round = 1;; ++round) {
      if (cfg_.budget && revealed >= *cfg_.budget) {
        record.status = TerminalStatus::BudgetExhausted;
        break;
      }
      if (record.target_accuracy && accuracy >= *record.target_accuracy - 1e-12) {
        record.status = TerminalStatus::EpsilonReached;
        break;
      }
      if (state_->pool().empty()) {
        record.status = TerminalStatus::PoolExhausted;
        break;
      }
      started = std::chrono::steady_clock::now();
      std::size_t b = std::min(cfg_.batch, state_->pool().size());
      if (cfg_.budget) b = std::min(b, *cfg_.budget - revealed);

      const auto picks = query(b);
      if (observer_.on_query) {
        std::vector<Index> pool_rows;
        pool_rows.reserve(picks.size());
        for (Index p : picks) pool_rows.push_back(p - m_);
        observer_.on_query(round, pool_rows);
      }
      for (Index p : picks) {
        labels_[p] = oracle_.reveal(p - m_);
        known_[p] = 1;
      }
      state_->commit(space(), picks);
      revealed += picks.size();

      retrain(round);
      accuracy = evaluate_accuracy(model_, test_).accuracy;
      record.rounds.push_back({round, state_->labeled().size(), accuracy, seconds_since(started)});
    }
    record.n_used = revealed;
    return record;
  }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  }

  const EmbeddingDataset& space() const {
    return cfg_.representation == RepresentationSource::Model ? representation_ : working_;
  }

  std::vector<Index> query(std::size_t b) {
    switch (cfg_.strategy) {
      case StrategyKind::FarthestFirst:
        return query_ff(space(), *state_, b, cfg_.scan);
      case StrategyKind::SoftmaxResponse: {
        auto pool_rows = working_.subset(state_->pool());
        return query_softmax_response(*state_, predict_proba(model_, pool_rows), b);
      }
      case StrategyKind::Random:
        return query_random(*state_, b, strategy_rng_);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown strategy");
  }

  // Training rows in ascending working-set order, so the fit does not depend
  // on the order in which labels arrived.
  void retrain(std::size_t round) {
    std::vector<Index> rows;
    rows.reserve(state_->labeled().size());
    for (Index i = 0; i < working_.n; ++i) {
      if (known_[i]) rows.push_back(i);
    }
    EmbeddingDataset train = working_.subset(rows);
    train.labels.emplace();
    train.labels->reserve(rows.size());
    for (Index i : rows) train.labels->push_back(labels_[i]);
    train.k = classes_;

    LearnerConfig learner = cfg_.learner;
    learner.init_seed = round_learner_seed(cfg_.seed, round);
    model_ = fit(train, learner);

    if (cfg_.representation == RepresentationSource::Model) {
      representation_ = extract_representation(model_, working_);
      state_->rebuild_cache(representation_);
    }
  }

  const SessionConfig& cfg_;
  const EmbeddingDataset& test_;
  const SessionObserver& observer_;
  LabelOracle oracle_;
  std::size_t m_;
  Rng strategy_rng_;
  Label classes_ = 0;
  EmbeddingDataset working_;
  EmbeddingDataset representation_;
  std::vector<Label> labels_;
  std::vector<char> known_;
  std::optional<PoolState> state_;
  Model model_;
};

}  // namespace

SessionRecord run_budget_constrained(const EmbeddingDataset& pool, const EmbeddingDataset& init,
                                     const EmbeddingDataset& test, const SessionConfig& cfg,
                                     const SessionObserver& observer) {
  if (!cfg.budget) throw Error(ErrorCode::InvalidConfig, "budget-constrained session needs a budget");
  return ActiveSession(pool, init, test, cfg, observer).run();
}

SessionRecord run_error_reduction(const EmbeddingDataset& pool, const EmbeddingDataset& init,
                                  const EmbeddingDataset& test, const SessionConfig& cfg,
                                  const SessionObserver& observer) {
  if (!cfg.epsilon) throw Error(ErrorCode::InvalidConfig, "error-reduction session needs epsilon");
  return ActiveSession(pool, init, test, cfg, observer).run();
}

SessionRecord run_session(const EmbeddingDataset& pool, const EmbeddingDataset& init, const EmbeddingDataset& test,
                          const SessionConfig& cfg, const SessionObserver& observer) {
  return ActiveSession(pool, init, test, cfg, observer).run();
}

CompressionReport run_compression_eval(const EmbeddingDataset& train, const EmbeddingDataset& test, std::size_t c,
                                       const LearnerConfig& learner, Rng& rng, const ScanOptions& scan) {
  require_labels(train, "compression training set");
  require_labels(test, "compression test set");
  CompressionReport report;
  report.coreset = ff_compress(train, c, rng, scan).flattened;
  std::sort(report.coreset.begin(), report.coreset.end());
  report.random_subset = rng.sample_without_replacement(train.n, report.coreset.size());
  std::sort(report.random_subset.begin(), report.random_subset.end());

  report.accuracy_full = evaluate_accuracy(fit(train, learner), test).accuracy;
  report.accuracy_ffcomp = evaluate_accuracy(fit(train.subset(report.coreset), learner), test).accuracy;
  report.accuracy_random_c = evaluate_accuracy(fit(train.subset(report.random_subset), learner), test).accuracy;
  return report;
}

namespace {

constexpr std::uint64_t kDemoPoolStream = 11;
constexpr std::uint64_t kDemoTestStream = 12;
constexpr std::uint64_t kDemoInitStream = 13;

}  // namespace

Demo2dResult run_demo2d(const Demo2dConfig& cfg) {
  if (cfg.n < 3) throw Error(ErrorCode::InvalidArgument, "demo needs n >= 3");
  Rng pool_rng(derive_seed(cfg.seed, kDemoPoolStream));
  Rng test_rng(derive_seed(cfg.seed, kDemoTestStream));
  Rng init_rng(derive_seed(cfg.seed, kDemoInitStream));
  const EmbeddingDataset all = gen_three_gaussians(cfg.n, pool_rng);
  const EmbeddingDataset test = gen_three_gaussians(cfg.n, test_rng);

  std::vector<std::vector<Index>> members(all.k);
  for (Index i = 0; i < all.n; ++i) members[all.label(i)].push_back(i);
  std::vector<Index> init_rows;
  for (const auto& m : members) init_rows.push_back(m[init_rng.uniform_index(m.size())]);
  std::sort(init_rows.begin(), init_rows.end());
  std::vector<Index> pool_rows;
  for (Index i = 0; i < all.n; ++i) {
    if (!std::binary_search(init_rows.begin(), init_rows.end(), i)) pool_rows.push_back(i);
  }
  const EmbeddingDataset init = all.subset(init_rows);
  const EmbeddingDataset pool = all.subset(pool_rows);

  Demo2dResult result;
  for (StrategyKind kind : {StrategyKind::FarthestFirst, StrategyKind::SoftmaxResponse, StrategyKind::Random}) {
    SessionConfig session;
    session.strategy = kind;
    session.batch = 1;
    session.budget = cfg.queries;
    session.learner = cfg.learner;
    session.seed = cfg.seed;
    session.representation = cfg.representation;
    result.sessions.push_back(run_budget_constrained(pool, init, test, session));
  }
  return result;
}

std::optional<std::size_t> rounds_to_accuracy(const SessionRecord& record, double threshold) {
  for (const auto& r : record.rounds) {
    if (r.test_accuracy >= threshold) return r.round;
  }
  return std::nullopt;
}

}  // namespace ffal
