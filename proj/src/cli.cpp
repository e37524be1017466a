#include "ffal/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ffal/dataio.hpp"
#include "ffal/ff.hpp"
#include "ffal/session.hpp"

namespace ffal::cli {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool manifest_only(std::string_view key) {
  return key == "version" || key == "command" || key == "config" || key.starts_with("digest.");
}

bool has_flag(const std::vector<std::string>& args, std::string_view key) {
  const std::string flag = "--" + std::string(key);
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.starts_with(flag + "=");
  });
}

// Learner flags shared by several subcommands.
struct LearnerFlags {
  std::string kind;
  std::size_t hidden = 16;
  double lr = 0.1;
  std::size_t epochs = 2000;
  double l2 = 1e-4;

  void add(CLI::App& app, std::string default_kind) {
    kind = std::move(default_kind);
    app.add_option("--learner", kind, "logistic | mlp")->check(CLI::IsMember({"logistic", "mlp"}))->capture_default_str();
    app.add_option("--hidden", hidden, "mlp hidden units")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--lr", lr, "learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--epochs", epochs, "full-batch gradient steps")->capture_default_str();
    app.add_option("--l2", l2, "weight decay")->check(CLI::NonNegativeNumber)->capture_default_str();
  }

  LearnerConfig config() const {
    LearnerConfig cfg;
    cfg.kind = *parse_learner(kind);
    cfg.hidden_units = hidden;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.l2 = l2;
    return cfg;
  }

  void write(std::ostream& m) const {
    m << "learner=" << kind << '\n'
      << "hidden=" << hidden << '\n'
      << "lr=" << format_double(lr) << '\n'
      << "epochs=" << epochs << '\n'
      << "l2=" << format_double(l2) << '\n';
  }
};

class Manifest {
 public:
  Manifest(std::string_view command) {
    body_ << "command=" << command << '\n' << "version=" << kToolVersion << '\n';
  }

  std::ostream& body() { return body_; }

  void digest(std::string_view key, const std::string& path) {
    digests_ << "digest." << key << '=' << format_hash(content_hash(read_file_bytes(path))) << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << body_.str() << digests_.str();
  }

 private:
  std::ostringstream body_;
  std::ostringstream digests_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

// --------------------------------------------------------------------------

struct ActiveCommand {
  std::string pool, init, test, strategy, out, representation;
  std::size_t batch = 1;
  std::optional<std::size_t> budget;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  LearnerFlags learner;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("active", "Run an active-learning session and write its learning curve");
    cmd->add_option("--pool", pool, "pool embeddings (labels hidden until queried)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--init", init, "initial labeled embeddings")->required()->check(CLI::ExistingFile);
    cmd->add_option("--test", test, "labeled test embeddings")->required()->check(CLI::ExistingFile);
    cmd->add_option("--strategy", strategy, "ff | sr | random")->required()->check(CLI::IsMember({"ff", "sr", "random"}));
    cmd->add_option("--batch", batch, "queries per round")->required()->check(CLI::PositiveNumber);
    auto* b = cmd->add_option("--budget", budget, "total label budget")->check(CLI::NonNegativeNumber);
    auto* e = cmd->add_option("--epsilon", epsilon, "target accuracy gain")->check(CLI::Range(0.0, 1.0));
    b->excludes(e);
    learner.add(*cmd, "logistic");
    cmd->add_option("--representation", representation, "static | model (default: model for mlp)")
        ->check(CLI::IsMember({"static", "model"}));
    cmd->add_option("--seed", seed, "session seed")->capture_default_str();
    cmd->add_option("--threads", threads, "threads for the FF scan")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--out", out, "results CSV path")->required();
    cmd->callback([this, cmd] {
      if (!budget && !epsilon) throw CLI::RequiredError(cmd->get_name() + ": one of --budget or --epsilon");
    });
    cmd_ = cmd;
  }

  int run(std::ostream& log) {
    SessionConfig cfg;
    cfg.strategy = *parse_strategy(strategy);
    cfg.batch = batch;
    cfg.budget = budget;
    cfg.epsilon = epsilon;
    cfg.learner = learner.config();
    cfg.seed = seed;
    if (representation.empty()) representation = learner.kind == "mlp" ? "model" : "static";
    cfg.representation = *parse_representation(representation);
    cfg.scan.threads = threads;

    const auto pool_ds = load_any(pool);
    const auto init_ds = load_any(init);
    const auto test_ds = load_any(test);
    const auto record = run_session(pool_ds, init_ds, test_ds, cfg);

    std::ostringstream csv;
    write_results_csv(to_result_rows(record), csv);
    write_text(out, csv.str());

    Manifest manifest("active");
    auto& m = manifest.body();
    m << "pool=" << pool << '\n' << "init=" << init << '\n' << "test=" << test << '\n'
      << "strategy=" << strategy << '\n' << "batch=" << batch << '\n';
    if (budget) m << "budget=" << *budget << '\n';
    if (epsilon) m << "epsilon=" << format_double(*epsilon) << '\n';
    learner.write(m);
    m << "representation=" << representation << '\n' << "seed=" << seed << '\n' << "out=" << out << '\n';
    manifest.digest("pool", pool);
    manifest.digest("init", init);
    manifest.digest("test", test);
    manifest.save(out + ".manifest");

    log << "status=" << to_string(record.status) << " rounds=" << record.rounds.size() - 1
        << " labels_used=" << record.n_used << " final_accuracy=" << format_double(record.rounds.back().test_accuracy)
        << '\n';
    return kExitOk;
  }

  CLI::App* cmd_ = nullptr;
};

struct CompressCommand {
  std::string train, out, eval;
  std::size_t target = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  LearnerFlags learner;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("compress", "Stratified farthest-first compression of a labeled set");
    cmd->add_option("--train", train, "labeled embeddings")->required()->check(CLI::ExistingFile);
    cmd->add_option("--target-size", target, "target coreset size c")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "seed for the per-class random starts")->capture_default_str();
    cmd->add_option("--out", out, "index file (one index per line, ascending)")->required();
    cmd->add_option("--eval", eval, "labeled test set; also trains full / coreset / random models")
        ->check(CLI::ExistingFile);
    cmd->add_option("--threads", threads, "threads for the FF scan")->check(CLI::PositiveNumber)->capture_default_str();
    learner.add(*cmd, "logistic");
    cmd_ = cmd;
  }

  int run(std::ostream& log) {
    const auto train_ds = load_any(train);
    ScanOptions scan;
    scan.threads = threads;
    Rng rng(seed);

    std::vector<Index> coreset;
    std::optional<CompressionReport> report;
    if (eval.empty()) {
      coreset = ff_compress(train_ds, target, rng, scan).flattened;
      std::sort(coreset.begin(), coreset.end());
    } else {
      const auto test_ds = load_any(eval);
      auto cfg = learner.config();
      cfg.init_seed = derive_seed(seed, kLearnerStream);
      report = run_compression_eval(train_ds, test_ds, target, cfg, rng, scan);
      coreset = report->coreset;
    }

    std::ostringstream idx;
    for (Index i : coreset) idx << i << '\n';
    write_text(out, idx.str());

    Manifest manifest("compress");
    auto& m = manifest.body();
    m << "train=" << train << '\n' << "target-size=" << target << '\n' << "seed=" << seed << '\n';
    if (!eval.empty()) {
      m << "eval=" << eval << '\n';
      learner.write(m);
    }
    m << "out=" << out << '\n';
    manifest.digest("train", train);
    if (!eval.empty()) manifest.digest("eval", eval);
    manifest.save(out + ".manifest");

    log << "selected=" << coreset.size() << '\n';
    if (report) {
      std::ostringstream r;
      r << "coreset_size=" << coreset.size() << '\n'
        << "accuracy_full=" << format_double(report->accuracy_full) << '\n'
        << "accuracy_ffcomp=" << format_double(report->accuracy_ffcomp) << '\n'
        << "accuracy_random_c=" << format_double(report->accuracy_random_c) << '\n';
      write_text(out + ".report", r.str());
      log << r.str();
    }
    return kExitOk;
  }

  CLI::App* cmd_ = nullptr;
};

struct Demo2dCommand {
  std::size_t n = 200;
  std::size_t queries = 30;
  std::uint64_t seed = 0;
  std::string out;
  LearnerFlags learner;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("demo2d", "FF vs SR vs random on the three-Gaussian problem");
    cmd->add_option("--n", n, "pool size")->capture_default_str();
    cmd->add_option("--queries", queries, "single-point query rounds")->capture_default_str();
    cmd->add_option("--seed", seed, "seed")->capture_default_str();
    cmd->add_option("--out", out, "results CSV path")->required();
    learner.add(*cmd, "mlp");
    cmd_ = cmd;
  }

  int run(std::ostream& log) {
    Demo2dConfig cfg;
    cfg.n = n;
    cfg.queries = queries;
    cfg.seed = seed;
    cfg.learner = learner.config();
    const auto result = run_demo2d(cfg);

    std::vector<ResultRow> rows;
    for (const auto& s : result.sessions) {
      auto r = to_result_rows(s);
      rows.insert(rows.end(), r.begin(), r.end());
      const auto reached = rounds_to_accuracy(s, 0.95);
      log << to_string(s.strategy) << ": final_accuracy=" << format_double(s.rounds.back().test_accuracy)
          << " queries_to_0.95=" << (reached ? std::to_string(*reached) : std::string("never")) << '\n';
    }
    std::ostringstream csv;
    write_results_csv(rows, csv);
    write_text(out, csv.str());

    Manifest manifest("demo2d");
    manifest.body() << "n=" << n << '\n' << "queries=" << queries << '\n' << "seed=" << seed << '\n';
    learner.write(manifest.body());
    manifest.body() << "out=" << out << '\n';
    manifest.save(out + ".manifest");
    return kExitOk;
  }

  CLI::App* cmd_ = nullptr;
};

struct KCenterCommand {
  KCenterSuiteConfig cfg;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("kcenter-check", "Check the FF k-center 2-approximation against brute force");
    cmd->add_option("--instances", cfg.instances, "random instances")->capture_default_str();
    cmd->add_option("--max-n", cfg.max_n, "largest instance size")->capture_default_str();
    cmd->add_option("--max-k", cfg.max_k, "largest center count (>= 2)")->capture_default_str();
    cmd->add_option("--max-d", cfg.max_d, "largest dimension")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "seed")->capture_default_str();
    cmd_ = cmd;
  }

  int run(std::ostream& log) {
    if (cfg.max_k < 2 || cfg.max_n <= cfg.max_k || cfg.max_d < 1) {
      throw CLI::ValidationError("kcenter-check", "needs --max-k >= 2, --max-n > --max-k and --max-d >= 1");
    }
    const auto results = run_kcenter_suite(cfg);
    std::size_t violations = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      log << "instance " << i << " n=" << r.n << " d=" << r.d << " k=" << r.k << " ff_radius=" << format_double(r.ff_radius)
          << " optimal_radius=" << format_double(r.optimal_radius) << " ratio=" << format_double(r.ratio) << '\n';
      worst = std::max(worst, r.ratio);
      if (r.ratio > 2.0) ++violations;
    }
    log << (violations == 0 ? "PASS" : "FAIL") << " instances=" << results.size() << " violations=" << violations
        << " worst_ratio=" << format_double(worst) << '\n';
    return violations == 0 ? kExitOk : kExitRuntime;
  }

  CLI::App* cmd_ = nullptr;
};

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::Parse, "config line without '=': " + std::string(text));
    kv[std::string(trim(text.substr(0, eq)))] = std::string(trim(text.substr(eq + 1)));
  }
  return kv;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file path");
      config_path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!config_path) return kept;

  std::ifstream in(*config_path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + *config_path);
  std::map<std::string, std::string> kv;
  try {
    kv = parse_key_values(in);
  } catch (const Error& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  // A budget or epsilon flag on the command line overrides both config keys.
  const bool cli_stop_rule = has_flag(kept, "budget") || has_flag(kept, "epsilon");

  std::vector<std::string> injected;
  for (const auto& [key, value] : kv) {
    if (manifest_only(key) || has_flag(kept, key)) continue;
    if (cli_stop_rule && (key == "budget" || key == "epsilon")) continue;
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  // Insert after the subcommand so the options bind to it.
  const auto at = kept.empty() ? kept.end() : kept.begin() + 1;
  kept.insert(at, injected.begin(), injected.end());
  return kept;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Farthest-first coreset active learning over embeddings", "ffal"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.add_option("--config", "key=value file merged under explicit flags");

  ActiveCommand active;
  CompressCommand compress;
  Demo2dCommand demo;
  KCenterCommand kcenter;
  active.add(app);
  compress.add(app);
  demo.add(app);
  kcenter.add(app);

  try {
    auto merged = merge_config(args);
    std::reverse(merged.begin(), merged.end());
    app.parse(merged);
    if (active.cmd_->parsed()) return active.run(out);
    if (compress.cmd_->parsed()) return compress.run(out);
    if (demo.cmd_->parsed()) return demo.run(out);
    if (kcenter.cmd_->parsed()) return kcenter.run(out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace ffal::cli
