#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ffal/cli.hpp"
#include "ffal/dataio.hpp"

using namespace ffal;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ffal_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Rng rng(42);
    auto all = gen_three_gaussians(60, rng);
    std::vector<Index> init_rows{0, 25}, pool_rows;
    for (Index i = 0; i < all.n; ++i) {
      if (i != 0 && i != 25) pool_rows.push_back(i);
    }
    save_embeddings(all.subset(pool_rows), path("pool.ffal"));
    save_embeddings(all.subset(init_rows), path("init.ffal"));
    save_embeddings(gen_three_gaussians(45, rng), path("test.ffal"));
    save_csv_embeddings(all, path("train.csv"));
  }

  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::vector<std::string> active_args(const std::string& strategy, const std::string& out) {
    return {"active", "--pool", path("pool.ffal"), "--init", path("init.ffal"), "--test", path("test.ffal"),
            "--strategy", strategy, "--batch", "2", "--budget", "6", "--epochs", "80", "--seed", "3",
            "--out", path(out)};
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, ActiveWritesCurveAndManifest) {
  ASSERT_EQ(run(active_args("ff", "ff.csv")), cli::kExitOk) << err_.str();
  auto rows = lines(slurp(path("ff.csv")));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "round,labeled_count,test_accuracy,strategy,seed");
  for (int r = 0; r <= 3; ++r) EXPECT_EQ(rows[1 + r].substr(0, rows[1 + r].find(',', 2)), std::to_string(r) + "," + std::to_string(2 + 2 * r));
  EXPECT_NE(rows[1].find(",ff,3"), std::string::npos);

  auto manifest = slurp(path("ff.csv.manifest"));
  for (const char* key : {"command=active", "version=", "strategy=ff", "batch=2", "budget=6", "learner=logistic",
                          "representation=static", "seed=3", "digest.pool=", "digest.init=", "digest.test="}) {
    EXPECT_NE(manifest.find(key), std::string::npos) << key;
  }
}

TEST_F(CliTest, ActiveIsByteIdenticalAcrossRunsAndFromManifest) {
  for (const std::string strategy : {"ff", "sr", "random"}) {
    ASSERT_EQ(run(active_args(strategy, "a.csv")), 0) << err_.str();
    ASSERT_EQ(run(active_args(strategy, "b.csv")), 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv"))) << strategy;

    fs::rename(path("a.csv"), path("first.csv"));
    ASSERT_EQ(run({"active", "--config", path("a.csv.manifest")}), 0) << err_.str();
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("first.csv"))) << strategy;
  }
}

TEST_F(CliTest, ConfigValuesYieldToFlags) {
  ASSERT_EQ(run(active_args("ff", "a.csv")), 0);
  ASSERT_EQ(run({"active", "--config", path("a.csv.manifest"), "--strategy", "random", "--out", path("c.csv")}), 0)
      << err_.str();
  auto rows = lines(slurp(path("c.csv")));
  EXPECT_NE(rows[1].find(",random,"), std::string::npos);
  // A stop rule on the command line replaces the config's budget.
  ASSERT_EQ(run({"active", "--config", path("a.csv.manifest"), "--epsilon", "0", "--out", path("d.csv")}), 0)
      << err_.str();
  EXPECT_EQ(lines(slurp(path("d.csv"))).size(), 2u);
}

TEST_F(CliTest, ActiveUsageErrors) {
  auto both = active_args("ff", "x.csv");
  both.insert(both.end(), {"--epsilon", "0.1"});
  EXPECT_EQ(run(both), cli::kExitUsage);

  auto neither = active_args("ff", "x.csv");
  neither.erase(std::find(neither.begin(), neither.end(), "--budget"), std::find(neither.begin(), neither.end(), "--budget") + 2);
  EXPECT_EQ(run(neither), cli::kExitUsage);

  auto missing = active_args("ff", "x.csv");
  missing[2] = path("nope.ffal");
  EXPECT_EQ(run(missing), cli::kExitUsage);

  auto bad_strategy = active_args("entropy", "x.csv");
  EXPECT_EQ(run(bad_strategy), cli::kExitUsage);

  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitUsage);
  EXPECT_EQ(run({"active", "--config", path("missing.cfg")}), cli::kExitUsage);
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
}

TEST_F(CliTest, ActiveRuntimeErrorExitsOne) {
  auto args = active_args("ff", "x.csv");
  args.insert(args.end(), {"--representation", "model"});  // logistic has no hidden layer
  EXPECT_EQ(run(args), cli::kExitRuntime);
  EXPECT_NE(err_.str().find("error:"), std::string::npos);
}

TEST_F(CliTest, CompressFullSizeListsEveryIndex) {
  // 60 rows: 40 of class 1, 20 of class 0; balanced input needed for c = n.
  Rng rng(1);
  auto balanced = gen_clustered(40, 3, 2, 1, 3.0, rng);
  save_embeddings(balanced, path("balanced.ffal"));
  ASSERT_EQ(run({"compress", "--train", path("balanced.ffal"), "--target-size", "40", "--seed", "2", "--out",
                 path("idx.txt")}),
            0)
      << err_.str();
  auto rows = lines(slurp(path("idx.txt")));
  ASSERT_EQ(rows.size(), 40u);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i], std::to_string(i));
}

TEST_F(CliTest, CompressTargetKAndReport) {
  ASSERT_EQ(run({"compress", "--train", path("train.csv"), "--target-size", "2", "--out", path("idx.txt"), "--eval",
                 path("test.ffal"), "--epochs", "50"}),
            0)
      << err_.str();
  EXPECT_EQ(lines(slurp(path("idx.txt"))).size(), 2u);
  auto report = slurp(path("idx.txt.report"));
  for (const char* key : {"accuracy_full=", "accuracy_ffcomp=", "accuracy_random_c="}) {
    EXPECT_NE(report.find(key), std::string::npos);
  }
}

TEST_F(CliTest, CompressErrors) {
  EXPECT_EQ(run({"compress", "--target-size", "2", "--out", path("idx.txt")}), cli::kExitUsage);
  EXPECT_EQ(run({"compress", "--train", path("train.csv"), "--target-size", "50", "--out", path("idx.txt")}),
            cli::kExitRuntime);
  EXPECT_NE(err_.str().find("class 0"), std::string::npos) << err_.str();
}

TEST_F(CliTest, Demo2dDefaultShape) {
  ASSERT_EQ(run({"demo2d", "--seed", "4", "--out", path("demo.csv")}), 0) << err_.str();
  auto rows = lines(slurp(path("demo.csv")));
  ASSERT_EQ(rows.size(), 1u + 3u * 31u);
  std::size_t ff = 0, sr = 0, random = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ff += rows[i].find(",ff,") != std::string::npos;
    sr += rows[i].find(",sr,") != std::string::npos;
    random += rows[i].find(",random,") != std::string::npos;
  }
  EXPECT_EQ(ff, 31u);
  EXPECT_EQ(sr, 31u);
  EXPECT_EQ(random, 31u);

  ASSERT_EQ(run({"demo2d", "--seed", "5", "--out", path("demo5.csv")}), 0);
  auto other = lines(slurp(path("demo5.csv")));
  std::size_t differing = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) differing += rows[i].substr(0, rows[i].rfind(',')) != other[i].substr(0, other[i].rfind(','));
  EXPECT_GT(differing, 0u);
  EXPECT_EQ(run({"demo2d", "--n", "2", "--out", path("bad.csv")}), cli::kExitRuntime);
}

TEST_F(CliTest, KCenterCheck) {
  EXPECT_EQ(run({"kcenter-check"}), 0) << out_.str();
  EXPECT_NE(out_.str().find("PASS instances=50 violations=0"), std::string::npos);

  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(run({"kcenter-check", "--max-n", "4", "--max-k", "2"}), 0);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);

  std::istringstream in(out_.str());
  for (std::string line; std::getline(in, line);) {
    const auto at = line.find(" ratio=");
    if (at == std::string::npos) continue;
    EXPECT_GE(std::stod(line.substr(at + 7)), 1.0);
  }
  EXPECT_EQ(run({"kcenter-check", "--max-k", "1"}), cli::kExitUsage);
}

TEST(ParseKeyValues, SkipsCommentsAndTrims) {
  std::istringstream in("# comment\n\n a = 1 \nb=two\n");
  auto kv = cli::parse_key_values(in);
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv["a"], "1");
  EXPECT_EQ(kv["b"], "two");
  std::istringstream bad("novalue\n");
  EXPECT_THROW(cli::parse_key_values(bad), Error);
}
