#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ffal/dataio.hpp"
#include "ffal/learner.hpp"
#include "oracles.hpp"

using namespace ffal;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("ffal_test_" + name); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an ffal::Error";
  return ErrorCode::InvalidArgument;
}

bool bitwise_equal(const EmbeddingDataset& a, const EmbeddingDataset& b) {
  return a.n == b.n && a.d == b.d && a.labels == b.labels && a.k == b.k &&
         std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) == 0;
}

}  // namespace

TEST(ThreeGaussians, SizesAndSplit) {
  Rng rng(1);
  auto ds = gen_three_gaussians(200, rng);
  EXPECT_EQ(ds.n, 200u);
  EXPECT_EQ(ds.d, 2u);
  EXPECT_EQ(ds.k, 2u);
  const auto negatives = std::count(ds.labels->begin(), ds.labels->end(), 0u);
  EXPECT_TRUE(negatives == 66 || negatives == 67) << negatives;
  EXPECT_TRUE(validate_dataset(ds));
}

TEST(ThreeGaussians, OnePointPerComponent) {
  Rng rng(2);
  auto ds = gen_three_gaussians(3, rng);
  EXPECT_EQ(*ds.labels, (std::vector<Label>{1, 0, 1}));
  EXPECT_LT(ds.row(0)[0], ds.row(2)[0]);
  EXPECT_THROW(gen_three_gaussians(2, rng), Error);
}

TEST(ThreeGaussians, ComponentMeans) {
  Rng rng(3);
  auto ds = gen_three_gaussians(30000, rng);
  double sums[3][2] = {};
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = c * 10000; i < (c + 1) * 10000u; ++i) {
      sums[c][0] += ds.row(i)[0];
      sums[c][1] += ds.row(i)[1];
    }
  }
  EXPECT_NEAR(sums[0][0] / 10000, -4.0, 0.05);
  EXPECT_NEAR(sums[1][0] / 10000, 0.0, 0.05);
  EXPECT_NEAR(sums[2][0] / 10000, 4.0, 0.05);
  for (auto& s : sums) EXPECT_NEAR(s[1] / 10000, 0.0, 0.05);
}

TEST(Generators, DeterministicForSeed) {
  Rng a(5), b(5);
  EXPECT_EQ(gen_three_gaussians(50, a), gen_three_gaussians(50, b));
  Rng c(6), d(6);
  EXPECT_EQ(gen_clustered(100, 4, 3, 2, 2.0, c), gen_clustered(100, 4, 3, 2, 2.0, d));
}

TEST(GenClustered, SeparatedTwoClassIsLearnable) {
  Rng rng(7);
  auto ds = gen_clustered(400, 5, 2, 1, 8.0, rng);
  LearnerConfig cfg;
  cfg.epochs = 300;
  auto model = fit(ds, cfg);
  EXPECT_GE(evaluate_accuracy(model, ds).accuracy, 0.99);
}

TEST(GenClustered, OnePointPerClass) {
  Rng rng(8);
  auto ds = gen_clustered(10, 3, 10, 1, 1.0, rng);
  EXPECT_TRUE(validate_dataset(ds));
  std::vector<Label> expected(10);
  for (Label i = 0; i < 10; ++i) expected[i] = i;
  EXPECT_EQ(*ds.labels, expected);
}

TEST(GenClustered, MeansRespectSeparationOrFail) {
  Rng rng(9);
  // 40 blobs on a line segment of length 4 * separation cannot be spaced out.
  EXPECT_EQ(code_of([&] { gen_clustered(40, 1, 10, 4, 5.0, rng); }), ErrorCode::InfeasibleSeparation);
  EXPECT_THROW(gen_clustered(5, 2, 3, 2, 1.0, rng), Error);  // n < blobs
}

TEST(Bootstrap, FactorOneCopiesRows) {
  Rng data(1);
  auto ds = oracle::random_dataset(data, 20, 3, 0.0, 2);
  const auto original = ds;
  Rng rng(2);
  auto out = bootstrap_inflate(ds, 1, rng);
  EXPECT_EQ(out.n, 20u);
  EXPECT_EQ(ds, original);
  for (Index i = 0; i < out.n; ++i) {
    bool found = false;
    for (Index j = 0; j < ds.n && !found; ++j) {
      found = std::equal(out.row(i).begin(), out.row(i).end(), ds.row(j).begin()) && out.label(i) == ds.label(j);
    }
    EXPECT_TRUE(found);
  }
}

TEST(Bootstrap, FactorThreeOnFiveRows) {
  Rng data(3);
  auto ds = oracle::random_dataset(data, 5, 2);
  Rng rng(4);
  auto out = bootstrap_inflate(ds, 3, rng);
  EXPECT_EQ(out.n, 15u);
  for (Index i = 0; i < out.n; ++i) {
    bool found = false;
    for (Index j = 0; j < ds.n; ++j) found |= std::equal(out.row(i).begin(), out.row(i).end(), ds.row(j).begin());
    EXPECT_TRUE(found);
  }
  EXPECT_THROW(bootstrap_inflate(ds, 0, rng), Error);
}

TEST(Bootstrap, ClassFrequenciesChiSquareSanity) {
  Rng data(5);
  auto ds = oracle::random_dataset(data, 300, 1, 0.0, 4);
  std::vector<double> freq(4, 0.0);
  for (Label l : *ds.labels) freq[l] += 1.0 / 300.0;
  double total = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    auto out = bootstrap_inflate(ds, 3, rng);
    std::vector<double> counts(4, 0.0);
    for (Label l : *out.labels) counts[l] += 1.0;
    double chi = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double expected = freq[c] * out.n;
      chi += (counts[c] - expected) * (counts[c] - expected) / expected;
    }
    total += chi;
  }
  // Mean statistic should sit near 3 degrees of freedom; this only catches gross bias.
  EXPECT_LT(total / 20.0, 9.0);
}

TEST(BinaryFormat, ExactByteLayout) {
  auto ds = make_dataset(1, 2, {1.0f, -2.0f}, {1}, 3);
  const auto bytes = encode_embeddings(ds);
  const std::vector<std::uint8_t> expected = {
      'F', 'F', 'A', 'L', 1, 1, 0, 0,            // magic, version, flags, reserved
      1, 0, 0, 0, 0, 0, 0, 0,                    // n
      2, 0, 0, 0, 0, 0, 0, 0,                    // d
      0x00, 0x00, 0x80, 0x3f,                    // 1.0f
      0x00, 0x00, 0x00, 0xc0,                    // -2.0f
      1, 0, 0, 0,                                // label
      3, 0, 0, 0,                                // k
  };
  EXPECT_EQ(bytes, expected);

  auto unlabeled = encode_embeddings(ds.without_labels());
  EXPECT_EQ(unlabeled.size(), 24u + 8u);
  EXPECT_EQ(unlabeled[5], 0);
}

TEST(BinaryFormat, RoundTripThroughFile) {
  Rng rng(7);
  auto ds = oracle::random_dataset(rng, 7, 3, 0.0, 4);
  ds.values[4] = -0.0f;
  ds.values[5] = 1e-40f;  // subnormal
  const auto path = temp_path("roundtrip.ffal");
  save_embeddings(ds, path);
  auto back = load_embeddings(path);
  EXPECT_TRUE(bitwise_equal(ds, back));
  EXPECT_TRUE(std::signbit(back.values[4]));

  auto unlabeled = ds.without_labels();
  save_embeddings(unlabeled, path);
  EXPECT_TRUE(bitwise_equal(unlabeled, load_embeddings(path)));
  fs::remove(path);
}

TEST(BinaryFormat, MalformedFilesHaveDistinctErrors) {
  auto ds = make_dataset(2, 2, {1, 2, 3, 4}, {0, 1}, 2);
  auto good = encode_embeddings(ds);

  auto bad_magic = good;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  EXPECT_EQ(code_of([&] { decode_embeddings(bad_magic); }), ErrorCode::BadMagic);

  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(code_of([&] { decode_embeddings(bad_version); }), ErrorCode::VersionMismatch);

  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, std::size_t{30}, good.size() - 1}) {
    std::vector<std::uint8_t> truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_EQ(code_of([&] { decode_embeddings(truncated); }), ErrorCode::Truncated) << cut;
  }

  auto huge_n = good;
  huge_n[15] = 0x7f;
  EXPECT_EQ(code_of([&] { decode_embeddings(huge_n); }), ErrorCode::Truncated);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(code_of([&] { decode_embeddings(trailing); }), ErrorCode::Parse);

  auto bad_label = good;
  bad_label[bad_label.size() - 4] = 1;  // k = 1 while a label is 1
  EXPECT_EQ(code_of([&] { decode_embeddings(bad_label); }), ErrorCode::LabelOutOfRange);

  EXPECT_EQ(code_of([&] { load_embeddings(temp_path("does_not_exist.ffal")); }), ErrorCode::Io);
}

TEST(CsvFormat, LabeledExample) {
  std::istringstream in("label,f0,f1\n0,1.0,2.0\n1,3.0,4.0");
  auto ds = parse_csv_embeddings(in);
  EXPECT_EQ(ds.n, 2u);
  EXPECT_EQ(ds.d, 2u);
  EXPECT_EQ(ds.k, 2u);
  EXPECT_EQ(*ds.labels, (std::vector<Label>{0, 1}));
  EXPECT_EQ(ds.values, (std::vector<float>{1, 2, 3, 4}));
}

TEST(CsvFormat, UnlabeledSingleValue) {
  std::istringstream in("f0\n1.5\n");
  auto ds = parse_csv_embeddings(in);
  EXPECT_EQ(ds.n, 1u);
  EXPECT_EQ(ds.d, 1u);
  EXPECT_FALSE(ds.has_labels());
  EXPECT_EQ(ds.values[0], 1.5f);
}

TEST(CsvFormat, ErrorsCarryLineNumbers) {
  std::istringstream ragged("f0,f1\n1,2\n3\n");
  try {
    parse_csv_embeddings(ragged);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream word("label,f0\n0,abc\n");
  try {
    parse_csv_embeddings(word);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream negative_label("label,f0\n-1,2\n");
  EXPECT_THROW(parse_csv_embeddings(negative_label), Error);
}

TEST(CsvFormat, RoundTripAtNineDigits) {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    auto ds = oracle::random_dataset(rng, 1 + rng.uniform_index(20), 1 + rng.uniform_index(5), 0.0,
                                     t % 2 ? 3 : 0);
    for (auto& v : ds.values) v *= static_cast<float>(std::pow(10.0, rng.uniform(-8, 8)));
    std::stringstream buf;
    write_csv_embeddings(ds, buf);
    auto back = parse_csv_embeddings(buf);
    EXPECT_EQ(back.values, ds.values);
    EXPECT_EQ(back.labels, ds.labels);
  }
}

TEST(ResultsCsv, Format) {
  std::vector<ResultRow> rows = {{0, 10, 0.5, "ff", 7}, {1, 12, 2.0 / 3.0, "ff", 7}};
  std::ostringstream out;
  write_results_csv(rows, out);
  EXPECT_EQ(out.str(),
            "round,labeled_count,test_accuracy,strategy,seed\n"
            "0,10,0.500000,ff,7\n"
            "1,12,0.666667,ff,7\n");
}

TEST(ContentHash, Fnv1aReference) {
  const std::uint8_t a[] = {'a'};
  EXPECT_EQ(content_hash({}), 0xcbf29ce484222325ULL);
  EXPECT_EQ(content_hash(a), 0xaf63dc4c8601ec8cULL);
}
