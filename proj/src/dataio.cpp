#include "ffal/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace ffal {

EmbeddingDataset gen_three_gaussians(std::size_t n, Rng& rng) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "gen_three_gaussians needs n >= 3");
  constexpr double kMeans[3] = {-4.0, 0.0, 4.0};
  constexpr Label kLabels[3] = {1, 0, 1};
  EmbeddingDataset ds;
  ds.n = n;
  ds.d = 2;
  ds.k = 2;
  ds.values.reserve(2 * n);
  ds.labels.emplace();
  ds.labels->reserve(n);
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t count = n / 3 + (c < n % 3 ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      ds.values.push_back(static_cast<float>(kMeans[c] + rng.normal()));
      ds.values.push_back(static_cast<float>(rng.normal()));
      ds.labels->push_back(kLabels[c]);
    }
  }
  return ds;
}

EmbeddingDataset gen_clustered(std::size_t n, std::size_t d, std::size_t k, std::size_t clusters_per_class,
                               double separation, Rng& rng) {
  if (d == 0 || k == 0 || clusters_per_class == 0) {
    throw Error(ErrorCode::InvalidArgument, "gen_clustered needs d, k, clusters_per_class >= 1");
  }
  const std::size_t blobs = k * clusters_per_class;
  if (n < blobs) throw Error(ErrorCode::InvalidArgument, "gen_clustered needs n >= k * clusters_per_class");
  if (!std::isfinite(separation) || separation < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "separation must be finite and nonnegative");
  }

  const double half_width = std::max(1.0, 2.0 * separation);
  constexpr int kRetries = 1000;
  std::vector<double> means;
  means.reserve(blobs * d);
  std::vector<double> candidate(d);
  for (std::size_t b = 0; b < blobs; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < kRetries && !placed; ++attempt) {
      for (double& x : candidate) x = rng.uniform(-half_width, half_width);
      placed = true;
      for (std::size_t o = 0; o < b && placed; ++o) {
        std::span<const double> other(means.data() + o * d, d);
        if (squared_distance(std::span<const double>(candidate), other) < separation * separation) placed = false;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::InfeasibleSeparation,
                  "could not place blob " + std::to_string(b) + " at separation " + std::to_string(separation));
    }
    means.insert(means.end(), candidate.begin(), candidate.end());
  }

  EmbeddingDataset ds;
  ds.n = n;
  ds.d = d;
  ds.k = static_cast<Label>(k);
  ds.values.resize(n * d);
  ds.labels.emplace(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i % blobs;
    for (std::size_t j = 0; j < d; ++j) ds.values[i * d + j] = static_cast<float>(means[b * d + j] + rng.normal());
    (*ds.labels)[i] = static_cast<Label>(b % k);
  }
  return ds;
}

std::vector<Index> bootstrap_sample_indices(std::size_t n, std::size_t factor, Rng& rng) {
  if (factor == 0) throw Error(ErrorCode::InvalidArgument, "bootstrap factor must be at least 1");
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "cannot bootstrap an empty dataset");
  std::vector<Index> out(n * factor);
  for (auto& i : out) i = rng.uniform_index(n);
  return out;
}

EmbeddingDataset bootstrap_inflate(const EmbeddingDataset& ds, std::size_t factor, Rng& rng) {
  require_valid(ds);
  auto rows = bootstrap_sample_indices(ds.n, factor, rng);
  return ds.subset(rows);
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'F', 'F', 'A', 'L'};
constexpr std::size_t kHeaderSize = 24;
constexpr std::uint8_t kFlagLabels = 0x01;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_embeddings(const EmbeddingDataset& ds) {
  require_valid(ds);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + ds.values.size() * 4 + (ds.has_labels() ? ds.n * 4 + 4 : 0));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kFfalVersion);
  out.push_back(ds.has_labels() ? kFlagLabels : 0);
  out.push_back(0);
  out.push_back(0);
  put_u64(out, ds.n);
  put_u64(out, ds.d);
  for (float v : ds.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (ds.has_labels()) {
    for (Label l : *ds.labels) put_u32(out, l);
    put_u32(out, ds.k);
  }
  return out;
}

EmbeddingDataset decode_embeddings(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::Truncated, "truncated: file shorter than magic");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::BadMagic, "bad magic: not an FFAL file");
  }
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::Truncated, "truncated: incomplete header");
  if (bytes[4] != kFfalVersion) {
    throw Error(ErrorCode::VersionMismatch, "version mismatch: file has " + std::to_string(bytes[4]) +
                                                ", reader supports " + std::to_string(kFfalVersion));
  }
  const std::uint8_t flags = bytes[5];
  if ((flags & ~kFlagLabels) != 0) throw Error(ErrorCode::Parse, "unknown flag bits set");
  if (bytes[6] != 0 || bytes[7] != 0) throw Error(ErrorCode::Parse, "reserved header bytes are not zero");
  const std::uint64_t n = get_u64(bytes.data() + 8);
  const std::uint64_t d = get_u64(bytes.data() + 16);
  if (n == 0 || d == 0) throw Error(ErrorCode::EmptyDataset, "declared n and d must be positive");

  const bool labeled = (flags & kFlagLabels) != 0;
  const std::uint64_t available = bytes.size() - kHeaderSize;
  // Divide rather than multiply so that absurd declared sizes cannot overflow.
  if (n > available / 4 / d) throw Error(ErrorCode::Truncated, "truncated payload");
  const std::uint64_t payload = n * d * 4;
  const std::uint64_t label_bytes = labeled ? (n + 1) * 4 : 0;
  if (available - payload < label_bytes) throw Error(ErrorCode::Truncated, "truncated label block");
  if (available - payload > label_bytes) throw Error(ErrorCode::Parse, "trailing bytes after declared payload");

  EmbeddingDataset ds;
  ds.n = static_cast<std::size_t>(n);
  ds.d = static_cast<std::size_t>(d);
  ds.values.resize(ds.n * ds.d);
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (auto& v : ds.values) {
    v = std::bit_cast<float>(get_u32(p));
    p += 4;
  }
  if (labeled) {
    ds.labels.emplace(ds.n);
    for (auto& l : *ds.labels) {
      l = get_u32(p);
      p += 4;
    }
    ds.k = get_u32(p);
  }
  require_valid(ds);
  return ds;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void save_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path) {
  auto bytes = encode_embeddings(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

EmbeddingDataset load_embeddings(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return decode_embeddings(bytes);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

EmbeddingDataset parse_csv_embeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "line 1: missing header");
  ++line_no;
  auto header = split_commas(trim(line));
  const bool labeled = trim(header.front()) == "label";
  const std::size_t d = header.size() - (labeled ? 1 : 0);
  if (d == 0) parse_fail(line_no, "header declares no feature columns");

  EmbeddingDataset ds;
  ds.d = d;
  std::vector<Label> labels;
  Label max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty()) continue;
    auto cells = split_commas(text);
    if (cells.size() != header.size()) {
      parse_fail(line_no, "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    std::size_t c = 0;
    if (labeled) {
      auto cell = trim(cells[c++]);
      Label value = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) parse_fail(line_no, "label is not a nonnegative integer");
      labels.push_back(value);
      max_label = std::max(max_label, value);
    }
    for (; c < cells.size(); ++c) {
      auto cell = trim(cells[c]);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
        parse_fail(line_no, "non-numeric cell '" + std::string(cell) + "'");
      }
      if (!std::isfinite(value)) parse_fail(line_no, "non-finite value");
      ds.values.push_back(static_cast<float>(value));
    }
    ++ds.n;
  }
  if (ds.n == 0) throw Error(ErrorCode::EmptyDataset, "CSV has no data rows");
  if (labeled) {
    ds.labels = std::move(labels);
    ds.k = max_label + 1;
  }
  require_valid(ds);
  return ds;
}

EmbeddingDataset load_csv_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_csv_embeddings(in);
}

void write_csv_embeddings(const EmbeddingDataset& ds, std::ostream& out) {
  if (ds.has_labels()) out << "label,";
  for (std::size_t j = 0; j < ds.d; ++j) out << (j ? "," : "") << 'f' << j;
  out << '\n';
  const auto old_precision = out.precision(9);
  for (Index i = 0; i < ds.n; ++i) {
    if (ds.has_labels()) out << ds.label(i) << ',';
    auto row = ds.row(i);
    for (std::size_t j = 0; j < ds.d; ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
  out.precision(old_precision);
}

void save_csv_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_csv_embeddings(ds, out);
}

EmbeddingDataset load_any(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_csv_embeddings(path);
  return load_embeddings(path);
}

void write_results_csv(std::span<const ResultRow> rows, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    char acc[32];
    std::snprintf(acc, sizeof acc, "%.6f", r.test_accuracy);
    out << r.round << ',' << r.labeled_count << ',' << acc << ',' << r.strategy << ',' << r.seed << '\n';
  }
}

std::uint64_t content_hash(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ffal
