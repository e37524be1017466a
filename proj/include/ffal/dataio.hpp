#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffal/dataset.hpp"
#include "ffal/rng.hpp"

namespace ffal {

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Three unit-variance isotropic 2-D Gaussians centred at (-4,0), (0,0), (4,0).
/// The middle component is class 0, the outer two class 1. Component c gets
/// n/3 rows plus one if c < n % 3; rows are emitted component by component.
EmbeddingDataset gen_three_gaussians(std::size_t n, Rng& rng);

/// Gaussian blobs (unit variance) whose means are drawn uniformly from the
/// cube [-w, w]^d, w = max(1, 2 * separation), and kept pairwise at least
/// `separation` apart by rejection (1000 attempts per mean). Row i belongs to blob i % (k * clusters_per_class) and
/// blob b to class b % k.
EmbeddingDataset gen_clustered(std::size_t n, std::size_t d, std::size_t k, std::size_t clusters_per_class,
                               double separation, Rng& rng);

/// factor * n row ids drawn uniformly with replacement from [0, n).
std::vector<Index> bootstrap_sample_indices(std::size_t n, std::size_t factor, Rng& rng);
EmbeddingDataset bootstrap_inflate(const EmbeddingDataset& ds, std::size_t factor, Rng& rng);

// ---------------------------------------------------------------------------
// FFAL binary embeddings
//
//   offset 0   "FFAL"
//          4   version (u8) = 1
//          5   flags (u8), bit 0: labels present
//          6   two reserved zero bytes
//          8   n (u64 LE)
//         16   d (u64 LE)
//         24   n*d float32 LE, row-major
//              [labels] n x u32 LE, then k as u32 LE
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kFfalVersion = 1;

std::vector<std::uint8_t> encode_embeddings(const EmbeddingDataset& ds);
EmbeddingDataset decode_embeddings(std::span<const std::uint8_t> bytes);

void save_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path);
EmbeddingDataset load_embeddings(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CSV embeddings: header "label,f0,f1,..." or "f0,f1,...", one row per line.
// ---------------------------------------------------------------------------

EmbeddingDataset parse_csv_embeddings(std::istream& in);
EmbeddingDataset load_csv_embeddings(const std::filesystem::path& path);
/// Values written with 9 significant digits.
void write_csv_embeddings(const EmbeddingDataset& ds, std::ostream& out);
void save_csv_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path);

/// Dispatches on extension: ".csv" goes through the CSV reader, anything else FFAL.
EmbeddingDataset load_any(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ResultRow {
  std::size_t round = 0;
  std::size_t labeled_count = 0;
  double test_accuracy = 0.0;
  std::string strategy;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kResultsHeader = "round,labeled_count,test_accuracy,strategy,seed";

/// Header line then one line per row; accuracy printed with 6 decimals.
void write_results_csv(std::span<const ResultRow> rows, std::ostream& out);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// FNV-1a 64 over the bytes.
std::uint64_t content_hash(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace ffal
