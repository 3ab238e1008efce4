#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aplab/matrix.hpp"

namespace aplab {

/// Flat images scaled into [0,1], one row per example.
struct MnistSplit {
  Mat images;               // N x 784
  std::vector<int> labels;  // class indices in [0,10)

  Eigen::Index size() const { return images.rows(); }
};

struct SubsetSpec {
  double fraction = 1.0;  // in (0,1]
  std::uint64_t seed = 0;
};

struct Batch {
  Mat images;
  std::vector<int> labels;
};

/// Decoded IDX tensor (unsigned byte payload).
struct IdxData {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

/// Parses an IDX byte stream (big-endian header, u8 payload).
IdxData parse_idx(const std::vector<std::uint8_t>& bytes);

/// Reads a file, transparently inflating gzip content.
std::vector<std::uint8_t> read_file_maybe_gz(const std::string& path);

/// Loads the four standard MNIST files (plain or .gz) from `dir`.
std::pair<MnistSplit, MnistSplit> load_mnist(const std::string& dir);

/// Uniform sample without replacement of round(fraction * N) rows, shuffled.
MnistSplit sample_subset(const MnistSplit& split, const SubsetSpec& spec);

/// Seeded shuffle sliced into batches; covers each row exactly once.
std::vector<Batch> batches(const MnistSplit& split, int batch_size, std::uint64_t shuffle_seed);

}  // namespace aplab
