#include "aplab/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "aplab/errors.hpp"

namespace aplab {

namespace {

std::uint32_t read_be_u32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

MnistSplit gather(const MnistSplit& split, const std::vector<Eigen::Index>& idx) {
  MnistSplit out;
  out.images.resize(Eigen::Index(idx.size()), split.images.cols());
  out.labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.images.row(Eigen::Index(r)) = split.images.row(idx[r]);
    out.labels[r] = split.labels[std::size_t(idx[r])];
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_file_maybe_gz(const std::string& path) {
  // gzread copies non-gzip files verbatim, so one code path covers both.
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw InputError("cannot open " + path);
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + n);
  const bool ok = n == 0;
  gzclose(f);
  if (!ok) throw FormatError("decompression failed for " + path);
  return out;
}

IdxData parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FormatError("idx: truncated header");
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("idx: bad magic");
  const std::uint8_t dtype = bytes[2];
  const std::uint8_t ndim = bytes[3];
  if (dtype != 0x08) throw FormatError("idx: unsupported element type " + std::to_string(dtype));
  if (ndim == 0) throw FormatError("idx: zero-dimensional tensor");
  const std::size_t header = 4 + 4 * std::size_t(ndim);
  if (bytes.size() < header) throw FormatError("idx: truncated dimension list");

  IdxData out;
  out.magic = read_be_u32(bytes.data());
  std::size_t count = 1;
  for (std::uint8_t d = 0; d < ndim; ++d) {
    const std::uint32_t dim = read_be_u32(bytes.data() + 4 + 4 * std::size_t(d));
    out.dims.push_back(dim);
    count *= dim;
  }
  if (bytes.size() != header + count)
    throw FormatError("idx: payload has " + std::to_string(bytes.size() - header) +
                      " bytes, dimensions require " + std::to_string(count));
  out.payload.assign(bytes.begin() + std::ptrdiff_t(header), bytes.end());
  return out;
}

namespace {

std::vector<std::uint8_t> read_idx_file(const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  for (const std::string& candidate : {dir + "/" + name, dir + "/" + name + ".gz"})
    if (fs::exists(candidate)) return read_file_maybe_gz(candidate);
  throw InputError("missing " + name + "[.gz] in " + dir);
}

MnistSplit load_split(const std::string& dir, const std::string& images_name,
                      const std::string& labels_name) {
  const IdxData images = parse_idx(read_idx_file(dir, images_name));
  const IdxData labels = parse_idx(read_idx_file(dir, labels_name));
  if (images.dims.size() != 3)
    throw FormatError(images_name + ": expected 3 dimensions, got " +
                      std::to_string(images.dims.size()));
  if (labels.dims.size() != 1)
    throw FormatError(labels_name + ": expected 1 dimension, got " +
                      std::to_string(labels.dims.size()));
  const Eigen::Index n = images.dims[0];
  const Eigen::Index pixels = Eigen::Index(images.dims[1]) * images.dims[2];
  if (Eigen::Index(labels.dims[0]) != n)
    throw FormatError("image/label counts differ: " + std::to_string(n) + " vs " +
                      std::to_string(labels.dims[0]));

  MnistSplit split;
  split.images.resize(n, pixels);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < pixels; ++c)
      split.images(r, c) = float(images.payload[std::size_t(r * pixels + c)]) / 255.0f;
  split.labels.resize(std::size_t(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const int label = labels.payload[std::size_t(r)];
    if (label < 0 || label >= 10)
      throw FormatError(labels_name + ": label " + std::to_string(label) + " out of range");
    split.labels[std::size_t(r)] = label;
  }
  return split;
}

}  // namespace

std::pair<MnistSplit, MnistSplit> load_mnist(const std::string& dir) {
  MnistSplit train = load_split(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte");
  MnistSplit test = load_split(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
  return {std::move(train), std::move(test)};
}

MnistSplit sample_subset(const MnistSplit& split, const SubsetSpec& spec) {
  if (!(spec.fraction > 0.0 && spec.fraction <= 1.0))
    throw InputError("subset fraction must be in (0,1], got " + std::to_string(spec.fraction));
  const Eigen::Index n = split.size();
  const Eigen::Index k = Eigen::Index(std::llround(spec.fraction * double(n)));
  if (k <= 0) throw InputError("subset fraction " + std::to_string(spec.fraction) +
                               " selects 0 of " + std::to_string(n) + " rows");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  std::mt19937_64 rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::size_t(k));
  return gather(split, idx);
}

std::vector<Batch> batches(const MnistSplit& split, int batch_size, std::uint64_t shuffle_seed) {
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  const Eigen::Index n = split.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  std::vector<Batch> out;
  for (Eigen::Index start = 0; start < n; start += batch_size) {
    const Eigen::Index size = std::min<Eigen::Index>(batch_size, n - start);
    Batch b;
    b.images.resize(size, split.images.cols());
    b.labels.resize(std::size_t(size));
    for (Eigen::Index r = 0; r < size; ++r) {
      b.images.row(r) = split.images.row(idx[std::size_t(start + r)]);
      b.labels[std::size_t(r)] = split.labels[std::size_t(idx[std::size_t(start + r)])];
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace aplab
