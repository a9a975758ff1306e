#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csnk/network.hpp"
#include "csnk/tensor.hpp"

namespace csnk {

struct Dataset {
  Tensor<double> features;  // n x d
  std::vector<int> labels;  // n entries in [0, classes)
  int classes = 0;
  /// Original label value of each class id (LIBSVM remapping); empty for IDX.
  std::vector<double> label_values;

  std::size_t n() const { return features.rank() == 2 ? features.extent(0) : 0; }
  std::size_t d() const { return features.rank() == 2 ? features.extent(1) : 0; }
};

/// MNIST IDX pair: images (magic 2051) and labels (magic 2049). Pixels are
/// scaled to [0, 1]; each image is flattened row-major.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// LIBSVM text: `<label> <idx>:<val> ...` with 1-based ascending indices and
/// `#` comments. Missing indices are zero. Labels are remapped to contiguous
/// ids in ascending order of their values.
Dataset load_libsvm(const std::string& path, std::optional<std::size_t> expected_dim = std::nullopt);

/// Writes the IDX pair (pixels are quantized to bytes by rounding x*255).
void save_idx(const Dataset& data, std::size_t rows, std::size_t cols, const std::string& images_path,
              const std::string& labels_path);

/// Seeded Gaussian blobs: class centers ~ N(0, separation^2 I), points ~
/// center + N(0, I).
Dataset make_blobs(std::size_t n, std::size_t d, int classes, double separation, std::uint64_t seed);

/// Area-averaging resize of square side_in x side_in images to side_out x side_out.
Dataset downsample_images(const Dataset& data, std::size_t side_in, std::size_t side_out);

/// The first `count` samples.
Dataset take(const Dataset& data, std::size_t count);

/// Classification batch over all samples.
Batch to_batch(const Dataset& data);

/// Autoencoder batch over all samples (targets = inputs).
Batch to_autoencoder_batch(const Dataset& data);

}  // namespace csnk
