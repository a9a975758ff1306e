#include "csnk/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "csnk/errors.hpp"
#include "csnk/rng.hpp"

namespace csnk {

namespace {

constexpr std::uint32_t kImagesMagic = 2051;
constexpr std::uint32_t kLabelsMagic = 2049;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size())
    throw ParseError(path + ": truncated header at byte offset " + std::to_string(offset));
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(std::uint32_t got, std::uint32_t want, const std::string& path) {
  if (got != want)
    throw ParseError(path + ": wrong magic " + std::to_string(got) + " at byte offset 0 (expected " +
                     std::to_string(want) + ")");
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  check_magic(read_be32(img, 0, images_path), kImagesMagic, images_path);
  const std::size_t count = read_be32(img, 4, images_path);
  const std::size_t rows = read_be32(img, 8, images_path);
  const std::size_t cols = read_be32(img, 12, images_path);
  const std::size_t pixels = rows * cols;
  const std::size_t img_needed = 16 + count * pixels;
  if (img.size() < img_needed)
    throw ParseError(images_path + ": truncated pixel data at byte offset " + std::to_string(img.size()) +
                     " (expected " + std::to_string(img_needed) + " bytes)");
  if (img.size() > img_needed)
    throw ParseError(images_path + ": trailing bytes after byte offset " + std::to_string(img_needed));

  check_magic(read_be32(lab, 0, labels_path), kLabelsMagic, labels_path);
  const std::size_t label_count = read_be32(lab, 4, labels_path);
  if (label_count != count)
    throw ParseError(labels_path + ": count mismatch at byte offset 4: " + std::to_string(label_count) +
                     " labels for " + std::to_string(count) + " images");
  if (lab.size() != 8 + count)
    throw ParseError(labels_path + ": truncated label data at byte offset " + std::to_string(lab.size()) +
                     " (expected " + std::to_string(8 + count) + " bytes)");
  if (count == 0) throw ParseError(images_path + ": no images");

  Dataset data;
  data.features = Tensor<double>({count, pixels});
  for (std::size_t k = 0; k < count * pixels; ++k) data.features[k] = img[16 + k] / 255.0;
  data.labels.resize(count);
  int max_label = 0;
  for (std::size_t k = 0; k < count; ++k) {
    data.labels[k] = lab[8 + k];
    max_label = std::max(max_label, data.labels[k]);
  }
  data.classes = max_label + 1;
  return data;
}

void save_idx(const Dataset& data, std::size_t rows, std::size_t cols, const std::string& images_path,
              const std::string& labels_path) {
  if (rows * cols != data.d()) throw ShapeError("image dimensions do not match the feature count");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw std::runtime_error("cannot write IDX files");
  write_be32(img, kImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(data.n()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  for (std::size_t k = 0; k < data.features.size(); ++k) {
    const double v = std::clamp(data.features[k], 0.0, 1.0);
    img.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_be32(lab, kLabelsMagic);
  write_be32(lab, static_cast<std::uint32_t>(data.n()));
  for (const int y : data.labels) lab.put(static_cast<char>(static_cast<unsigned char>(y)));
}

Dataset load_libsvm(const std::string& path, std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  struct Row {
    double label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError(path + ": line " + std::to_string(line_no) + ": " + what);
  };
  auto parse_number = [&](std::string_view tok, double& out) {
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(out))
      fail("malformed number '" + std::string(tok) + "'");
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;

    Row row{};
    std::size_t pos = 0;
    bool first = true;
    std::size_t prev_index = 0;
    while (pos < view.size()) {
      const auto end = view.find_first_of(" \t", pos);
      const auto tok = view.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      pos = end == std::string_view::npos ? view.size() : view.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = view.size();
      if (first) {
        if (tok.starts_with('+')) parse_number(tok.substr(1), row.label);
        else parse_number(tok, row.label);
        first = false;
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) fail("malformed token '" + std::string(tok) + "' (expected idx:val)");
      std::size_t index = 0;
      const auto idx_tok = tok.substr(0, colon);
      const auto res = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), index);
      if (res.ec != std::errc{} || res.ptr != idx_tok.data() + idx_tok.size() || index == 0)
        fail("malformed index '" + std::string(idx_tok) + "' (indices are 1-based)");
      if (index <= prev_index)
        fail("non-ascending index " + std::to_string(index) + " after " + std::to_string(prev_index));
      prev_index = index;
      double value = 0.0;
      parse_number(tok.substr(colon + 1), value);
      row.entries.emplace_back(index, value);
      max_index = std::max(max_index, index);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no samples");

  const std::size_t d = expected_dim.value_or(max_index);
  if (d == 0) throw ParseError(path + ": no feature dimensions");
  if (max_index > d)
    throw ParseError(path + ": feature index " + std::to_string(max_index) + " exceeds expected dimension " +
                     std::to_string(d));

  std::map<double, int> ids;
  for (const auto& r : rows) ids.emplace(r.label, 0);
  Dataset data;
  for (auto& [value, id] : ids) {
    id = static_cast<int>(data.label_values.size());
    data.label_values.push_back(value);
  }
  data.classes = static_cast<int>(ids.size());
  data.features = Tensor<double>({rows.size(), d});
  data.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [index, value] : rows[r].entries) data.features(r, index - 1) = value;
    data.labels.push_back(ids.at(rows[r].label));
  }
  return data;
}

Dataset make_blobs(std::size_t n, std::size_t d, int classes, double separation, std::uint64_t seed) {
  if (n == 0 || d == 0 || classes < 1) throw std::invalid_argument("make_blobs: empty request");
  Rng rng(mix_seed(seed, 0xb10b));
  std::vector<double> centers(static_cast<std::size_t>(classes) * d);
  for (auto& c : centers) c = separation * rng.normal();
  Dataset data;
  data.classes = classes;
  data.features = Tensor<double>({n, d});
  data.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    data.labels[r] = y;
    for (std::size_t j = 0; j < d; ++j) data.features(r, j) = centers[y * d + j] + rng.normal();
  }
  return data;
}

Dataset downsample_images(const Dataset& data, std::size_t side_in, std::size_t side_out) {
  if (side_in * side_in != data.d()) throw ShapeError("downsample: images are not side_in x side_in");
  if (side_out == 0 || side_out > side_in) throw std::invalid_argument("downsample: bad output side");
  const double scale = static_cast<double>(side_in) / static_cast<double>(side_out);
  // Overlap of source cell [k, k+1) with target cell [t*scale, (t+1)*scale).
  std::vector<double> weight(side_out * side_in, 0.0);
  for (std::size_t t = 0; t < side_out; ++t)
    for (std::size_t k = 0; k < side_in; ++k) {
      const double lo = std::max(static_cast<double>(k), t * scale);
      const double hi = std::min(static_cast<double>(k + 1), (t + 1) * scale);
      if (hi > lo) weight[t * side_in + k] = (hi - lo) / scale;
    }
  Dataset out;
  out.classes = data.classes;
  out.labels = data.labels;
  out.label_values = data.label_values;
  out.features = Tensor<double>({data.n(), side_out * side_out});
  for (std::size_t r = 0; r < data.n(); ++r) {
    const auto src = data.features.row(r);
    auto dst = out.features.row(r);
    for (std::size_t ty = 0; ty < side_out; ++ty)
      for (std::size_t tx = 0; tx < side_out; ++tx) {
        double acc = 0.0;
        for (std::size_t y = 0; y < side_in; ++y) {
          const double wy = weight[ty * side_in + y];
          if (wy == 0.0) continue;
          for (std::size_t x = 0; x < side_in; ++x) acc += wy * weight[tx * side_in + x] * src[y * side_in + x];
        }
        dst[ty * side_out + tx] = acc;
      }
  }
  return out;
}

Dataset take(const Dataset& data, std::size_t count) {
  count = std::min(count, data.n());
  Dataset out;
  out.classes = data.classes;
  out.label_values = data.label_values;
  out.labels.assign(data.labels.begin(), data.labels.begin() + static_cast<std::ptrdiff_t>(count));
  const auto& v = data.features.values();
  out.features = Tensor<double>({count, data.d()}, std::vector<double>(v.begin(), v.begin() + count * data.d()));
  return out;
}

Batch to_batch(const Dataset& data) {
  Batch b;
  b.inputs = data.features;
  b.labels = data.labels;
  return b;
}

Batch to_autoencoder_batch(const Dataset& data) {
  Batch b;
  b.inputs = data.features;
  b.targets = data.features;
  return b;
}

}  // namespace csnk
